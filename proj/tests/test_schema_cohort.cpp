#include <algorithm>
#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "stemboost/cohort.hpp"
#include "stemboost/schema.hpp"

using namespace stemboost;

TEST_CASE("study schema exposes the seven features and two targets") {
  const FeatureSchema& s = study_schema();
  CHECK(s.n_features() == 7);
  CHECK(s.n_targets() == 2);
  CHECK(s.feature_index("math_score") == 5);
  CHECK(s.feature_index("nope") == -1);
  CHECK(s.target_index("stem") == 1);
  CHECK(s.level_index(3, "AppliedSciences") == 2);
  CHECK(s.level_index(3, "nope") == -1);
}

TEST_CASE("schema fingerprint tracks structure, not identity") {
  const FeatureSchema a({{"x", FeatureKind::numeric, {}}}, {"y"});
  const FeatureSchema b({{"x", FeatureKind::numeric, {}}}, {"y"});
  const FeatureSchema c({{"x2", FeatureKind::numeric, {}}}, {"y"});
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != c.fingerprint());
  CHECK(a == b);
  CHECK(!(a == c));
}

TEST_CASE("schema rejects malformed definitions") {
  CHECK_THROWS_AS(FeatureSchema({{"x", FeatureKind::numeric, {}},
                                 {"x", FeatureKind::numeric, {}}},
                                {}),
                  Error);
  CHECK_THROWS_AS(FeatureSchema({{"c", FeatureKind::categorical, {}}}, {}),
                  Error);
  CHECK_THROWS_AS(
      FeatureSchema({{"c", FeatureKind::categorical, {"a", "a"}}}, {}),
      Error);
  CHECK_THROWS_AS(FeatureSchema({{"x", FeatureKind::numeric, {}}}, {"x"}),
                  Error);
}

TEST_CASE("csv round trip preserves every cell") {
  Rng rng(21);
  const Cohort cohort = testutil::random_cohort(rng, 60, 2, {3, 5});
  const Cohort back = parse_csv(to_csv(cohort), cohort.schema(), "test");
  CHECK(back.identical_to(cohort));
}

TEST_CASE("csv parsing validates structure") {
  const FeatureSchema schema({{"x", FeatureKind::numeric, {}},
                              {"c", FeatureKind::categorical, {"a", "b"}}},
                             {"y"});
  CHECK_THROWS_AS(parse_csv("x,c\n1,a\n", schema, "test"), Error);  // missing target
  CHECK_THROWS_AS(parse_csv("x,c,y\n1,a\n", schema, "test"), Error);  // ragged
  CHECK_THROWS_AS(parse_csv("x,c,y\n1,z,0\n", schema, "test"), Error);  // bad level
  CHECK_THROWS_AS(parse_csv("x,c,y\nfoo,a,0\n", schema, "test"), Error);
  CHECK_THROWS_AS(parse_csv("x,c,y\n1,a,7\n", schema, "test"), Error);  // bad target

  const Cohort ok = parse_csv("x,c,y\n1.5,b,NA\n", schema, "test");
  CHECK(ok.n_rows() == 1);
  CHECK(ok.target("y")[0] == kTargetNA);
  CHECK(ok.numeric_cell(0, 0) == 1.5);
  CHECK(ok.categorical_cell(1, 0) == 1);
}

TEST_CASE("csv accepts any column order and rejects unknown names") {
  const FeatureSchema schema({{"x", FeatureKind::numeric, {}},
                              {"c", FeatureKind::categorical, {"a", "b"}}},
                             {"y"});
  const Cohort swapped = parse_csv("y,c,x\n1,a,2.5\n", schema, "test");
  CHECK(swapped.numeric_cell(0, 0) == 2.5);
  CHECK(swapped.target("y")[0] == 1);
  CHECK_THROWS_AS(parse_csv("x,c,y,extra\n1,a,0,9\n", schema, "test"), Error);
}

TEST_CASE("select keeps rows in the given order") {
  Rng rng(33);
  const Cohort cohort = testutil::random_cohort(rng, 20, 1, {2});
  const Cohort sub = cohort.select({5, 3, 19});
  REQUIRE(sub.n_rows() == 3);
  CHECK(sub.numeric_cell(0, 0) == cohort.numeric_cell(0, 5));
  CHECK(sub.numeric_cell(0, 1) == cohort.numeric_cell(0, 3));
  CHECK(sub.categorical_cell(1, 2) == cohort.categorical_cell(1, 19));
  CHECK_THROWS_AS(cohort.select({20}), Error);
}

TEST_CASE("filter_zero_scores drops exactly the zero-score rows") {
  const std::string csv =
      "gender,hs_macroregion,hs_type,hs_curriculum,hs_ses,math_score,"
      "italian_score,enrolled,stem\n"
      "F,North,Public,Humanistic,0.1,200,210,1,0\n"
      "M,Center,Public,Humanistic,0.2,0,190,0,NA\n"
      "F,North,Private,TradScientific,-0.5,180,0,1,1\n"
      "M,SouthIslands,Public,AppliedSciences,0.0,150,150,0,NA\n";
  const Cohort cohort = parse_csv(csv, study_schema(), "test");
  const auto [kept, dropped] = filter_zero_scores(cohort);
  CHECK(dropped == 2);
  REQUIRE(kept.n_rows() == 2);
  CHECK(kept.numeric_cell(5, 0) == 200.0);
  CHECK(kept.numeric_cell(5, 1) == 150.0);
  // an ses of zero is fine, only the two test scores are screened
  CHECK(kept.numeric_cell(4, 1) == 0.0);
}

TEST_CASE("train_test_split partitions reproducibly") {
  Rng rng(44);
  const Cohort cohort = testutil::random_cohort(rng, 103, 2);
  const SplitAssignment split = train_test_split(cohort, 0.75, 99);
  CHECK(split.train_indices.size() == 77);  // round(0.75 * 103)
  CHECK(split.test_indices.size() == 26);
  std::vector<bool> seen(103, false);
  for (auto i : split.train_indices) seen[i] = true;
  for (auto i : split.test_indices) {
    REQUIRE(!seen[i]);
    seen[i] = true;
  }
  CHECK(std::count(seen.begin(), seen.end(), false) == 0);
  CHECK(std::is_sorted(split.train_indices.begin(),
                       split.train_indices.end()));

  const SplitAssignment again = train_test_split(cohort, 0.75, 99);
  CHECK(again.train_indices == split.train_indices);
  const SplitAssignment other = train_test_split(cohort, 0.75, 100);
  CHECK(other.train_indices != split.train_indices);

  CHECK_THROWS_AS(train_test_split(cohort, 0.0, 1), Error);
  CHECK_THROWS_AS(train_test_split(cohort, 1.0, 1), Error);
}

TEST_CASE("load_csv and write_csv go through the filesystem") {
  Rng rng(55);
  const Cohort cohort = testutil::random_cohort(rng, 25, 1, {3});
  const std::string path =
      (std::filesystem::temp_directory_path() / "stemboost_cohort_test.csv")
          .string();
  write_csv(cohort, path);
  const Cohort back = load_csv(path, cohort.schema());
  CHECK(back.identical_to(cohort));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_csv(path, cohort.schema()), Error);
}
