#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "stemboost/cohort.hpp"
#include "stemboost/common.hpp"
#include "stemboost/marginals.hpp"
#include "stemboost/schema.hpp"

using namespace stemboost;

namespace {

// 8 rows, 4 per gender, chosen so every percentage is a multiple of 25.
Cohort hand_cohort() {
  const std::string csv =
      "gender,hs_macroregion,hs_type,hs_curriculum,hs_ses,math_score,"
      "italian_score,enrolled,stem\n"
      "F,North,Public,Humanistic,1.0,150,150,0,NA\n"
      "F,North,Public,Humanistic,2.0,190,210,1,0\n"
      "F,Center,Private,TradScientific,3.0,230,190,1,1\n"
      "F,SouthIslands,Public,AppliedSciences,4.0,250,250,1,1\n"
      "M,North,Public,Humanistic,1.5,170,160,0,NA\n"
      "M,Center,Public,TradScientific,2.5,220,230,1,1\n"
      "M,SouthIslands,Private,AppliedSciences,3.5,185,210,1,0\n"
      "M,North,Public,Humanistic,0.5,180,140,0,NA\n";
  return parse_csv(csv, study_schema(), "test");
}

const std::vector<double> kCuts{180.0, 220.0};

}  // namespace

TEST_CASE("marginals: per-gender totals and outcome mix") {
  const auto table = summarize_marginals(hand_cohort(), true, kCuts);

  const auto* f = table.find("Total", "", "F");
  REQUIRE(f != nullptr);
  CHECK(f->total == 4);
  CHECK(f->pct_not_enrolled == doctest::Approx(25.0));
  CHECK(f->pct_non_stem == doctest::Approx(25.0));
  CHECK(f->pct_stem == doctest::Approx(50.0));

  const auto* m = table.find("Total", "", "M");
  REQUIRE(m != nullptr);
  CHECK(m->total == 4);
  CHECK(m->pct_not_enrolled == doctest::Approx(50.0));
  CHECK(m->pct_non_stem == doctest::Approx(25.0));
  CHECK(m->pct_stem == doctest::Approx(25.0));

  CHECK(table.find("Total", "", "X") == nullptr);
}

TEST_CASE("marginals: categorical cells") {
  const auto table = summarize_marginals(hand_cohort(), true, kCuts);

  const auto* nf = table.find("hs_macroregion", "North", "F");
  REQUIRE(nf != nullptr);
  CHECK(nf->total == 2);
  CHECK(nf->pct_not_enrolled == doctest::Approx(50.0));
  CHECK(nf->pct_non_stem == doctest::Approx(50.0));
  CHECK(nf->pct_stem == doctest::Approx(0.0));

  const auto* nm = table.find("hs_macroregion", "North", "M");
  REQUIRE(nm != nullptr);
  CHECK(nm->total == 2);
  CHECK(nm->pct_not_enrolled == doctest::Approx(100.0));

  const auto* pf = table.find("hs_type", "Private", "F");
  REQUIRE(pf != nullptr);
  CHECK(pf->total == 1);
  CHECK(pf->pct_stem == doctest::Approx(100.0));
}

TEST_CASE("marginals: score bands include the cutpoint on the left") {
  const auto table = summarize_marginals(hand_cohort(), true, kCuts);

  // M math scores 170, 220, 185, 180: exactly-180 lands in Low, 220 in Medium
  const auto* low = table.find("math_score", "Low", "M");
  REQUIRE(low != nullptr);
  CHECK(low->total == 2);
  const auto* med = table.find("math_score", "Medium", "M");
  REQUIRE(med != nullptr);
  CHECK(med->total == 2);
  CHECK(med->pct_non_stem == doctest::Approx(50.0));
  CHECK(med->pct_stem == doctest::Approx(50.0));

  // no M math score above 220: empty cell keeps zero percentages
  const auto* high = table.find("math_score", "High", "M");
  REQUIRE(high != nullptr);
  CHECK(high->total == 0);
  CHECK(high->pct_not_enrolled == 0.0);
  CHECK(high->pct_non_stem == 0.0);
  CHECK(high->pct_stem == 0.0);

  const auto* fh = table.find("math_score", "High", "F");
  REQUIRE(fh != nullptr);
  CHECK(fh->total == 2);
  CHECK(fh->pct_stem == doctest::Approx(100.0));
}

TEST_CASE("marginals: ses quartile bands") {
  const auto table = summarize_marginals(hand_cohort(), true, kCuts);

  // ses sorted: .5 1 1.5 2 2.5 3 3.5 4; q25 = 1.375, q75 = 3.125
  const auto* lf = table.find("hs_ses", "Low", "F");
  REQUIRE(lf != nullptr);
  CHECK(lf->total == 1);
  CHECK(lf->pct_not_enrolled == doctest::Approx(100.0));

  const auto* mm = table.find("hs_ses", "Medium", "M");
  REQUIRE(mm != nullptr);
  CHECK(mm->total == 2);
  CHECK(mm->pct_not_enrolled == doctest::Approx(50.0));
  CHECK(mm->pct_stem == doctest::Approx(50.0));

  const auto* hm = table.find("hs_ses", "High", "M");
  REQUIRE(hm != nullptr);
  CHECK(hm->total == 1);
  CHECK(hm->pct_non_stem == doctest::Approx(100.0));

  // without quartiles the variable is absent entirely
  const auto no_ses = summarize_marginals(hand_cohort(), false, kCuts);
  CHECK(no_ses.find("hs_ses", "Low", "F") == nullptr);
}

TEST_CASE("marginals: structure and consistency") {
  const auto table = summarize_marginals(hand_cohort(), true, kCuts);

  // 3 regions, 2 types, 3 curricula, 3 ses bands, 3+3 score bands, 1 total,
  // each crossed with 2 genders
  CHECK(table.rows.size() == 36);

  std::map<std::string, std::int64_t> totals;
  for (const auto& row : table.rows) {
    totals[row.variable] += row.total;
    if (row.total > 0) {
      CHECK(row.pct_not_enrolled + row.pct_non_stem + row.pct_stem ==
            doctest::Approx(100.0));
    }
  }
  for (const auto& [variable, total] : totals) CHECK(total == 8);

  const auto csv = marginals_to_csv(table);
  CHECK(csv.rfind("variable,category,gender,pct_not_enrolled,pct_non_stem,"
                  "pct_stem,total\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 37);
}

TEST_CASE("marginals: cutpoint validation") {
  CHECK_THROWS_AS(summarize_marginals(hand_cohort(), true, {}), Error);
  CHECK_THROWS_AS(summarize_marginals(hand_cohort(), true, {220.0, 180.0}),
                  Error);
  CHECK_THROWS_AS(summarize_marginals(hand_cohort(), true, {180.0, 180.0}),
                  Error);
}

TEST_CASE("score correlation: global and by gender") {
  const auto cohort = hand_cohort();
  const int mi = study_schema().feature_index("math_score");
  const int ii = study_schema().feature_index("italian_score");
  const auto& math = cohort.numeric(mi);
  const auto& italian = cohort.numeric(ii);

  const auto global = score_correlation(cohort, {});
  REQUIRE(global.size() == 1);
  CHECK(global[0].facet_levels.empty());
  CHECK(global[0].rows == 8);
  CHECK(global[0].correlation == doctest::Approx(pearson_correlation(math, italian)));

  const auto by_gender = score_correlation(cohort, {"gender"});
  REQUIRE(by_gender.size() == 2);
  CHECK(by_gender[0].facet_levels == std::vector<std::string>{"F"});
  CHECK(by_gender[1].facet_levels == std::vector<std::string>{"M"});
  for (std::size_t g = 0; g < 2; ++g) {
    std::vector<double> xs, ys;
    const auto& col = cohort.categorical(study_schema().feature_index("gender"));
    for (std::size_t i = 0; i < 8; ++i) {
      if (static_cast<std::size_t>(col[i]) == g) {
        xs.push_back(math[i]);
        ys.push_back(italian[i]);
      }
    }
    CHECK(by_gender[g].rows == 4);
    CHECK(by_gender[g].correlation == doctest::Approx(pearson_correlation(xs, ys)));
  }

  CHECK_THROWS_AS(score_correlation(cohort, {"math_score"}), Error);
  CHECK_THROWS_AS(score_correlation(cohort, {"nope"}), Error);
}
