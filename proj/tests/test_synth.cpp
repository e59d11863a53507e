#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "stemboost/common.hpp"
#include "stemboost/schema.hpp"
#include "stemboost/synth.hpp"

using namespace stemboost;

namespace {

// binomial three-sigma window around an expected proportion
void check_share(std::int64_t hits, std::int64_t n, double p,
                 const char* what) {
  const double mean = p * static_cast<double>(n);
  const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  INFO(what, ": ", hits, " of ", n, " expected ", mean, " +- ", 3.0 * sd);
  CHECK(std::abs(static_cast<double>(hits) - mean) <= 3.0 * sd + 1.0);
}

}  // namespace

TEST_CASE("synth: generation is deterministic per seed") {
  SynthConfig config;
  config.n = 500;
  config.seed = 10;
  const auto a = generate_cohort(config);
  const auto b = generate_cohort(config);
  CHECK(to_csv(a.rows) == to_csv(b.rows));
  CHECK(a.p_enroll == b.p_enroll);
  CHECK(a.p_stem == b.p_stem);

  config.seed = 11;
  const auto c = generate_cohort(config);
  CHECK(to_csv(a.rows) != to_csv(c.rows));
}

TEST_CASE("synth: marginals converge at scale") {
  SynthConfig config;
  config.n = 20000;
  config.seed = 3;
  const auto cohort = generate_cohort(config);
  const auto& schema = cohort.rows.schema();
  const std::int64_t n = cohort.rows.n_rows();
  REQUIRE(n == 20000);

  const auto count_level = [&](const char* feature, std::int32_t level) {
    const auto& col = cohort.rows.categorical(schema.feature_index(feature));
    std::int64_t hits = 0;
    for (auto v : col) hits += v == level;
    return hits;
  };

  check_share(count_level("gender", 0), n, config.gender[0], "gender F");
  check_share(count_level("hs_macroregion", 2), n, config.macroregion[2],
              "south");
  check_share(count_level("hs_type", 1), n, config.hs_type[1], "private");
  for (std::int32_t c = 0; c < 3; ++c)
    check_share(count_level("hs_curriculum", c), n,
                config.curriculum[static_cast<std::size_t>(c)], "curriculum");
}

TEST_CASE("synth: score moments and correlation") {
  SynthConfig config;
  config.n = 20000;
  config.seed = 8;
  const auto cohort = generate_cohort(config);
  const auto& schema = cohort.rows.schema();
  const auto& math = cohort.rows.numeric(schema.feature_index("math_score"));
  const auto& italian =
      cohort.rows.numeric(schema.feature_index("italian_score"));
  const auto& cur =
      cohort.rows.categorical(schema.feature_index("hs_curriculum"));

  // per-curriculum math mean: 200 + shift, sd 40 / sqrt(n_c)
  for (std::int32_t c = 0; c < 3; ++c) {
    double sum = 0.0;
    std::int64_t cnt = 0;
    for (std::size_t i = 0; i < math.size(); ++i)
      if (cur[i] == c) {
        sum += math[i];
        ++cnt;
      }
    const double mean = sum / static_cast<double>(cnt);
    const double expected =
        200.0 + config.math_shift[static_cast<std::size_t>(c)];
    CHECK(std::abs(mean - expected) <=
          3.0 * config.score_sd / std::sqrt(static_cast<double>(cnt)));
  }

  const double rho = pearson_correlation(math, italian);
  CHECK(std::abs(rho - config.score_rho) < 0.03);

  double sum = 0.0, sum2 = 0.0;
  for (double v : math) {
    sum += v;
    sum2 += v * v;
  }
  const double var = sum2 / 20000.0 - (sum / 20000.0) * (sum / 20000.0);
  // mixture variance: within 40^2 plus a small between-curriculum spread
  CHECK(std::sqrt(var) == doctest::Approx(config.score_sd).epsilon(0.05));
}

TEST_CASE("synth: outcomes follow the logistic truth") {
  SynthConfig config;
  config.n = 50000;
  config.seed = 5;
  config.beta_enroll.assign(10, 0.0);  // coin-flip enrollment
  const auto cohort = generate_cohort(config);

  for (double p : cohort.p_enroll) CHECK(p == doctest::Approx(0.5));
  const auto& enrolled = cohort.rows.target("enrolled");
  std::int64_t hits = 0;
  for (auto v : enrolled) hits += v == 1;
  check_share(hits, 50000, 0.5, "coin-flip enrollment");

  // stem is NA exactly on the non-enrolled rows
  const auto& stem = cohort.rows.target("stem");
  for (std::size_t i = 0; i < stem.size(); ++i) {
    if (enrolled[i] == 0) CHECK(stem[i] == kTargetNA);
    else CHECK((stem[i] == 0 || stem[i] == 1));
  }

  // observed outcome rate tracks the mean drawn probability
  SynthConfig informative;
  informative.n = 50000;
  informative.seed = 6;
  const auto real = generate_cohort(informative);
  double p_mean = 0.0;
  std::int64_t enrolled_n = 0;
  const auto& e2 = real.rows.target("enrolled");
  for (std::size_t i = 0; i < e2.size(); ++i) {
    p_mean += real.p_enroll[i];
    enrolled_n += e2[i] == 1;
  }
  p_mean /= 50000.0;
  check_share(enrolled_n, 50000, p_mean, "enrollment rate");
}

TEST_CASE("synth: single row dot product by hand") {
  SynthConfig config;
  // M, Center, Private, AppliedSciences, ses 0.4, math 240, italian 180:
  // design = [1, 1, 1, 0, 1, 0, 1, 0.4, 1.0, -0.5]
  const std::vector<double> design{1, 1, 1, 0, 1, 0, 1, 0.4, 1.0, -0.5};
  double dot_e = 0.0, dot_s = 0.0;
  for (std::size_t j = 0; j < 10; ++j) {
    dot_e += config.beta_enroll[j] * design[j];
    dot_s += config.beta_stem[j] * design[j];
  }

  const std::string csv =
      "gender,hs_macroregion,hs_type,hs_curriculum,hs_ses,math_score,"
      "italian_score,enrolled,stem\n"
      "M,Center,Private,AppliedSciences,0.4,240,180,1,1\n";
  const Cohort row = parse_csv(csv, study_schema(), "test");

  const auto pe = ground_truth_proba(config, row, TruthOutcome::enroll);
  const auto ps = ground_truth_proba(config, row, TruthOutcome::stem);
  REQUIRE(pe.size() == 1);
  CHECK(pe[0] == doctest::Approx(sigmoid(dot_e)).epsilon(1e-12));
  CHECK(ps[0] == doctest::Approx(sigmoid(dot_s)).epsilon(1e-12));
  CHECK(pe[0] > 0.0);
  CHECK(pe[0] < 1.0);

  config.beta_enroll.assign(10, 0.0);
  CHECK(ground_truth_proba(config, row, TruthOutcome::enroll)[0] ==
        doctest::Approx(0.5));
}

TEST_CASE("synth: generated probabilities match ground_truth_proba") {
  SynthConfig config;
  config.n = 300;
  config.seed = 21;
  const auto cohort = generate_cohort(config);
  const auto pe =
      ground_truth_proba(config, cohort.rows, TruthOutcome::enroll);
  const auto ps = ground_truth_proba(config, cohort.rows, TruthOutcome::stem);
  for (std::size_t i = 0; i < 300; ++i) {
    CHECK(pe[i] == cohort.p_enroll[i]);
    CHECK(ps[i] == cohort.p_stem[i]);
  }
}

TEST_CASE("synth: zero-score injection") {
  SynthConfig config;
  config.n = 4000;
  config.seed = 13;
  config.zero_score_fraction = 0.01;
  const auto cohort = generate_cohort(config);
  const auto& schema = cohort.rows.schema();
  const auto& math = cohort.rows.numeric(schema.feature_index("math_score"));
  const auto& italian =
      cohort.rows.numeric(schema.feature_index("italian_score"));

  std::int64_t zero_rows = 0;
  for (std::size_t i = 0; i < math.size(); ++i) {
    const bool zm = math[i] == 0.0;
    const bool zi = italian[i] == 0.0;
    if (zm || zi) {
      ++zero_rows;
      CHECK_FALSE((zm && zi));  // exactly one score is wiped per chosen row
    }
  }
  CHECK(zero_rows == 40);  // llround(0.01 * 4000)

  // injection leaves the stored truth probabilities at their pre-wipe values
  const auto untouched = ground_truth_proba(config, cohort.rows,
                                            TruthOutcome::enroll);
  bool any_diff = false;
  for (std::size_t i = 0; i < untouched.size(); ++i)
    any_diff |= untouched[i] != cohort.p_enroll[i];
  CHECK(any_diff);
}

TEST_CASE("synth: config json round trip and validation") {
  SynthConfig config;
  config.n = 123;
  config.seed = 77;
  config.score_rho = 0.4;
  config.zero_score_fraction = 0.002;
  config.beta_stem[3] = -0.42;

  const auto back = synth_config_from_json(synth_config_to_json(config));
  CHECK(back.n == 123);
  CHECK(back.seed == 77);
  CHECK(back.score_rho == doctest::Approx(0.4));
  CHECK(back.zero_score_fraction == doctest::Approx(0.002));
  CHECK(back.beta_stem[3] == doctest::Approx(-0.42));
  CHECK(back.gender[0] == doctest::Approx(config.gender[0]));

  CHECK_THROWS_AS(synth_config_from_json("{ nope"), Error);
  CHECK_THROWS_AS(synth_config_from_json("{\"unknown_key\": 1}"), Error);

  SynthConfig bad;
  bad.n = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SynthConfig{};
  bad.gender = {0.6, 0.5};  // does not sum to 1
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SynthConfig{};
  bad.score_rho = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SynthConfig{};
  bad.score_sd = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SynthConfig{};
  bad.beta_enroll.pop_back();
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SynthConfig{};
  bad.zero_score_fraction = 0.2;  // far beyond the supported blip
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SynthConfig{};
  bad.math_shift = {0.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("synth: truth csv shape") {
  SynthConfig config;
  config.n = 5;
  const auto cohort = generate_cohort(config);
  const auto csv = truth_to_csv(cohort);
  CHECK(csv.rfind("row_id,p_enroll,p_stem\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("synth: design encoding names") {
  const auto& names = design_encoding();
  REQUIRE(names.size() == 10);
  CHECK(names[0] == "intercept");
  CHECK(names[7] == "ses");
  CHECK(names[8] == "math_std");
  CHECK(names[9] == "italian_std");
}
