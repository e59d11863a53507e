#include "stemboost/synth.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "stemboost/schema.hpp"

namespace stemboost {

namespace {

using nlohmann::json;

constexpr double kScoreCenter = 200.0;
constexpr double kScoreScale = 40.0;
constexpr std::size_t kDesignSize = 10;

void check_marginal(const char* name, const std::vector<double>& p,
                    std::size_t levels) {
  if (p.size() != levels)
    fail(Errc::invalid_config, std::string("synth: ") + name + " needs " +
                                   std::to_string(levels) + " proportions");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0))
      fail(Errc::invalid_config,
           std::string("synth: negative proportion in ") + name);
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    fail(Errc::invalid_config,
         std::string("synth: proportions of ") + name + " sum to " +
             format_double(sum) + ", expected 1");
}

int draw_level(Rng& rng, const std::vector<double>& p) {
  const double u = rng.uniform01();
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    cum += p[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

double design_dot(const std::vector<double>& beta, int gender, int region,
                  int type, int cur, double ses, double math, double italian) {
  double x = beta[0];
  if (gender == 1) x += beta[1];
  if (region == 1) x += beta[2];
  if (region == 2) x += beta[3];
  if (type == 1) x += beta[4];
  if (cur == 1) x += beta[5];
  if (cur == 2) x += beta[6];
  x += beta[7] * ses;
  x += beta[8] * (math - kScoreCenter) / kScoreScale;
  x += beta[9] * (italian - kScoreCenter) / kScoreScale;
  return x;
}

std::vector<double> map_to_vector(const json& obj, const char* name,
                                  const std::vector<std::string>& keys,
                                  std::vector<double> defaults) {
  if (!obj.is_object())
    fail(Errc::invalid_config,
         std::string("synth config: ") + name + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    const auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end())
      fail(Errc::invalid_config, std::string("synth config: unknown key '") +
                                     key + "' in " + name);
    if (!value.is_number())
      fail(Errc::invalid_config, std::string("synth config: ") + name + "." +
                                     key + " must be a number");
    defaults[static_cast<std::size_t>(it - keys.begin())] =
        value.get<double>();
  }
  return defaults;
}

json vector_to_map(const std::vector<std::string>& keys,
                   const std::vector<double>& values) {
  json obj = json::object();
  for (std::size_t i = 0; i < keys.size(); ++i) obj[keys[i]] = values[i];
  return obj;
}

std::vector<std::string> level_names(int feature) {
  return study_schema().features()[static_cast<std::size_t>(feature)].levels;
}

}  // namespace

void SynthConfig::validate() const {
  if (n < 1) fail(Errc::invalid_config, "synth: n must be >= 1");
  check_marginal("gender", gender, 2);
  check_marginal("macroregion", macroregion, 3);
  check_marginal("hs_type", hs_type, 2);
  check_marginal("curriculum", curriculum, 3);
  if (!(score_sd > 0.0)) fail(Errc::invalid_config, "synth: sd must be > 0");
  if (!(std::abs(score_rho) < 1.0))
    fail(Errc::invalid_config, "synth: |rho| must be < 1");
  if (math_shift.size() != 3 || italian_shift.size() != 3)
    fail(Errc::invalid_config, "synth: score shifts need 3 values");
  if (ses_shift.size() != 3)
    fail(Errc::invalid_config, "synth: ses shifts need 3 values");
  if (beta_enroll.size() != kDesignSize || beta_stem.size() != kDesignSize)
    fail(Errc::invalid_config, "synth: coefficient vectors need " +
                                   std::to_string(kDesignSize) + " entries");
  if (!(zero_score_fraction >= 0.0 && zero_score_fraction <= 0.05))
    fail(Errc::invalid_config,
         "synth: zero_score_fraction must be in [0, 0.05]");
}

const std::vector<std::string>& design_encoding() {
  static const std::vector<std::string> keys = {
      "intercept",     "gender_M",
      "region_Center", "region_SouthIslands",
      "type_Private",  "curriculum_TradScientific",
      "curriculum_AppliedSciences", "ses",
      "math_std",      "italian_std"};
  return keys;
}

SynthConfig synth_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::invalid_config, std::string("synth config: ") + e.what());
  }
  if (!doc.is_object())
    fail(Errc::invalid_config, "synth config: document must be an object");

  SynthConfig config;
  static const std::vector<std::string> known = {
      "n",         "seed",      "marginals",           "scores",
      "ses_shift", "beta_enroll", "beta_stem", "zero_score_fraction"};
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      fail(Errc::invalid_config,
           "synth config: unknown key '" + key + "'");
  }

  config.n = doc.value("n", config.n);
  config.seed = doc.value("seed", config.seed);
  config.zero_score_fraction =
      doc.value("zero_score_fraction", config.zero_score_fraction);

  if (doc.contains("marginals")) {
    const json& m = doc["marginals"];
    if (!m.is_object())
      fail(Errc::invalid_config, "synth config: marginals must be an object");
    for (const auto& [key, value] : m.items()) {
      if (key == "gender")
        config.gender = map_to_vector(value, "marginals.gender",
                                      level_names(0), config.gender);
      else if (key == "hs_macroregion")
        config.macroregion = map_to_vector(value, "marginals.hs_macroregion",
                                           level_names(1), config.macroregion);
      else if (key == "hs_type")
        config.hs_type = map_to_vector(value, "marginals.hs_type",
                                       level_names(2), config.hs_type);
      else if (key == "hs_curriculum")
        config.curriculum = map_to_vector(value, "marginals.hs_curriculum",
                                          level_names(3), config.curriculum);
      else
        fail(Errc::invalid_config,
             "synth config: unknown marginal '" + key + "'");
    }
  }

  if (doc.contains("scores")) {
    const json& s = doc["scores"];
    if (!s.is_object())
      fail(Errc::invalid_config, "synth config: scores must be an object");
    for (const auto& [key, value] : s.items()) {
      if (key == "sd")
        config.score_sd = value.get<double>();
      else if (key == "rho")
        config.score_rho = value.get<double>();
      else if (key == "math_shift")
        config.math_shift = map_to_vector(value, "scores.math_shift",
                                          level_names(3), config.math_shift);
      else if (key == "italian_shift")
        config.italian_shift =
            map_to_vector(value, "scores.italian_shift", level_names(3),
                          config.italian_shift);
      else
        fail(Errc::invalid_config,
             "synth config: unknown scores key '" + key + "'");
    }
  }

  if (doc.contains("ses_shift"))
    config.ses_shift = map_to_vector(doc["ses_shift"], "ses_shift",
                                     level_names(1), config.ses_shift);
  if (doc.contains("beta_enroll"))
    config.beta_enroll = map_to_vector(doc["beta_enroll"], "beta_enroll",
                                       design_encoding(), config.beta_enroll);
  if (doc.contains("beta_stem"))
    config.beta_stem = map_to_vector(doc["beta_stem"], "beta_stem",
                                     design_encoding(), config.beta_stem);

  config.validate();
  return config;
}

std::string synth_config_to_json(const SynthConfig& config) {
  json doc;
  doc["n"] = config.n;
  doc["seed"] = config.seed;
  doc["marginals"]["gender"] = vector_to_map(level_names(0), config.gender);
  doc["marginals"]["hs_macroregion"] =
      vector_to_map(level_names(1), config.macroregion);
  doc["marginals"]["hs_type"] = vector_to_map(level_names(2), config.hs_type);
  doc["marginals"]["hs_curriculum"] =
      vector_to_map(level_names(3), config.curriculum);
  doc["scores"]["sd"] = config.score_sd;
  doc["scores"]["rho"] = config.score_rho;
  doc["scores"]["math_shift"] =
      vector_to_map(level_names(3), config.math_shift);
  doc["scores"]["italian_shift"] =
      vector_to_map(level_names(3), config.italian_shift);
  doc["ses_shift"] = vector_to_map(level_names(1), config.ses_shift);
  doc["beta_enroll"] = vector_to_map(design_encoding(), config.beta_enroll);
  doc["beta_stem"] = vector_to_map(design_encoding(), config.beta_stem);
  doc["zero_score_fraction"] = config.zero_score_fraction;
  return doc.dump(2) + "\n";
}

SynthCohort generate_cohort(const SynthConfig& config) {
  config.validate();
  const FeatureSchema& schema = study_schema();
  const auto n = static_cast<std::size_t>(config.n);

  std::vector<std::vector<double>> nums(schema.n_features());
  std::vector<std::vector<std::int32_t>> cats(schema.n_features());
  for (int f : {0, 1, 2, 3}) cats[static_cast<std::size_t>(f)].resize(n);
  for (int f : {4, 5, 6}) nums[static_cast<std::size_t>(f)].resize(n);
  std::vector<std::vector<std::int8_t>> tgs(2);
  tgs[0].resize(n);
  tgs[1].resize(n);

  SynthCohort out;
  out.p_enroll.resize(n);
  out.p_stem.resize(n);

  Rng rng(derive_seed(config.seed, SeedStream::synth));
  const double rho = config.score_rho;
  const double rho_rest = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 0; i < n; ++i) {
    const int gender = draw_level(rng, config.gender);
    const int region = draw_level(rng, config.macroregion);
    const int type = draw_level(rng, config.hs_type);
    const int cur = draw_level(rng, config.curriculum);
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double math = kScoreCenter +
                        config.math_shift[static_cast<std::size_t>(cur)] +
                        config.score_sd * z1;
    const double italian =
        kScoreCenter + config.italian_shift[static_cast<std::size_t>(cur)] +
        config.score_sd * (rho * z1 + rho_rest * z2);
    const double ses =
        config.ses_shift[static_cast<std::size_t>(region)] + rng.normal();

    const double p_enroll = sigmoid(design_dot(config.beta_enroll, gender,
                                               region, type, cur, ses, math,
                                               italian));
    const double p_stem = sigmoid(design_dot(config.beta_stem, gender, region,
                                             type, cur, ses, math, italian));
    const bool enrolled = rng.uniform01() < p_enroll;
    const bool stem = rng.uniform01() < p_stem;  // drawn unconditionally

    cats[0][i] = gender;
    cats[1][i] = region;
    cats[2][i] = type;
    cats[3][i] = cur;
    nums[4][i] = ses;
    nums[5][i] = math;
    nums[6][i] = italian;
    tgs[0][i] = enrolled ? 1 : 0;
    tgs[1][i] = enrolled ? (stem ? 1 : 0) : kTargetNA;
    out.p_enroll[i] = p_enroll;
    out.p_stem[i] = p_stem;
  }

  const auto n_zero = static_cast<std::uint32_t>(
      std::llround(config.zero_score_fraction * static_cast<double>(n)));
  if (n_zero > 0) {
    const auto chosen =
        rng.sample_without_replacement(static_cast<std::uint32_t>(n), n_zero);
    for (std::uint32_t row : chosen) {
      const int score = rng.uniform01() < 0.5 ? 5 : 6;
      nums[static_cast<std::size_t>(score)][row] = 0.0;
    }
  }

  out.rows = Cohort(schema, std::move(nums), std::move(cats), std::move(tgs));
  return out;
}

std::vector<double> ground_truth_proba(const SynthConfig& config,
                                       const Cohort& rows,
                                       TruthOutcome outcome) {
  config.validate();
  if (!(rows.schema() == study_schema()))
    fail(Errc::schema_mismatch,
         "ground_truth_proba: rows do not use the study schema");
  const std::vector<double>& beta =
      outcome == TruthOutcome::enroll ? config.beta_enroll : config.beta_stem;
  const std::vector<std::int32_t>& gender = rows.categorical(0);
  const std::vector<std::int32_t>& region = rows.categorical(1);
  const std::vector<std::int32_t>& type = rows.categorical(2);
  const std::vector<std::int32_t>& cur = rows.categorical(3);
  const std::vector<double>& ses = rows.numeric(4);
  const std::vector<double>& math = rows.numeric(5);
  const std::vector<double>& italian = rows.numeric(6);
  std::vector<double> proba(static_cast<std::size_t>(rows.n_rows()));
  for (std::size_t i = 0; i < proba.size(); ++i)
    proba[i] = sigmoid(design_dot(beta, gender[i], region[i], type[i], cur[i],
                                  ses[i], math[i], italian[i]));
  return proba;
}

std::string truth_to_csv(const SynthCohort& cohort) {
  std::string out = "row_id,p_enroll,p_stem\n";
  for (std::size_t i = 0; i < cohort.p_enroll.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(cohort.p_enroll[i]);
    out += ',';
    out += format_double(cohort.p_stem[i]);
    out += '\n';
  }
  return out;
}

}  // namespace stemboost
