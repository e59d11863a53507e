#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stemboost/boosting.hpp"
#include "stemboost/cohort.hpp"
#include "stemboost/evaluation.hpp"
#include "stemboost/interpret.hpp"
#include "stemboost/marginals.hpp"
#include "stemboost/synth.hpp"
#include "stemboost/tuning.hpp"

namespace stemboost {

// Trimmed search grid for the end-to-end pipeline. The tuning module's
// default is a wide exhaustive sweep; running it twice per study takes hours
// on a small machine, and on the synthetic cohorts this subset selects an
// equivalent model.
HyperGrid study_default_grid();

struct StudyConfig {
  std::string input_csv;  // empty: generate from `synth`
  SynthConfig synth;
  std::uint64_t seed = 1;  // drives generation, splits, folds, and bagging
  double split_fraction = 0.75;
  int cv_k = 10;
  HyperGrid grid = study_default_grid();
  std::vector<std::string> ale_features = {"hs_ses", "italian_score",
                                           "math_score"};
  int ale_intervals = 40;
  std::vector<std::string> pdp_facets = {"gender", "hs_curriculum"};
  std::pair<std::string, std::string> pdp_pair = {"italian_score",
                                                  "math_score"};
  std::pair<int, int> pdp_grid = {20, 20};
  std::string out_dir = "study-out";

  void validate() const;
};

StudyConfig study_config_from_json(const std::string& text);
std::string study_config_to_json(const StudyConfig& config);

// Everything produced for one outcome model. Interpretability runs on the
// training split, evaluation on the held-out quarter.
struct ModelReport {
  std::string name;    // "enrollment" or "stem"
  std::string target;  // target column the model predicts
  std::vector<std::uint32_t> population;  // analysis-row indices modeled
  SplitAssignment split;                  // indices into `population`
  CvResult cv;
  HyperParams chosen;  // best CV config cut at the best iteration
  GbmModel model;      // refit of `chosen` on the full training split
  RocCurve roc;        // held-out test rows
  InfluenceTable influence;
  std::vector<AleCurve> ale;  // config.ale_features order
  std::vector<PdpSurface> pdp;
};

struct StudyReport {
  StudyConfig config;
  std::string config_hash;          // hex hash of the canonical config JSON
  std::vector<std::string> stages;  // completed pipeline stages, in order
  std::int64_t n_input = 0;
  std::int64_t n_excluded = 0;  // rows dropped for a zero score
  std::int64_t n_analysis = 0;
  std::int64_t n_enrolled = 0;
  Cohort analysis;  // filtered rows both models draw from
  MarginalsTable marginals;
  double math_mean = 0.0, math_sd = 0.0;
  double italian_mean = 0.0, italian_sd = 0.0;
  double score_correlation_all = 0.0;
  std::vector<FacetCorrelation> score_by_gender;
  std::vector<ModelReport> models;  // [0] enrollment, [1] stem on enrolled
};

// Full pipeline: load or generate, drop zero-score rows, describe, then per
// model split / cross-validate / refit / ROC / influence / ALE / PDP. A
// failing stage rethrows with the stage name after writing the provenance
// collected so far into config.out_dir.
StudyReport run_study(const StudyConfig& config);

struct ManifestEntry {
  std::string file;
  std::string hash;        // content hash (FNV-1a 64, hex)
  bool rewritten = false;  // absent or stale on disk, so written this pass
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

// Writes every report artifact into dir (created if needed) followed by
// manifest.json. A file already on disk with identical bytes is left alone
// and flagged rewritten = false.
Manifest emit_outputs(const StudyReport& report, const std::string& dir);

std::string manifest_to_json(const Manifest& manifest);
std::string summary_to_json(const StudyReport& report);
std::string provenance_to_json(const StudyReport& report);

}  // namespace stemboost
