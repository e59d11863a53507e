#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "stemboost/common.hpp"

namespace stemboost {

enum class FeatureKind { numeric, categorical };

struct FeatureDef {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  std::vector<std::string> levels;  // categorical only
};

// Column layout of a cohort: ordered covariates plus named binary targets.
// Target cells are {0, 1} with NA allowed only where a rule permits it
// (stem is defined only on enrolled rows).
class FeatureSchema {
 public:
  FeatureSchema() = default;
  FeatureSchema(std::vector<FeatureDef> features,
                std::vector<std::string> target_names);

  const std::vector<FeatureDef>& features() const { return features_; }
  const std::vector<std::string>& target_names() const { return target_names_; }

  int feature_index(const std::string& name) const;  // -1 when absent
  int target_index(const std::string& name) const;
  int level_index(int feature, const std::string& level) const;  // -1 absent

  std::size_t n_features() const { return features_.size(); }
  std::size_t n_targets() const { return target_names_.size(); }

  // Canonical textual form; basis of the fingerprint and artifact embedding.
  std::string canonical_string() const;
  std::uint64_t fingerprint() const;

  bool operator==(const FeatureSchema& other) const {
    return canonical_string() == other.canonical_string();
  }

 private:
  std::vector<FeatureDef> features_;
  std::vector<std::string> target_names_;
  std::unordered_map<std::string, int> feature_lookup_;
  std::unordered_map<std::string, int> target_lookup_;
};

// The fixed cohort layout of the enrollment study.
const FeatureSchema& study_schema();

}  // namespace stemboost
