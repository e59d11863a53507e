#include "stemboost/schema.hpp"

#include <unordered_set>

namespace stemboost {

FeatureSchema::FeatureSchema(std::vector<FeatureDef> features,
                             std::vector<std::string> target_names)
    : features_(std::move(features)), target_names_(std::move(target_names)) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const auto& f = features_[i];
    if (f.name.empty() || !seen.insert(f.name).second)
      fail(Errc::invalid_config, "schema: duplicate or empty feature name '" +
                                     f.name + "'");
    if (f.kind == FeatureKind::categorical) {
      if (f.levels.empty())
        fail(Errc::invalid_config,
             "schema: categorical feature '" + f.name + "' has no levels");
      if (f.levels.size() > 64)
        fail(Errc::invalid_config,
             "schema: feature '" + f.name + "' exceeds 64 levels");
      std::unordered_set<std::string> lv;
      for (const auto& l : f.levels) {
        if (l.empty() || !lv.insert(l).second)
          fail(Errc::invalid_config, "schema: duplicate or empty level in '" +
                                         f.name + "'");
      }
    } else if (!f.levels.empty()) {
      fail(Errc::invalid_config,
           "schema: numeric feature '" + f.name + "' must not list levels");
    }
    feature_lookup_[f.name] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < target_names_.size(); ++i) {
    const auto& t = target_names_[i];
    if (t.empty() || feature_lookup_.count(t) || !seen.insert(t).second)
      fail(Errc::invalid_config,
           "schema: duplicate or empty target name '" + t + "'");
    target_lookup_[t] = static_cast<int>(i);
  }
}

int FeatureSchema::feature_index(const std::string& name) const {
  auto it = feature_lookup_.find(name);
  return it == feature_lookup_.end() ? -1 : it->second;
}

int FeatureSchema::target_index(const std::string& name) const {
  auto it = target_lookup_.find(name);
  return it == target_lookup_.end() ? -1 : it->second;
}

int FeatureSchema::level_index(int feature, const std::string& level) const {
  const auto& levels = features_[static_cast<std::size_t>(feature)].levels;
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] == level) return static_cast<int>(i);
  return -1;
}

std::string FeatureSchema::canonical_string() const {
  std::string s = "schema/v1;";
  for (const auto& f : features_) {
    s += f.name;
    s += (f.kind == FeatureKind::numeric ? ":num" : ":cat{");
    if (f.kind == FeatureKind::categorical) {
      for (std::size_t i = 0; i < f.levels.size(); ++i) {
        if (i) s += '|';
        s += f.levels[i];
      }
      s += '}';
    }
    s += ';';
  }
  s += "targets:";
  for (std::size_t i = 0; i < target_names_.size(); ++i) {
    if (i) s += '|';
    s += target_names_[i];
  }
  return s;
}

std::uint64_t FeatureSchema::fingerprint() const {
  return fnv1a64(canonical_string());
}

const FeatureSchema& study_schema() {
  static const FeatureSchema schema(
      {
          {"gender", FeatureKind::categorical, {"F", "M"}},
          {"hs_macroregion",
           FeatureKind::categorical,
           {"North", "Center", "SouthIslands"}},
          {"hs_type", FeatureKind::categorical, {"Public", "Private"}},
          {"hs_curriculum",
           FeatureKind::categorical,
           {"Humanistic", "TradScientific", "AppliedSciences"}},
          {"hs_ses", FeatureKind::numeric, {}},
          {"math_score", FeatureKind::numeric, {}},
          {"italian_score", FeatureKind::numeric, {}},
      },
      {"enrolled", "stem"});
  return schema;
}

}  // namespace stemboost
