#include "stemboost/cohort.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace stemboost {

Cohort::Cohort(FeatureSchema schema,
               std::vector<std::vector<double>> numeric_cols,
               std::vector<std::vector<std::int32_t>> categorical_cols,
               std::vector<std::vector<std::int8_t>> target_cols)
    : schema_(std::move(schema)),
      numeric_cols_(std::move(numeric_cols)),
      categorical_cols_(std::move(categorical_cols)),
      target_cols_(std::move(target_cols)) {
  validate();
}

void Cohort::validate() {
  const std::size_t nf = schema_.n_features();
  if (numeric_cols_.size() != nf || categorical_cols_.size() != nf)
    fail(Errc::invalid_config, "cohort: column count does not match schema");
  if (target_cols_.size() != schema_.n_targets())
    fail(Errc::invalid_config, "cohort: target count does not match schema");

  std::int64_t n = -1;
  auto check_len = [&n](std::int64_t len, const std::string& name) {
    if (n == -1) n = len;
    if (len != n)
      fail(Errc::ragged_row, "cohort: column '" + name + "' length mismatch");
  };
  for (std::size_t j = 0; j < nf; ++j) {
    const auto& def = schema_.features()[j];
    if (def.kind == FeatureKind::numeric) {
      if (!categorical_cols_[j].empty())
        fail(Errc::invalid_config, "cohort: numeric column stored as levels");
      check_len(static_cast<std::int64_t>(numeric_cols_[j].size()), def.name);
      for (std::size_t i = 0; i < numeric_cols_[j].size(); ++i) {
        if (!std::isfinite(numeric_cols_[j][i]))
          fail(Errc::non_finite_numeric,
               "cohort: non-finite value in '" + def.name + "' at row " +
                   std::to_string(i));
      }
    } else {
      if (!numeric_cols_[j].empty())
        fail(Errc::invalid_config, "cohort: categorical column stored as numeric");
      check_len(static_cast<std::int64_t>(categorical_cols_[j].size()),
                def.name);
      const auto n_levels = static_cast<std::int32_t>(def.levels.size());
      for (std::size_t i = 0; i < categorical_cols_[j].size(); ++i) {
        const auto lev = categorical_cols_[j][i];
        if (lev < 0 || lev >= n_levels)
          fail(Errc::unknown_category_level,
               "cohort: level index out of range in '" + def.name +
                   "' at row " + std::to_string(i));
      }
    }
  }
  for (std::size_t t = 0; t < target_cols_.size(); ++t) {
    check_len(static_cast<std::int64_t>(target_cols_[t].size()),
              schema_.target_names()[t]);
    for (std::size_t i = 0; i < target_cols_[t].size(); ++i) {
      const auto v = target_cols_[t][i];
      if (v != 0 && v != 1 && v != kTargetNA)
        fail(Errc::invalid_target,
             "cohort: target '" + schema_.target_names()[t] +
                 "' has value outside {0,1,NA} at row " + std::to_string(i));
    }
  }
  if (n == -1) n = 0;
  n_ = n;

  // stem is defined exactly on the enrolled rows
  const int ei = schema_.target_index("enrolled");
  const int si = schema_.target_index("stem");
  if (ei >= 0 && si >= 0) {
    const auto& enr = target_cols_[static_cast<std::size_t>(ei)];
    const auto& stem = target_cols_[static_cast<std::size_t>(si)];
    for (std::int64_t i = 0; i < n_; ++i) {
      const auto e = enr[static_cast<std::size_t>(i)];
      const auto s = stem[static_cast<std::size_t>(i)];
      if (e == kTargetNA)
        fail(Errc::invalid_target,
             "cohort: enrolled may not be NA (row " + std::to_string(i) + ")");
      if (e == 1 && s == kTargetNA)
        fail(Errc::invalid_target,
             "cohort: stem missing for enrolled row " + std::to_string(i));
      if (e == 0 && s != kTargetNA)
        fail(Errc::invalid_target,
             "cohort: stem present for non-enrolled row " + std::to_string(i));
    }
  }
}

const std::vector<double>& Cohort::numeric(int feature) const {
  return numeric_cols_[static_cast<std::size_t>(feature)];
}

const std::vector<std::int32_t>& Cohort::categorical(int feature) const {
  return categorical_cols_[static_cast<std::size_t>(feature)];
}

const std::vector<std::int8_t>& Cohort::target(int target_index) const {
  return target_cols_[static_cast<std::size_t>(target_index)];
}

const std::vector<std::int8_t>& Cohort::target(const std::string& name) const {
  const int t = schema_.target_index(name);
  if (t < 0) fail(Errc::missing_column, "cohort: no target named '" + name + "'");
  return target_cols_[static_cast<std::size_t>(t)];
}

Cohort Cohort::select(const std::vector<std::uint32_t>& rows) const {
  const std::size_t nf = schema_.n_features();
  std::vector<std::vector<double>> num(nf);
  std::vector<std::vector<std::int32_t>> cat(nf);
  std::vector<std::vector<std::int8_t>> tg(target_cols_.size());
  for (std::uint32_t r : rows) {
    if (static_cast<std::int64_t>(r) >= n_)
      fail(Errc::invalid_config, "select: row index out of range");
  }
  for (std::size_t j = 0; j < nf; ++j) {
    if (schema_.features()[j].kind == FeatureKind::numeric) {
      num[j].reserve(rows.size());
      for (std::uint32_t r : rows) num[j].push_back(numeric_cols_[j][r]);
    } else {
      cat[j].reserve(rows.size());
      for (std::uint32_t r : rows) cat[j].push_back(categorical_cols_[j][r]);
    }
  }
  for (std::size_t t = 0; t < target_cols_.size(); ++t) {
    tg[t].reserve(rows.size());
    for (std::uint32_t r : rows) tg[t].push_back(target_cols_[t][r]);
  }
  return Cohort(schema_, std::move(num), std::move(cat), std::move(tg));
}

bool Cohort::identical_to(const Cohort& other) const {
  if (!(schema_ == other.schema_) || n_ != other.n_) return false;
  for (std::size_t j = 0; j < numeric_cols_.size(); ++j) {
    const auto& a = numeric_cols_[j];
    const auto& b = other.numeric_cols_[j];
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      // bitwise: distinguishes 0.0 / -0.0, still equates identical NaN bits
      if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
    }
  }
  return categorical_cols_ == other.categorical_cols_ &&
         target_cols_ == other.target_cols_;
}

namespace {

struct ColumnSlot {
  bool is_target = false;
  int index = -1;  // feature or target index
};

}  // namespace

Cohort parse_csv(const std::string& content, const FeatureSchema& schema,
                 const std::string& origin) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line))
    fail(Errc::io_failure, origin + ": empty file");
  const auto header = split_csv_line(line);

  // Header is order-insensitive; every schema column must appear exactly once.
  std::vector<ColumnSlot> slots(header.size());
  std::vector<bool> feature_seen(schema.n_features(), false);
  std::vector<bool> target_seen(schema.n_targets(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const int f = schema.feature_index(header[c]);
    const int t = schema.target_index(header[c]);
    if (f >= 0) {
      if (feature_seen[static_cast<std::size_t>(f)])
        fail(Errc::unknown_column,
             origin + ": duplicate column '" + header[c] + "'");
      feature_seen[static_cast<std::size_t>(f)] = true;
      slots[c] = {false, f};
    } else if (t >= 0) {
      if (target_seen[static_cast<std::size_t>(t)])
        fail(Errc::unknown_column,
             origin + ": duplicate column '" + header[c] + "'");
      target_seen[static_cast<std::size_t>(t)] = true;
      slots[c] = {true, t};
    } else {
      fail(Errc::unknown_column,
           origin + ": column '" + header[c] + "' not in schema");
    }
  }
  for (std::size_t f = 0; f < feature_seen.size(); ++f)
    if (!feature_seen[f])
      fail(Errc::missing_column,
           origin + ": missing column '" + schema.features()[f].name + "'");
  for (std::size_t t = 0; t < target_seen.size(); ++t)
    if (!target_seen[t])
      fail(Errc::missing_column,
           origin + ": missing column '" + schema.target_names()[t] + "'");

  std::vector<std::vector<double>> num(schema.n_features());
  std::vector<std::vector<std::int32_t>> cat(schema.n_features());
  std::vector<std::vector<std::int8_t>> tg(schema.n_targets());

  std::int64_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      fail(Errc::ragged_row, origin + ": row " + std::to_string(row) +
                                 " has " + std::to_string(cells.size()) +
                                 " cells, expected " +
                                 std::to_string(header.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& cell = cells[c];
      const auto slot = slots[c];
      if (slot.is_target) {
        std::int8_t v;
        if (cell == "0") {
          v = 0;
        } else if (cell == "1") {
          v = 1;
        } else if (cell == "NA") {
          v = kTargetNA;
        } else {
          fail(Errc::invalid_target,
               origin + ": row " + std::to_string(row) + ", target '" +
                   header[c] + "': bad value '" + cell + "'");
        }
        tg[static_cast<std::size_t>(slot.index)].push_back(v);
      } else {
        const auto& def = schema.features()[static_cast<std::size_t>(slot.index)];
        if (def.kind == FeatureKind::numeric) {
          bool ok = false;
          const double v = parse_double(cell, ok);
          if (!ok || !std::isfinite(v))
            fail(Errc::non_finite_numeric,
                 origin + ": row " + std::to_string(row) + ", column '" +
                     header[c] + "': bad numeric '" + cell + "'");
          num[static_cast<std::size_t>(slot.index)].push_back(v);
        } else {
          const int lev = schema.level_index(slot.index, cell);
          if (lev < 0)
            fail(Errc::unknown_category_level,
                 origin + ": row " + std::to_string(row) + ", column '" +
                     header[c] + "': unknown level '" + cell + "'");
          cat[static_cast<std::size_t>(slot.index)].push_back(
              static_cast<std::int32_t>(lev));
        }
      }
    }
    ++row;
  }
  return Cohort(schema, std::move(num), std::move(cat), std::move(tg));
}

Cohort load_csv(const std::string& path, const FeatureSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_failure, "load_csv: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, path);
}

std::string to_csv(const Cohort& cohort) {
  const auto& schema = cohort.schema();
  std::string out;
  for (std::size_t j = 0; j < schema.n_features(); ++j) {
    if (j) out += ',';
    out += schema.features()[j].name;
  }
  for (const auto& t : schema.target_names()) {
    out += ',';
    out += t;
  }
  out += '\n';
  const std::int64_t n = cohort.n_rows();
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < schema.n_features(); ++j) {
      if (j) out += ',';
      const auto& def = schema.features()[j];
      if (def.kind == FeatureKind::numeric) {
        out += format_double(cohort.numeric_cell(static_cast<int>(j), i));
      } else {
        out += def.levels[static_cast<std::size_t>(
            cohort.categorical_cell(static_cast<int>(j), i))];
      }
    }
    for (std::size_t t = 0; t < schema.n_targets(); ++t) {
      out += ',';
      const auto v = cohort.target(static_cast<int>(t))[static_cast<std::size_t>(i)];
      out += (v == kTargetNA) ? "NA" : (v ? "1" : "0");
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Cohort& cohort, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_failure, "write_csv: cannot open '" + path + "'");
  out << to_csv(cohort);
  if (!out) fail(Errc::io_failure, "write_csv: write failed for '" + path + "'");
}

std::pair<Cohort, std::int64_t> filter_zero_scores(const Cohort& cohort) {
  const int mi = cohort.schema().feature_index("math_score");
  const int ii = cohort.schema().feature_index("italian_score");
  if (mi < 0 || ii < 0)
    fail(Errc::missing_column,
         "filter_zero_scores: math_score / italian_score missing");
  const auto& math = cohort.numeric(mi);
  const auto& ital = cohort.numeric(ii);
  std::vector<std::uint32_t> keep;
  keep.reserve(math.size());
  for (std::size_t i = 0; i < math.size(); ++i) {
    if (math[i] != 0.0 && ital[i] != 0.0)
      keep.push_back(static_cast<std::uint32_t>(i));
  }
  const std::int64_t removed =
      cohort.n_rows() - static_cast<std::int64_t>(keep.size());
  return {cohort.select(keep), removed};
}

SplitAssignment train_test_split(const Cohort& cohort, double train_fraction,
                                 std::uint64_t seed) {
  const std::int64_t n = cohort.n_rows();
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(Errc::invalid_config, "train_test_split: fraction must be in (0,1)");
  if (n < 2) fail(Errc::degenerate_split, "train_test_split: need n >= 2");
  const auto n_train = static_cast<std::int64_t>(
      std::llround(train_fraction * static_cast<double>(n)));
  if (n_train <= 0 || n_train >= n)
    fail(Errc::degenerate_split, "train_test_split: a side would be empty");
  Rng rng(derive_seed(seed, SeedStream::split));
  auto perm = rng.permutation(static_cast<std::uint32_t>(n));
  SplitAssignment out;
  out.seed = seed;
  out.train_indices.assign(perm.begin(), perm.begin() + n_train);
  out.test_indices.assign(perm.begin() + n_train, perm.end());
  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  return out;
}

}  // namespace stemboost
