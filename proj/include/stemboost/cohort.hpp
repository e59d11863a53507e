#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stemboost/schema.hpp"

namespace stemboost {

// Target cells are int8: 0/1, or -1 for NA (stem on non-enrolled rows).
inline constexpr std::int8_t kTargetNA = -1;

// Immutable columnar cohort. Categorical cells are stored as level indices
// into the schema's level list; numeric cells must be finite.
class Cohort {
 public:
  Cohort() = default;
  Cohort(FeatureSchema schema, std::vector<std::vector<double>> numeric_cols,
         std::vector<std::vector<std::int32_t>> categorical_cols,
         std::vector<std::vector<std::int8_t>> target_cols);

  const FeatureSchema& schema() const { return schema_; }
  std::int64_t n_rows() const { return n_; }

  const std::vector<double>& numeric(int feature) const;
  const std::vector<std::int32_t>& categorical(int feature) const;
  const std::vector<std::int8_t>& target(int target_index) const;
  const std::vector<std::int8_t>& target(const std::string& name) const;

  double numeric_cell(int feature, std::int64_t row) const {
    return numeric_cols_[static_cast<std::size_t>(feature)]
                        [static_cast<std::size_t>(row)];
  }
  std::int32_t categorical_cell(int feature, std::int64_t row) const {
    return categorical_cols_[static_cast<std::size_t>(feature)]
                            [static_cast<std::size_t>(row)];
  }

  // New cohort with the given rows, in the given order.
  Cohort select(const std::vector<std::uint32_t>& rows) const;

  // Cell-level equality (categorical by level index, numeric bitwise).
  bool identical_to(const Cohort& other) const;

 private:
  void validate();

  FeatureSchema schema_;
  // Parallel to schema feature order; the vector for the other kind is empty.
  std::vector<std::vector<double>> numeric_cols_;
  std::vector<std::vector<std::int32_t>> categorical_cols_;
  std::vector<std::vector<std::int8_t>> target_cols_;
  std::int64_t n_ = 0;
};

struct SplitAssignment {
  std::vector<std::uint32_t> train_indices;  // sorted ascending
  std::vector<std::uint32_t> test_indices;   // sorted ascending
  std::uint64_t seed = 0;
};

Cohort load_csv(const std::string& path, const FeatureSchema& schema);
Cohort parse_csv(const std::string& content, const FeatureSchema& schema,
                 const std::string& origin);

std::string to_csv(const Cohort& cohort);
void write_csv(const Cohort& cohort, const std::string& path);

// Drops rows with math_score == 0 or italian_score == 0 (transcription-error
// convention of the source tests); preserves relative row order.
std::pair<Cohort, std::int64_t> filter_zero_scores(const Cohort& cohort);

// Uniform random permutation, then prefix split with |train| = round(f * n).
SplitAssignment train_test_split(const Cohort& cohort, double train_fraction,
                                 std::uint64_t seed);

}  // namespace stemboost
