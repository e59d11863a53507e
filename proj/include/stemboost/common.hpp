#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace stemboost {

// ----------------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------------

enum class Errc {
  // configuration
  invalid_config,
  k_too_large,
  degenerate_split,
  // data
  missing_column,
  unknown_column,
  unknown_category_level,
  non_finite_numeric,
  ragged_row,
  invalid_target,
  schema_mismatch,
  insufficient_rows,
  io_failure,
  // numeric / algorithmic
  too_few_rows,
  unknown_level,
  single_class,
  constant_feature,
  insufficient_variance,
  empty_facet,
  degenerate_hull,
};

// CLI exit-code contract: 0 success, 2 config error, 3 data error, 4 numeric.
int exit_code_for(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Errc code() const { return code_; }
  int exit_code() const { return exit_code_for(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

// ----------------------------------------------------------------------------
// Deterministic random streams
//
// All randomness in the toolkit flows through Rng, a self-contained
// xorshift* engine with its own samplers. Standard-library distributions are
// implementation-defined, so uniform/normal draws are derived here from raw
// engine output to keep every artifact reproducible run to run.
//
// Sub-seed scheme: derive_seed(master, stream, counter) where `stream`
// identifies the consumer (see SeedStream) and `counter` an instance within
// it (fold id, boosting iteration, ...). One master seed reproduces a study.
// ----------------------------------------------------------------------------

enum class SeedStream : std::uint64_t {
  synth = 1,
  split = 2,
  folds = 3,
  bagging = 4,
  cv_fit = 5,
  refit = 6,
};

std::uint64_t splitmix64(std::uint64_t x);

inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                                 std::uint64_t counter = 0) {
  std::uint64_t h = splitmix64(master ^ (0x9e3779b97f4a7c15ULL *
                                         static_cast<std::uint64_t>(stream)));
  return splitmix64(h + counter);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0xa5a5a5a5a5a5a5a5ULL)) {
    // splitmix-expanded state avoids correlated low-entropy seeds
    state_ = splitmix64(state_);
    if (state_ == 0) state_ = 0x106689d45497fdb5ULL;
  }

  std::uint64_t next_u64() {
    // xorshift* keeps the draw path fully specified in this codebase
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dULL;
  }

  // uniform in [0, 1)
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [0, n), rejection-sampled
  std::uint64_t uniform_below(std::uint64_t n);

  // standard normal via Box-Muller; second value cached
  double normal();

  // Fisher-Yates permutation of [0, n)
  std::vector<std::uint32_t> permutation(std::uint32_t n);

  // first k entries of a Fisher-Yates permutation, returned sorted ascending
  std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n,
                                                        std::uint32_t k);

 private:
  std::uint64_t state_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// ----------------------------------------------------------------------------
// Parallel helpers
//
// Chunk boundaries are fixed (independent of the thread budget) and callers
// combine per-chunk results in chunk order, so outputs are byte-identical for
// any --threads value.
// ----------------------------------------------------------------------------

void set_threads(int n);
int threads();

// fn(chunk_index, begin, end) over [0, n) in fixed chunks of `chunk_size`.
void parallel_chunks(std::int64_t n, std::int64_t chunk_size,
                     const std::function<void(std::int64_t, std::int64_t,
                                              std::int64_t)>& fn);

// fn(job) for job in [0, n_jobs); each job writes its own output slot.
void parallel_jobs(std::int64_t n_jobs,
                   const std::function<void(std::int64_t)>& fn);

inline constexpr std::int64_t kRowChunk = 4096;

// ----------------------------------------------------------------------------
// Numeric helpers
// ----------------------------------------------------------------------------

inline constexpr double kProbClamp = 1e-12;  // single clamping bound, everywhere

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

// Empirical quantile with linear interpolation between adjacent order
// statistics; `sorted` must be ascending. Shared by SES quartiles and ALE
// boundaries so every module uses one convention.
double quantile_sorted(const std::vector<double>& sorted, double p);

double pearson_correlation(const std::vector<double>& x,
                           const std::vector<double>& y);

// ----------------------------------------------------------------------------
// Text formatting / parsing
// ----------------------------------------------------------------------------

// Shortest representation that round-trips through parse_double exactly.
std::string format_double(double v);

double parse_double(std::string_view text, bool& ok);
long long parse_int(std::string_view text, bool& ok);

std::vector<std::string> split_csv_line(std::string_view line);

// FNV-1a over bytes; used for schema fingerprints and output manifests.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace stemboost
