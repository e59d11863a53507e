#include "stemboost/common.hpp"

#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

namespace stemboost {

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::invalid_config:
    case Errc::k_too_large:
    case Errc::degenerate_split:
      return 2;
    case Errc::missing_column:
    case Errc::unknown_column:
    case Errc::unknown_category_level:
    case Errc::non_finite_numeric:
    case Errc::ragged_row:
    case Errc::invalid_target:
    case Errc::schema_mismatch:
    case Errc::insufficient_rows:
    case Errc::io_failure:
      return 3;
    default:
      return 4;
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  if (n == 0) fail(Errc::invalid_config, "uniform_below: empty range");
  if ((n & (n - 1)) == 0) return next_u64() & (n - 1);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller on (0,1] uniforms; u1 > 0 guaranteed by the 1-u transform
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

std::vector<std::uint32_t> Rng::permutation(std::uint32_t n) {
  std::vector<std::uint32_t> idx(n);
  for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
  for (std::uint32_t i = n; i > 1; --i) {
    const std::uint32_t j =
        static_cast<std::uint32_t>(uniform_below(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::vector<std::uint32_t> Rng::sample_without_replacement(std::uint32_t n,
                                                           std::uint32_t k) {
  if (k > n) fail(Errc::invalid_config, "sample_without_replacement: k > n");
  std::vector<std::uint32_t> idx(n);
  for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
  for (std::uint32_t i = 0; i < k; ++i) {
    const std::uint32_t j =
        i + static_cast<std::uint32_t>(uniform_below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {
std::atomic<int> g_threads{1};
}

void set_threads(int n) {
  if (n < 1) n = 1;
  g_threads.store(n, std::memory_order_relaxed);
}

int threads() { return g_threads.load(std::memory_order_relaxed); }

void parallel_chunks(std::int64_t n, std::int64_t chunk_size,
                     const std::function<void(std::int64_t, std::int64_t,
                                              std::int64_t)>& fn) {
  if (n <= 0) return;
  const std::int64_t n_chunks = (n + chunk_size - 1) / chunk_size;
  const int workers =
      static_cast<int>(std::min<std::int64_t>(threads(), n_chunks));
  if (workers <= 1) {
    for (std::int64_t c = 0; c < n_chunks; ++c) {
      fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
    }
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    try {
      for (;;) {
        const std::int64_t c = next.fetch_add(1, std::memory_order_relaxed);
        if (c >= n_chunks) return;
        fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void parallel_jobs(std::int64_t n_jobs,
                   const std::function<void(std::int64_t)>& fn) {
  parallel_chunks(n_jobs, 1,
                  [&fn](std::int64_t, std::int64_t begin, std::int64_t) {
                    fn(begin);
                  });
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) fail(Errc::insufficient_rows, "quantile of empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || lo + 1 >= sorted.size()) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double pearson_correlation(const std::vector<double>& x,
                           const std::vector<double>& y) {
  if (x.size() != y.size())
    fail(Errc::invalid_config, "pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) fail(Errc::insufficient_rows, "pearson: need at least 2 rows");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    fail(Errc::insufficient_variance, "pearson: constant input");
  return sxy / std::sqrt(sxx * syy);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, bool& ok) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  ok = res.ec == std::errc() && res.ptr == text.data() + text.size();
  return v;
}

long long parse_int(std::string_view text, bool& ok) {
  long long v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  ok = res.ec == std::errc() && res.ptr == text.data() + text.size();
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return std::string(buf);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_failure, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_failure, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(Errc::io_failure, "write failed for '" + path + "'");
}

}  // namespace stemboost
