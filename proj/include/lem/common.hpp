#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lem {

inline constexpr const char* kVersion = "0.1.0";

// Sentinel for undefined integer fields (written as "NA" in CSV, <NaN> token in the codec).
inline constexpr std::int16_t kNA = -1;

inline bool is_na(std::int16_t v) { return v == kNA; }

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file (bad JSON, bad CSV, bad checkpoint bytes).
struct ParseError : Error {
  using Error::Error;
};

// Well-formed input that violates a data invariant (e.g. a match without a home side).
struct DataError : Error {
  using Error::Error;
};

// Invalid user-supplied configuration (bad flag value, unknown league label).
struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

inline int default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Static-partition parallel loop over [0, n). Each index is processed entirely by
// one worker, so any reduction done per-index is bitwise independent of `threads`.
inline void parallel_for(std::int64_t n, int threads,
                         const std::function<void(std::int64_t, std::int64_t)>& body) {
  if (n <= 0) return;
  int t = threads < 1 ? 1 : threads;
  if (static_cast<std::int64_t>(t) > n) t = static_cast<int>(n);
  if (t == 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  const std::int64_t chunk = (n + t - 1) / t;
  for (int i = 0; i < t; ++i) {
    const std::int64_t lo = i * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace lem
