#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lem/event.hpp"
#include "lem/model.hpp"

namespace lem {

// Point estimate used to turn a masked token distribution into a scalar for
// the continuous variables. The paper does not pin this down; Mean is the
// default, Median available behind a flag.
enum class PointEstimate { Mean, Median };

struct ClassificationMetrics {
  double acc = 0.0;
  double f1 = 0.0;
  std::int64_t n = 0;
};

struct RegressionMetrics {
  double mae = 0.0;
  double r2 = 0.0;
  std::int64_t n = 0;
};

// Per-variable teacher-forced metrics: ACC/F1 for the categorical variables,
// MAE/R2 for the continuous ones.
struct MetricsReport {
  ClassificationMetrics type;      // 39-way, weighted F1
  ClassificationMetrics goal;      // binary, positive-class F1
  ClassificationMetrics accurate;  // binary
  ClassificationMetrics home;      // binary
  RegressionMetrics time_elapsed;
  RegressionMetrics x;
  RegressionMetrics y;

  std::string to_json() const;
};

MetricsReport evaluate(const TokenModel& m, const std::vector<MatchEvents>& test, int k,
                       const Vocab& v, PointEstimate pe = PointEstimate::Mean,
                       int threads = 1);

// Majority-class / mean-value baseline fitted on train, scored on test.
MetricsReport baseline(const std::vector<MatchEvents>& train,
                       const std::vector<MatchEvents>& test, const Vocab& v);

struct BenchEntry {
  std::string name;
  double events_per_second = 0.0;
  double ratio_vs_first = 1.0;
};

// Generation throughput under identical batching; first entry is the reference.
std::vector<BenchEntry> bench_inference(
    const std::vector<std::pair<std::string, const TokenModel*>>& models,
    std::int64_t n_rollouts, std::uint64_t seed, int threads = 1);

void write_report_json(const std::string& path, const MetricsReport& report,
                       const std::string& config_echo_json);

}  // namespace lem
