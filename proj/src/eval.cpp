#include "lem/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"

#include "lem/sampler.hpp"
#include "lem/simulator.hpp"
#include "lem/trainer.hpp"

namespace lem {

namespace {

struct ClsAccum {
  std::vector<std::pair<TokenId, TokenId>> pairs;  // (target, predicted)

  ClassificationMetrics binary_metrics() const {
    ClassificationMetrics m;
    m.n = static_cast<std::int64_t>(pairs.size());
    if (pairs.empty()) return m;
    std::int64_t correct = 0, tp = 0, fp = 0, fn = 0;
    for (auto [y, p] : pairs) {
      correct += (y == p);
      tp += (y == 1 && p == 1);
      fp += (y == 0 && p == 1);
      fn += (y == 1 && p == 0);
    }
    m.acc = static_cast<double>(correct) / static_cast<double>(pairs.size());
    const double denom = static_cast<double>(2 * tp + fp + fn);
    m.f1 = denom > 0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
    return m;
  }

  // Weighted-average F1 over the classes present in the targets.
  ClassificationMetrics weighted_metrics() const {
    ClassificationMetrics m;
    m.n = static_cast<std::int64_t>(pairs.size());
    if (pairs.empty()) return m;
    std::int64_t correct = 0;
    std::map<TokenId, std::int64_t> support, tp, pred_count;
    for (auto [y, p] : pairs) {
      correct += (y == p);
      support[y] += 1;
      pred_count[p] += 1;
      if (y == p) tp[y] += 1;
    }
    m.acc = static_cast<double>(correct) / static_cast<double>(pairs.size());
    double f1_sum = 0.0;
    for (const auto& [cls, sup] : support) {
      const double tpc = static_cast<double>(tp.count(cls) ? tp.at(cls) : 0);
      const double prc = static_cast<double>(pred_count.count(cls) ? pred_count.at(cls) : 0);
      const double precision = prc > 0 ? tpc / prc : 0.0;
      const double recall = tpc / static_cast<double>(sup);
      const double f1 =
          (precision + recall) > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
      f1_sum += f1 * static_cast<double>(sup);
    }
    m.f1 = f1_sum / static_cast<double>(pairs.size());
    return m;
  }
};

struct RegAccum {
  std::vector<std::pair<double, double>> pairs;  // (target, predicted)

  RegressionMetrics metrics() const {
    RegressionMetrics m;
    m.n = static_cast<std::int64_t>(pairs.size());
    if (pairs.empty()) return m;
    double abs_sum = 0.0, mean_y = 0.0;
    for (auto [y, p] : pairs) {
      abs_sum += std::abs(y - p);
      mean_y += y;
    }
    mean_y /= static_cast<double>(pairs.size());
    m.mae = abs_sum / static_cast<double>(pairs.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (auto [y, p] : pairs) {
      ss_res += (y - p) * (y - p);
      ss_tot += (y - mean_y) * (y - mean_y);
    }
    m.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;  // R2 := 0 on a constant target
    return m;
  }
};

struct Accums {
  ClsAccum cls[4];  // type, goal, accurate, home
  RegAccum reg[3];  // timeElapsed, x, y
};

TokenId masked_argmax(const float* probs, const PositionMask& mask) {
  TokenId best = mask.lo;
  float best_p = probs[mask.lo];
  for (TokenId t = static_cast<TokenId>(mask.lo + 1); t <= mask.hi; ++t) {
    if (probs[t] > best_p) {
      best_p = probs[t];
      best = t;
    }
  }
  return best;
}

double masked_point_estimate(const float* probs, const PositionMask& mask, PointEstimate pe) {
  double total = 0.0;
  for (TokenId t = mask.lo; t <= mask.hi; ++t) {
    if (probs[t] > 0.0f) total += static_cast<double>(probs[t]);
  }
  if (total <= 0.0) return 0.5 * (mask.lo + mask.hi);
  if (pe == PointEstimate::Mean) {
    double acc = 0.0;
    for (TokenId t = mask.lo; t <= mask.hi; ++t) {
      if (probs[t] > 0.0f) acc += static_cast<double>(t) * (probs[t] / total);
    }
    return acc;
  }
  double cum = 0.0;
  for (TokenId t = mask.lo; t <= mask.hi; ++t) {
    if (probs[t] > 0.0f) cum += probs[t] / total;
    if (cum >= 0.5) return static_cast<double>(t);
  }
  return static_cast<double>(mask.hi);
}

MetricsReport finish(const Accums& a) {
  MetricsReport r;
  r.type = a.cls[0].weighted_metrics();
  r.goal = a.cls[1].binary_metrics();
  r.accurate = a.cls[2].binary_metrics();
  r.home = a.cls[3].binary_metrics();
  r.time_elapsed = a.reg[0].metrics();
  r.x = a.reg[1].metrics();
  r.y = a.reg[2].metrics();
  return r;
}

}  // namespace

MetricsReport evaluate(const TokenModel& m, const std::vector<MatchEvents>& test, int k,
                       const Vocab& v, PointEstimate pe, int threads) {
  if (test.empty()) throw ConfigError("test set is empty");
  const PairSet pairs = make_pairs_corpus(test, k, v);
  const int width = pairs.width();

  Accums acc;
  constexpr std::int64_t kBatch = 2048;
  std::vector<float> inputs;
  std::vector<float> probs;
  for (std::int64_t start = 0; start < pairs.size(); start += kBatch) {
    const int b = static_cast<int>(std::min(kBatch, pairs.size() - start));
    inputs.resize(static_cast<std::size_t>(b) * width);
    parallel_for(b, threads, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t r = lo; r < hi; ++r) {
        pairs.features(start + r, inputs.data() + r * width);
      }
    });
    probs.resize(static_cast<std::size_t>(b) * kVocabSize);
    m.predict(inputs.data(), b, probs.data(), threads);

    for (int r = 0; r < b; ++r) {
      const std::int64_t i = start + r;
      const int pos = pairs.position(i);
      const TokenId target = pairs.target(i);
      const float* row = probs.data() + static_cast<std::size_t>(r) * kVocabSize;
      const PositionMask mask = position_mask(pos);
      if (pos <= 3) {
        acc.cls[pos].pairs.emplace_back(target, masked_argmax(row, mask));
      } else {
        acc.reg[pos - 4].pairs.emplace_back(static_cast<double>(target),
                                            masked_point_estimate(row, mask, pe));
      }
    }
  }
  return finish(acc);
}

MetricsReport baseline(const std::vector<MatchEvents>& train,
                       const std::vector<MatchEvents>& test, const Vocab& v) {
  if (train.empty() || test.empty()) throw ConfigError("baseline needs both splits non-empty");

  // Fit on train targets only: majority class / mean value per position.
  const PairSet train_pairs = make_pairs_corpus(train, 1, v);
  std::map<TokenId, std::int64_t> counts[4];
  double sums[3] = {0, 0, 0};
  std::int64_t ns[3] = {0, 0, 0};
  for (std::int64_t i = 0; i < train_pairs.size(); ++i) {
    const int pos = train_pairs.position(i);
    const TokenId t = train_pairs.target(i);
    if (pos <= 3) {
      counts[pos][t] += 1;
    } else {
      sums[pos - 4] += static_cast<double>(t);
      ns[pos - 4] += 1;
    }
  }
  TokenId majority[4] = {0, 0, 0, 0};
  for (int p = 0; p < 4; ++p) {
    std::int64_t best = -1;
    for (const auto& [t, c] : counts[p]) {
      if (c > best) {
        best = c;
        majority[p] = t;
      }
    }
  }
  double means[3];
  for (int i = 0; i < 3; ++i) {
    means[i] = ns[i] > 0 ? sums[i] / static_cast<double>(ns[i]) : 0.0;
  }

  const PairSet test_pairs = make_pairs_corpus(test, 1, v);
  Accums acc;
  for (std::int64_t i = 0; i < test_pairs.size(); ++i) {
    const int pos = test_pairs.position(i);
    const TokenId target = test_pairs.target(i);
    if (pos <= 3) {
      acc.cls[pos].pairs.emplace_back(target, majority[pos]);
    } else {
      acc.reg[pos - 4].pairs.emplace_back(static_cast<double>(target), means[pos - 4]);
    }
  }
  return finish(acc);
}

std::vector<BenchEntry> bench_inference(
    const std::vector<std::pair<std::string, const TokenModel*>>& models,
    std::int64_t n_rollouts, std::uint64_t seed, int threads) {
  if (models.empty()) throw ConfigError("bench_inference needs at least one model");
  std::vector<BenchEntry> out;
  for (const auto& [name, model] : models) {
    BatchOptions opts;
    opts.threads = threads;
    const ThroughputReport rep = measure_throughput(*model, n_rollouts, seed, opts);
    BenchEntry e;
    e.name = name;
    e.events_per_second = rep.events_per_second;
    out.push_back(e);
  }
  for (auto& e : out) {
    e.ratio_vs_first =
        out.front().events_per_second > 0 ? e.events_per_second / out.front().events_per_second
                                          : 0.0;
  }
  return out;
}

namespace {

nlohmann::json cls_json(const ClassificationMetrics& m) {
  return {{"acc", m.acc}, {"f1", m.f1}, {"n", m.n}};
}

nlohmann::json reg_json(const RegressionMetrics& m) {
  return {{"mae", m.mae}, {"r2", m.r2}, {"n", m.n}};
}

}  // namespace

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["Type"] = cls_json(type);
  j["Goal"] = cls_json(goal);
  j["Accurate"] = cls_json(accurate);
  j["Home"] = cls_json(home);
  j["Time"] = reg_json(time_elapsed);
  j["X"] = reg_json(x);
  j["Y"] = reg_json(y);
  return j.dump(2);
}

void write_report_json(const std::string& path, const MetricsReport& report,
                       const std::string& config_echo_json) {
  nlohmann::json j;
  j["variables"] = nlohmann::json::parse(report.to_json());
  j["config"] = config_echo_json.empty() ? nlohmann::json::object()
                                         : nlohmann::json::parse(config_echo_json);
  j["version"] = kVersion;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace lem
