#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lem/codec.hpp"
#include "lem/event.hpp"
#include "lem/model.hpp"

namespace lem {

struct TrainConfig {
  int epochs = 50;
  double lr0 = 0.001;
  int batch_size = 512;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  bool shuffle = true;
  int threads = 1;

  void validate() const;
};

struct TrainingPair {
  InputVector input;
  TokenId target = 0;
  int position = 0;  // which of the 7 predicted tokens
};

// Packed training pairs; slot and target values all fit in a byte.
class PairSet {
 public:
  explicit PairSet(int width) : width_(width) {}

  int width() const { return width_; }
  std::int64_t size() const { return static_cast<std::int64_t>(targets_.size()); }
  bool empty() const { return targets_.empty(); }

  void append(const InputVector& input, TokenId target, int position);
  void append_all(const PairSet& other);

  TrainingPair at(std::int64_t i) const;
  TokenId target(std::int64_t i) const { return targets_[static_cast<std::size_t>(i)]; }
  int position(std::int64_t i) const { return positions_[static_cast<std::size_t>(i)]; }

  // Normalized feature row for pair i (width floats).
  void features(std::int64_t i, float* out) const;

 private:
  int width_;
  std::vector<std::uint8_t> slots_;
  std::vector<std::uint8_t> targets_;
  std::vector<std::uint8_t> positions_;
};

// Teacher-forced pairs for one match: 7 per first-class event (true prefix,
// next token in order type, isGoal, isAccurate, isHome, timeElapsed, x, y),
// 1 per boundary event (its type only).
PairSet make_pairs(const std::vector<Event>& match, int k, const Vocab& v);

PairSet make_pairs_corpus(const std::vector<MatchEvents>& matches, int k, const Vocab& v);

// 0.5 * lr0 * (1 + cos(pi * epoch / epochs)); per-epoch adjustment.
double cosine_lr(int epoch, const TrainConfig& cfg);

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  double duration_s = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> history;
};

using EpochCallback = std::function<void(int epoch, const Model&, const EpochStats&)>;

TrainResult train(const PairSet& data, const ModelConfig& mc, const TrainConfig& tc,
                  const Vocab& v = Vocab::builtin(), const EpochCallback& on_epoch = {});

// CSV: epoch,lr,mean_loss,duration_s
void write_train_log(const std::string& path, const std::vector<EpochStats>& history);

}  // namespace lem
