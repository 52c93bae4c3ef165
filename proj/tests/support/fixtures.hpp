#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lem/event.hpp"
#include "lem/model.hpp"
#include "lem/rng.hpp"

namespace lem::testing {

struct FixtureOptions {
  std::vector<std::string> leagues = {"England", "France", "Germany", "Italy", "Spain"};
  int matches_per_league = 2;
  int events_per_half = 60;
  std::uint64_t seed = 42;
  bool include_unknown_type = false;  // adds one event with an unrecognized label
};

// Writes Wyscout-V2-shaped matches_<League>.json and events_<League>.json
// files under dir.
void write_wyscout_fixture(const std::string& dir, const FixtureOptions& opts);

// In-memory canonical corpus with the same dynamics (team-flip persistence,
// coordinate continuity, location-dependent goals); satisfies every Event
// invariant including boundary markers.
std::vector<MatchEvents> synthetic_corpus(int n_matches, int events_per_half,
                                          std::uint64_t seed);

// Stub models ------------------------------------------------------------

// Same probability for every token: masked sampling becomes uniform.
class UniformStub : public TokenModel {
 public:
  explicit UniformStub(int k) : k_(k) {}
  int context_k() const override { return k_; }
  int input_width() const override { return lem::input_width(k_); }
  void predict(const float* inputs, int batch, float* outputs, int threads) const override;

 private:
  int k_;
};

// Emits a fixed token at every position; rollouts are fully deterministic.
// With type = <GAME_OVER> every rollout ends immediately.
class FixedTokenStub : public TokenModel {
 public:
  FixedTokenStub(int k, std::array<TokenId, kPredictedTokens> tokens)
      : k_(k), tokens_(tokens) {}
  int context_k() const override { return k_; }
  int input_width() const override { return lem::input_width(k_); }
  void predict(const float* inputs, int batch, float* outputs, int threads) const override;

 private:
  int k_;
  std::array<TokenId, kPredictedTokens> tokens_;
};

// k=1 stub that repeats the context event's coordinates and never scores;
// ends matches with a small fixed <GAME_OVER> probability so rollouts stop.
class RepeatCoordinateStub : public TokenModel {
 public:
  explicit RepeatCoordinateStub(double p_game_over = 0.02) : p_over_(p_game_over) {}
  int context_k() const override { return 1; }
  int input_width() const override { return lem::input_width(1); }
  void predict(const float* inputs, int batch, float* outputs, int threads) const override;

 private:
  double p_over_;
};

// Uniform everywhere except isGoal, which is forced to 0.
class NoGoalStub : public TokenModel {
 public:
  explicit NoGoalStub(int k) : k_(k) {}
  int context_k() const override { return k_; }
  int input_width() const override { return lem::input_width(k_); }
  void predict(const float* inputs, int batch, float* outputs, int threads) const override;

 private:
  int k_;
};

// Wraps another model and counts predict() calls/rows; for reuse assertions.
class CountingModel : public TokenModel {
 public:
  explicit CountingModel(const TokenModel& inner) : inner_(inner) {}
  int context_k() const override { return inner_.context_k(); }
  int input_width() const override { return inner_.input_width(); }
  void predict(const float* inputs, int batch, float* outputs, int threads) const override {
    calls_ += 1;
    rows_ += batch;
    inner_.predict(inputs, batch, outputs, threads);
  }
  std::int64_t calls() const { return calls_; }
  std::int64_t rows() const { return rows_; }

 private:
  const TokenModel& inner_;
  mutable std::int64_t calls_ = 0;
  mutable std::int64_t rows_ = 0;
};

// Number of already-filled prefix slots in a normalized input row, i.e. the
// position being predicted. NaN-padded slots normalize to exactly 140/140.
int position_from_input(const float* input, int k);

}  // namespace lem::testing
