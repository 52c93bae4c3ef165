#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "lem/codec.hpp"
#include "lem/event.hpp"
#include "lem/model.hpp"
#include "lem/rng.hpp"
#include "lem/sampler.hpp"

namespace lem {

// Rolling simulation state: the last k events (first-class and boundary),
// clock, scores, termination flag.
struct GameState {
  std::vector<Event> context;  // oldest -> newest, at most k entries
  int k = 1;
  std::int16_t period = 1;
  std::int16_t minute = 0;
  std::int16_t second = 0;
  std::int16_t home_score = 0;
  std::int16_t away_score = 0;
  bool terminated = false;
  std::int64_t event_count = 0;

  static GameState kickoff(int k);

  // Reconstructed state after `match[0..upto]` has been played.
  static GameState after_event(const std::vector<Event>& match, std::size_t upto, int k);

  void push_context(const Event& e);
};

struct StepDiagnostics {
  std::uint64_t premature_game_over = 0;  // <GAME_OVER> sampled in period 1
  std::uint64_t late_period_over = 0;     // <PERIOD_OVER> sampled in period 2
  SamplerDiagnostics sampler;

  StepDiagnostics& operator+=(const StepDiagnostics& o) {
    premature_game_over += o.premature_game_over;
    late_period_over += o.late_period_over;
    sampler += o.sampler;
    return *this;
  }
};

struct Rollout {
  std::vector<Event> events;           // empty when BatchOptions::keep_events is false
  std::int64_t n_events = 0;           // generated events, boundaries included
  std::int16_t final_home = 0;
  std::int16_t final_away = 0;
  std::int64_t stream_id = 0;
  bool truncated = false;
  StepDiagnostics diag;
};

// One full event generation: sample the 7 positions (boundary types shortcut
// after position 0), then apply the deterministic clock/score updates.
Event step(GameState& state, const TokenModel& m, RngStream& rng,
           StepDiagnostics* diag = nullptr);

Rollout rollout(GameState start, const TokenModel& m, RngStream rng,
                std::int64_t max_events = 4000, std::int64_t stream_id = 0);

struct BatchOptions {
  std::int64_t max_events = 4000;
  int threads = 1;
  bool keep_events = true;  // false keeps only final scores/counters (cheaper)
};

// n independent rollouts with streams 0..n-1; inference is batched across the
// active rollouts one position-step at a time. Results are identical for any
// thread count.
std::vector<Rollout> batch_rollout(const GameState& start, const TokenModel& m, std::int64_t n,
                                   std::uint64_t seed, const BatchOptions& opts = {});

// JSON-lines dump, one rollout per line.
void write_rollouts_jsonl(const std::string& path, const std::vector<Rollout>& rollouts,
                          const Vocab& v);

struct ThroughputReport {
  double events_per_second = 0.0;
  std::int64_t events = 0;
  double seconds = 0.0;
};

ThroughputReport measure_throughput(const TokenModel& m, std::int64_t n_rollouts,
                                    std::uint64_t seed, const BatchOptions& opts = {});

// JSON array of event objects ({"eventType": ..., "isGoal": ..., ...}, null or
// missing fields read as NA).
std::vector<Event> load_context_json(const std::string& path, const Vocab& v);

// {"context": [Event, ...], "period": .., "minute": .., "second": ..,
//  "homeScore": .., "awayScore": ..}
GameState load_state_json(const std::string& path, int k, const Vocab& v);

}  // namespace lem
