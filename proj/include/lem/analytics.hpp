#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lem/event.hpp"
#include "lem/model.hpp"
#include "lem/simulator.hpp"

namespace lem {

inline constexpr int kGridSize = 101;

struct TransitionMatrix {
  // Row-normalized P(next coordinate | current coordinate); row-major 101x101.
  std::vector<double> probs;
  std::vector<std::int64_t> row_counts;  // rows with 0 samples are undefined

  double at(int current, int next) const {
    return probs[static_cast<std::size_t>(current) * kGridSize + next];
  }
  bool row_defined(int current) const { return row_counts[static_cast<std::size_t>(current)] > 0; }
};

enum class Axis { X, Y };

TransitionMatrix transition_matrix(const TokenModel& m, const std::vector<GameState>& states,
                                   Axis axis, std::int64_t samples_per_state,
                                   std::uint64_t seed, int threads = 1);

// Fraction of sampled transitions within `band` of the main diagonal
// (same-team continuity) or the anti-diagonal (possession flip to 100-c).
double transition_ridge_mass(const TransitionMatrix& t, int band);

struct XgMap {
  std::vector<double> goal_fraction;     // 101x101, NaN where no shots landed
  std::vector<std::int64_t> shot_counts; // 101x101
  std::vector<Event> context;

  double at(int x, int y) const {
    return goal_fraction[static_cast<std::size_t>(x) * kGridSize + y];
  }
};

// Teacher-force the event type to "shot", sample the remaining six tokens
// n_shots times, and bin goal outcomes by the sampled location.
XgMap xg_map(const std::vector<Event>& context, const TokenModel& m, const Vocab& v,
             std::int64_t n_shots, std::uint64_t seed, int threads = 1);

struct ShortTermProb {
  double p_home_scores = 0.0;
  double p_away_scores = 0.0;
};

// Fraction of <= horizon-event continuations in which each side scores.
ShortTermProb short_term_prob(const GameState& state, const TokenModel& m, int horizon,
                              std::int64_t n_sims, std::uint64_t seed, int threads = 1);

struct MomentumPoint {
  std::int64_t event_index = 0;
  double raw = 0.0;       // pHome - pAway
  double smoothed = 0.0;  // EWMA of raw
};

std::vector<MomentumPoint> momentum_series(const std::vector<Event>& match,
                                           const TokenModel& m, int k, int horizon,
                                           std::int64_t n_sims, double smoothing,
                                           std::uint64_t seed, int threads = 1);

struct OutcomeDistribution {
  double p_home_win = 0.0;
  double p_draw = 0.0;
  double p_away_win = 0.0;
  double p_over25 = 0.0;
  double p_under25 = 0.0;
  std::int64_t n_sims = 0;
};

// Full rollouts to <GAME_OVER>; 1X2 and the over/under 2.5 market are tallied
// from the same rollout batch.
OutcomeDistribution long_term_outcomes(const GameState& state, const TokenModel& m,
                                       std::int64_t n_sims, std::uint64_t seed,
                                       std::int64_t max_events = 4000, int threads = 1);

// In-game outcome probabilities after every event of a match.
std::vector<OutcomeDistribution> winprob_series(const std::vector<Event>& match,
                                                const TokenModel& m, int k,
                                                std::int64_t n_sims, std::uint64_t seed,
                                                std::int64_t max_events = 4000,
                                                int threads = 1);

enum class ActionValueVariant { ST10, LTInf, LTInfZeroed };

struct ActionValue {
  std::int64_t event_index = 0;
  ActionValueVariant variant = ActionValueVariant::ST10;
  double value = 0.0;
};

// Change in scoring-minus-conceding probability (ST) or in expected points
// 3/1/0 (LT variants) that each first-class action induces for its own team.
// LTInfZeroed evaluates both surrounding states with the score reset to 0-0.
std::vector<ActionValue> action_values(const std::vector<Event>& match, const TokenModel& m,
                                       int k, ActionValueVariant variant, int horizon,
                                       std::int64_t n_sims, std::uint64_t seed,
                                       int threads = 1);

// CSV/JSON writers for the analytics outputs.
void write_matrix_csv(const std::string& path, const std::vector<double>& grid101);
void write_momentum_csv(const std::string& path, const std::vector<MomentumPoint>& series);
void write_winprob_csv(const std::string& path,
                       const std::vector<OutcomeDistribution>& series);
void write_action_values_csv(const std::string& path, const std::vector<ActionValue>& values);
std::string outcome_to_json(const OutcomeDistribution& o);

}  // namespace lem
