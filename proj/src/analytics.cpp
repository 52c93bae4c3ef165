#include "lem/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "lem/rng.hpp"
#include "lem/sampler.hpp"

namespace lem {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return RngStream(seed, index).next_u64();
}

GameState state_from_context(const std::vector<Event>& context, int k) {
  if (context.empty()) return GameState::kickoff(k);
  return GameState::after_event(context, context.size() - 1, k);
}

}  // namespace

TransitionMatrix transition_matrix(const TokenModel& m, const std::vector<GameState>& states,
                                   Axis axis, std::int64_t samples_per_state,
                                   std::uint64_t seed, int threads) {
  if (states.empty()) throw ConfigError("transition_matrix needs at least one state");
  if (samples_per_state < 1) throw ConfigError("samples_per_state must be >= 1");

  std::vector<std::int64_t> counts(static_cast<std::size_t>(kGridSize) * kGridSize, 0);
  BatchOptions opts;
  opts.max_events = 1;
  opts.threads = threads;

  for (std::size_t si = 0; si < states.size(); ++si) {
    const GameState& s = states[si];
    if (s.context.empty() || s.terminated) continue;
    const Event& cur = s.context.back();
    const std::int16_t coord = axis == Axis::X ? cur.x : cur.y;
    if (is_na(coord)) continue;

    auto rollouts = batch_rollout(s, m, samples_per_state, derive_seed(seed, si), opts);
    for (const auto& r : rollouts) {
      if (r.events.empty()) continue;
      const Event& next = r.events.front();
      const std::int16_t next_coord = axis == Axis::X ? next.x : next.y;
      if (is_na(next_coord)) continue;
      counts[static_cast<std::size_t>(coord) * kGridSize + next_coord] += 1;
    }
  }

  TransitionMatrix t;
  t.probs.assign(counts.size(), 0.0);
  t.row_counts.assign(kGridSize, 0);
  for (int c = 0; c < kGridSize; ++c) {
    std::int64_t row_total = 0;
    for (int n = 0; n < kGridSize; ++n) {
      row_total += counts[static_cast<std::size_t>(c) * kGridSize + n];
    }
    t.row_counts[static_cast<std::size_t>(c)] = row_total;
    if (row_total == 0) continue;
    for (int n = 0; n < kGridSize; ++n) {
      t.probs[static_cast<std::size_t>(c) * kGridSize + n] =
          static_cast<double>(counts[static_cast<std::size_t>(c) * kGridSize + n]) /
          static_cast<double>(row_total);
    }
  }
  return t;
}

double transition_ridge_mass(const TransitionMatrix& t, int band) {
  double in_band = 0.0;
  double total = 0.0;
  for (int c = 0; c < kGridSize; ++c) {
    if (!t.row_defined(c)) continue;
    const double w = static_cast<double>(t.row_counts[static_cast<std::size_t>(c)]);
    for (int n = 0; n < kGridSize; ++n) {
      const double mass = t.at(c, n) * w;
      total += mass;
      if (std::abs(n - c) <= band || std::abs(n - (100 - c)) <= band) in_band += mass;
    }
  }
  return total > 0 ? in_band / total : 0.0;
}

XgMap xg_map(const std::vector<Event>& context, const TokenModel& m, const Vocab& v,
             std::int64_t n_shots, std::uint64_t seed, int threads) {
  if (n_shots < 1) throw ConfigError("n_shots must be >= 1");
  const int k = m.context_k();
  if (static_cast<int>(context.size()) > k) {
    throw ConfigError("context longer than the model's k");
  }
  const GameState state = state_from_context(context, k);
  const TokenId shot = v.type_token("shot");
  const int width = input_width(k);

  XgMap map;
  map.context = context;
  map.shot_counts.assign(static_cast<std::size_t>(kGridSize) * kGridSize, 0);
  std::vector<std::int64_t> goals(map.shot_counts.size(), 0);

  // Shared context slots; only the prefix differs between lanes.
  InputVector base = build_input(state.context, {}, v, k);

  constexpr std::int64_t kChunk = 8192;
  std::vector<float> inputs;
  std::vector<float> probs;
  for (std::int64_t chunk_start = 0; chunk_start < n_shots; chunk_start += kChunk) {
    const std::int64_t lanes = std::min(kChunk, n_shots - chunk_start);
    std::vector<std::array<TokenId, kPredictedTokens>> tok(static_cast<std::size_t>(lanes));
    std::vector<RngStream> rng;
    rng.reserve(static_cast<std::size_t>(lanes));
    for (std::int64_t i = 0; i < lanes; ++i) {
      rng.emplace_back(seed, static_cast<std::uint64_t>(chunk_start + i));
      tok[static_cast<std::size_t>(i)][0] = shot;
    }

    for (int p = 1; p < kPredictedTokens; ++p) {
      inputs.resize(static_cast<std::size_t>(lanes) * width);
      parallel_for(lanes, threads, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t r = lo; r < hi; ++r) {
          InputVector row = base;
          for (int q = 0; q < p; ++q) {
            row[static_cast<std::size_t>(kEventTokens * k + q)] =
                tok[static_cast<std::size_t>(r)][static_cast<std::size_t>(q)];
          }
          input_to_features(row, inputs.data() + r * width);
        }
      });
      probs.resize(static_cast<std::size_t>(lanes) * kVocabSize);
      m.predict(inputs.data(), static_cast<int>(lanes), probs.data(), threads);
      const PositionMask mask = position_mask(p);
      for (std::int64_t r = 0; r < lanes; ++r) {
        ProbVector pv(probs.begin() + static_cast<std::ptrdiff_t>(r * kVocabSize),
                      probs.begin() + static_cast<std::ptrdiff_t>((r + 1) * kVocabSize));
        tok[static_cast<std::size_t>(r)][static_cast<std::size_t>(p)] =
            sample_masked(pv, mask, rng[static_cast<std::size_t>(r)]);
      }
    }

    for (std::int64_t r = 0; r < lanes; ++r) {
      const auto& tk = tok[static_cast<std::size_t>(r)];
      const std::size_t cell = static_cast<std::size_t>(tk[5]) * kGridSize + tk[6];
      map.shot_counts[cell] += 1;
      if (tk[1] == 1) goals[cell] += 1;
    }
  }

  map.goal_fraction.assign(map.shot_counts.size(),
                           std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < map.shot_counts.size(); ++i) {
    if (map.shot_counts[i] > 0) {
      map.goal_fraction[i] =
          static_cast<double>(goals[i]) / static_cast<double>(map.shot_counts[i]);
    }
  }
  return map;
}

ShortTermProb short_term_prob(const GameState& state, const TokenModel& m, int horizon,
                              std::int64_t n_sims, std::uint64_t seed, int threads) {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (n_sims < 1) throw ConfigError("n_sims must be >= 1");
  ShortTermProb p;
  if (state.terminated) return p;

  BatchOptions opts;
  opts.max_events = horizon;
  opts.keep_events = false;
  opts.threads = threads;
  const auto rollouts = batch_rollout(state, m, n_sims, seed, opts);
  std::int64_t home = 0, away = 0;
  for (const auto& r : rollouts) {
    if (r.final_home > state.home_score) ++home;
    if (r.final_away > state.away_score) ++away;
  }
  p.p_home_scores = static_cast<double>(home) / static_cast<double>(n_sims);
  p.p_away_scores = static_cast<double>(away) / static_cast<double>(n_sims);
  return p;
}

std::vector<MomentumPoint> momentum_series(const std::vector<Event>& match,
                                           const TokenModel& m, int k, int horizon,
                                           std::int64_t n_sims, double smoothing,
                                           std::uint64_t seed, int threads) {
  if (smoothing < 0.0 || smoothing >= 1.0) throw ConfigError("smoothing must be in [0, 1)");
  std::vector<MomentumPoint> out;
  out.reserve(match.size());
  double ewma = 0.0;
  for (std::size_t i = 0; i < match.size(); ++i) {
    const GameState state = GameState::after_event(match, i, k);
    const ShortTermProb p =
        short_term_prob(state, m, horizon, n_sims, derive_seed(seed, i), threads);
    MomentumPoint pt;
    pt.event_index = static_cast<std::int64_t>(i);
    pt.raw = p.p_home_scores - p.p_away_scores;
    ewma = i == 0 ? pt.raw : smoothing * ewma + (1.0 - smoothing) * pt.raw;
    pt.smoothed = ewma;
    out.push_back(pt);
  }
  return out;
}

OutcomeDistribution long_term_outcomes(const GameState& state, const TokenModel& m,
                                       std::int64_t n_sims, std::uint64_t seed,
                                       std::int64_t max_events, int threads) {
  if (n_sims < 1) throw ConfigError("n_sims must be >= 1");
  BatchOptions opts;
  opts.max_events = max_events;
  opts.keep_events = false;
  opts.threads = threads;
  const auto rollouts = batch_rollout(state, m, n_sims, seed, opts);

  OutcomeDistribution o;
  o.n_sims = n_sims;
  std::int64_t hw = 0, dr = 0, aw = 0, over = 0;
  for (const auto& r : rollouts) {
    if (r.final_home > r.final_away) {
      ++hw;
    } else if (r.final_home == r.final_away) {
      ++dr;
    } else {
      ++aw;
    }
    if (r.final_home + r.final_away >= 3) ++over;
  }
  const double n = static_cast<double>(n_sims);
  o.p_home_win = hw / n;
  o.p_draw = dr / n;
  o.p_away_win = aw / n;
  o.p_over25 = over / n;
  o.p_under25 = (n_sims - over) / n;
  return o;
}

std::vector<OutcomeDistribution> winprob_series(const std::vector<Event>& match,
                                                const TokenModel& m, int k,
                                                std::int64_t n_sims, std::uint64_t seed,
                                                std::int64_t max_events, int threads) {
  std::vector<OutcomeDistribution> out;
  out.reserve(match.size());
  for (std::size_t i = 0; i < match.size(); ++i) {
    const GameState state = GameState::after_event(match, i, k);
    out.push_back(
        long_term_outcomes(state, m, n_sims, derive_seed(seed, i), max_events, threads));
  }
  return out;
}

namespace {

// Shift all scores down by a base, clamped at zero. Used by the score-reset
// variant: the pre-action state re-bases to 0-0 while the action's own score
// delta survives in the post-action state.
GameState rebase_scores(GameState s, std::int16_t base_home, std::int16_t base_away) {
  const auto shift = [](std::int16_t v, std::int16_t base) {
    return static_cast<std::int16_t>(std::max(0, v - base));
  };
  s.home_score = shift(s.home_score, base_home);
  s.away_score = shift(s.away_score, base_away);
  for (Event& e : s.context) {
    e.home_score = shift(e.home_score, base_home);
    e.away_score = shift(e.away_score, base_away);
  }
  return s;
}

}  // namespace

std::vector<ActionValue> action_values(const std::vector<Event>& match, const TokenModel& m,
                                       int k, ActionValueVariant variant, int horizon,
                                       std::int64_t n_sims, std::uint64_t seed, int threads) {
  if (match.empty()) throw ConfigError("action_values needs a non-empty match");

  // State i is the position after match[i-1] (state 0 is kickoff); each
  // action's value is the difference between the two states around it.
  const std::size_t n = match.size();
  const auto state_at = [&](std::size_t i) {
    return i == 0 ? GameState::kickoff(k) : GameState::after_event(match, i - 1, k);
  };

  std::vector<ShortTermProb> st;
  std::vector<OutcomeDistribution> lt;
  if (variant == ActionValueVariant::ST10) {
    st.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      const GameState s = state_at(i);
      st[i] = s.terminated ? ShortTermProb{}
                           : short_term_prob(s, m, horizon, n_sims, derive_seed(seed, i),
                                             threads);
    }
  } else {
    lt.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      GameState s = state_at(i);
      if (variant == ActionValueVariant::LTInfZeroed) {
        s = rebase_scores(s, s.home_score, s.away_score);
      }
      lt[i] = long_term_outcomes(s, m, n_sims, derive_seed(seed, i), 4000, threads);
    }
  }

  std::vector<ActionValue> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Event& e = match[i];
    if (e.type >= kPeriodOverToken || is_na(e.is_home)) continue;
    const bool home = e.is_home == 1;

    ActionValue av;
    av.event_index = static_cast<std::int64_t>(i);
    av.variant = variant;
    if (variant == ActionValueVariant::ST10) {
      const ShortTermProb& before = st[i];
      const ShortTermProb& after = st[i + 1];
      const double scores_delta = home ? after.p_home_scores - before.p_home_scores
                                       : after.p_away_scores - before.p_away_scores;
      const double concedes_delta = home ? after.p_away_scores - before.p_away_scores
                                         : after.p_home_scores - before.p_home_scores;
      av.value = scores_delta - concedes_delta;
    } else {
      const auto expected_points = [&](const OutcomeDistribution& o) {
        return home ? 3.0 * o.p_home_win + o.p_draw : 3.0 * o.p_away_win + o.p_draw;
      };
      OutcomeDistribution after = lt[i + 1];
      if (variant == ActionValueVariant::LTInfZeroed) {
        const GameState before_state = state_at(i);
        const GameState after_state = state_at(i + 1);
        if (after_state.home_score != before_state.home_score ||
            after_state.away_score != before_state.away_score) {
          // The action changed the score: its delta must survive the reset,
          // so the post-action state re-bases against the pre-action score.
          const GameState rebased = rebase_scores(after_state, before_state.home_score,
                                                  before_state.away_score);
          after = long_term_outcomes(rebased, m, n_sims, derive_seed(seed, n + 1 + i), 4000,
                                     threads);
        }
      }
      av.value = expected_points(after) - expected_points(lt[i]);
    }
    out.push_back(av);
  }
  return out;
}

void write_matrix_csv(const std::string& path, const std::vector<double>& grid101) {
  if (grid101.size() != static_cast<std::size_t>(kGridSize) * kGridSize) {
    throw Error("matrix must be 101x101");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write matrix CSV: " + path);
  char buf[32];
  for (int r = 0; r < kGridSize; ++r) {
    std::string line;
    for (int c = 0; c < kGridSize; ++c) {
      if (c > 0) line.push_back(',');
      const double v = grid101[static_cast<std::size_t>(r) * kGridSize + c];
      if (std::isnan(v)) {
        line += "NA";
      } else {
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        line += buf;
      }
    }
    line.push_back('\n');
    out << line;
  }
}

void write_momentum_csv(const std::string& path, const std::vector<MomentumPoint>& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write momentum CSV: " + path);
  out << "eventIndex,momentum,smoothed\n";
  char buf[96];
  for (const auto& p : series) {
    std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g\n",
                  static_cast<long long>(p.event_index), p.raw, p.smoothed);
    out << buf;
  }
}

void write_winprob_csv(const std::string& path,
                       const std::vector<OutcomeDistribution>& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write winprob CSV: " + path);
  out << "eventIndex,pHomeWin,pDraw,pAwayWin,pOver25,pUnder25\n";
  char buf[160];
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& o = series[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.9g\n", i, o.p_home_win,
                  o.p_draw, o.p_away_win, o.p_over25, o.p_under25);
    out << buf;
  }
}

void write_action_values_csv(const std::string& path,
                             const std::vector<ActionValue>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write action values CSV: " + path);
  out << "eventIndex,variant,value\n";
  char buf[96];
  for (const auto& av : values) {
    const char* name = av.variant == ActionValueVariant::ST10
                           ? "st10"
                           : (av.variant == ActionValueVariant::LTInf ? "ltinf" : "ltinf0");
    std::snprintf(buf, sizeof(buf), "%lld,%s,%.9g\n",
                  static_cast<long long>(av.event_index), name, av.value);
    out << buf;
  }
}

std::string outcome_to_json(const OutcomeDistribution& o) {
  nlohmann::json j;
  j["pHomeWin"] = o.p_home_win;
  j["pDraw"] = o.p_draw;
  j["pAwayWin"] = o.p_away_win;
  j["pOver25"] = o.p_over25;
  j["pUnder25"] = o.p_under25;
  j["nSims"] = o.n_sims;
  return j.dump(2);
}

}  // namespace lem
