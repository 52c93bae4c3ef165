#include "lem/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "json.hpp"

namespace lem {

GameState GameState::kickoff(int k) {
  GameState s;
  s.k = k;
  return s;
}

GameState GameState::after_event(const std::vector<Event>& match, std::size_t upto, int k) {
  if (upto >= match.size()) throw Error("event index out of range");
  GameState s;
  s.k = k;
  const std::size_t begin = (upto + 1 > static_cast<std::size_t>(k)) ? upto + 1 - k : 0;
  s.context.assign(match.begin() + static_cast<std::ptrdiff_t>(begin),
                   match.begin() + static_cast<std::ptrdiff_t>(upto + 1));
  const Event& e = match[upto];
  s.period = e.period;
  s.minute = e.minute;
  s.second = e.second;
  s.home_score = e.home_score;
  s.away_score = e.away_score;
  s.terminated = e.type == kGameOverToken;
  s.event_count = static_cast<std::int64_t>(upto) + 1;
  // A <PERIOD_OVER> already consumed means play resumes at the half reset.
  if (e.type == kPeriodOverToken && e.period == 1) {
    s.period = 2;
    s.minute = 45;
    s.second = 0;
  }
  return s;
}

void GameState::push_context(const Event& e) {
  if (static_cast<int>(context.size()) == k) {
    context.erase(context.begin());
  }
  context.push_back(e);
}

namespace {

Event make_boundary(const GameState& s, TokenId token) {
  Event b{};
  b.type = static_cast<std::int16_t>(token);
  b.period = s.period;
  b.minute = s.minute;
  b.second = s.second;
  b.home_score = s.home_score;
  b.away_score = s.away_score;
  b.time_elapsed = 0;
  return b;
}

// Deterministic exceptions: clock advances by timeElapsed, scores by isGoal.
void apply_event(GameState& s, Event& e) {
  const long total = static_cast<long>(s.minute) * 60 + s.second + e.time_elapsed;
  long minute = total / 60;
  long second = total % 60;
  if (minute > 100) {
    minute = 100;
    second = 59;
  }
  s.minute = static_cast<std::int16_t>(minute);
  s.second = static_cast<std::int16_t>(second);
  if (e.is_goal == 1) {
    if (e.is_home == 1) {
      s.home_score = static_cast<std::int16_t>(std::min(100, s.home_score + 1));
    } else {
      s.away_score = static_cast<std::int16_t>(std::min(100, s.away_score + 1));
    }
  }
  e.period = s.period;
  e.minute = s.minute;
  e.second = s.second;
  e.home_score = s.home_score;
  e.away_score = s.away_score;
}

Event finalize_tokens(GameState& state, const std::array<TokenId, kPredictedTokens>& tok,
                      StepDiagnostics* diag) {
  const TokenId type = tok[0];
  if (type == kPeriodOverToken) {
    Event b = make_boundary(state, kPeriodOverToken);
    if (state.period == 1) {
      state.period = 2;
      state.minute = 45;
      state.second = 0;
    } else if (diag != nullptr) {
      diag->late_period_over += 1;
    }
    state.push_context(b);
    state.event_count += 1;
    return b;
  }
  if (type == kGameOverToken) {
    Event b = make_boundary(state, kGameOverToken);
    if (state.period == 1 && diag != nullptr) diag->premature_game_over += 1;
    state.terminated = true;
    state.push_context(b);
    state.event_count += 1;
    return b;
  }

  Event e{};
  e.type = static_cast<std::int16_t>(type);
  e.is_goal = static_cast<std::int16_t>(tok[1]);
  e.is_accurate = static_cast<std::int16_t>(tok[2]);
  e.is_home = static_cast<std::int16_t>(tok[3]);
  e.time_elapsed = static_cast<std::int16_t>(tok[4]);
  e.x = static_cast<std::int16_t>(tok[5]);
  e.y = static_cast<std::int16_t>(tok[6]);
  apply_event(state, e);
  state.push_context(e);
  state.event_count += 1;
  return e;
}

}  // namespace

Event step(GameState& state, const TokenModel& m, RngStream& rng, StepDiagnostics* diag) {
  if (state.terminated) throw Error("step on a terminated game state");
  const Vocab& v = Vocab::builtin();  // token layout only; names irrelevant here
  const int k = state.k;

  std::array<TokenId, kPredictedTokens> tok{};
  SamplerDiagnostics* sdiag = diag != nullptr ? &diag->sampler : nullptr;
  for (int p = 0; p < kPredictedTokens; ++p) {
    const std::span<const TokenId> prefix(tok.data(), static_cast<std::size_t>(p));
    const InputVector in = build_input(state.context, prefix, v, k);
    const ProbVector probs = m.predict_one(in);
    tok[static_cast<std::size_t>(p)] = sample_masked(probs, position_mask(p), rng, sdiag);
    if (p == 0 && tok[0] >= kPeriodOverToken) break;
  }
  return finalize_tokens(state, tok, diag);
}

Rollout rollout(GameState start, const TokenModel& m, RngStream rng, std::int64_t max_events,
                std::int64_t stream_id) {
  if (max_events < 1) throw Error("max_events must be >= 1");
  Rollout r;
  r.stream_id = stream_id;
  std::int64_t generated = 0;
  while (!start.terminated && generated < max_events) {
    r.events.push_back(step(start, m, rng, &r.diag));
    ++generated;
  }
  r.truncated = !start.terminated;
  r.n_events = generated;
  r.final_home = start.home_score;
  r.final_away = start.away_score;
  return r;
}

std::vector<Rollout> batch_rollout(const GameState& start, const TokenModel& m, std::int64_t n,
                                   std::uint64_t seed, const BatchOptions& opts) {
  if (n < 1) throw Error("rollout count must be >= 1");
  if (opts.max_events < 1) throw Error("max_events must be >= 1");
  const Vocab& v = Vocab::builtin();
  const int k = start.k;
  const int width = input_width(k);

  struct Lane {
    GameState state;
    RngStream rng;
    std::array<TokenId, kPredictedTokens> tok{};
    std::int64_t generated = 0;
  };

  std::vector<Lane> lanes;
  lanes.reserve(static_cast<std::size_t>(n));
  std::vector<Rollout> results(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    lanes.push_back(Lane{start, RngStream(seed, static_cast<std::uint64_t>(i)), {}, 0});
    results[static_cast<std::size_t>(i)].stream_id = i;
  }

  std::vector<std::int64_t> active;
  active.reserve(static_cast<std::size_t>(n));
  if (!start.terminated) {
    for (std::int64_t i = 0; i < n; ++i) active.push_back(i);
  }

  std::vector<float> inputs;
  std::vector<float> probs;
  std::vector<std::int64_t> rows;

  while (!active.empty()) {
    rows = active;
    for (int p = 0; p < kPredictedTokens && !rows.empty(); ++p) {
      inputs.resize(rows.size() * static_cast<std::size_t>(width));
      parallel_for(static_cast<std::int64_t>(rows.size()), opts.threads,
                   [&](std::int64_t lo, std::int64_t hi) {
                     for (std::int64_t r = lo; r < hi; ++r) {
                       Lane& lane = lanes[static_cast<std::size_t>(rows[static_cast<std::size_t>(r)])];
                       const std::span<const TokenId> prefix(lane.tok.data(),
                                                             static_cast<std::size_t>(p));
                       const InputVector in = build_input(lane.state.context, prefix, v, k);
                       input_to_features(in, inputs.data() + r * width);
                     }
                   });
      probs.resize(rows.size() * kVocabSize);
      m.predict(inputs.data(), static_cast<int>(rows.size()), probs.data(), opts.threads);

      std::vector<std::int64_t> next_rows;
      next_rows.reserve(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        Lane& lane = lanes[static_cast<std::size_t>(rows[r])];
        ProbVector pv(probs.begin() + static_cast<std::ptrdiff_t>(r * kVocabSize),
                      probs.begin() + static_cast<std::ptrdiff_t>((r + 1) * kVocabSize));
        auto& rd = results[static_cast<std::size_t>(rows[r])].diag;
        lane.tok[static_cast<std::size_t>(p)] =
            sample_masked(pv, position_mask(p), lane.rng, &rd.sampler);
        if (p == 0 && lane.tok[0] >= kPeriodOverToken) {
          // Boundary event: finish this lane's event now, skip positions 1-6.
          Event e = finalize_tokens(lane.state, lane.tok, &rd);
          lane.generated += 1;
          if (opts.keep_events) results[static_cast<std::size_t>(rows[r])].events.push_back(e);
        } else {
          next_rows.push_back(rows[r]);
        }
      }
      if (p == 0) {
        rows = std::move(next_rows);
      }
    }

    for (std::int64_t idx : rows) {
      Lane& lane = lanes[static_cast<std::size_t>(idx)];
      auto& res = results[static_cast<std::size_t>(idx)];
      Event e = finalize_tokens(lane.state, lane.tok, &res.diag);
      lane.generated += 1;
      if (opts.keep_events) res.events.push_back(e);
    }

    std::vector<std::int64_t> still;
    still.reserve(active.size());
    for (std::int64_t idx : active) {
      Lane& lane = lanes[static_cast<std::size_t>(idx)];
      if (!lane.state.terminated && lane.generated < opts.max_events) {
        still.push_back(idx);
      }
    }
    active = std::move(still);
  }

  for (std::int64_t i = 0; i < n; ++i) {
    auto& res = results[static_cast<std::size_t>(i)];
    const Lane& lane = lanes[static_cast<std::size_t>(i)];
    res.truncated = !lane.state.terminated;
    res.n_events = lane.generated;
    res.final_home = lane.state.home_score;
    res.final_away = lane.state.away_score;
  }
  return results;
}

namespace {

void append_json_field(std::string& out, std::int16_t v) {
  if (is_na(v)) {
    out += "null";
  } else {
    out += std::to_string(v);
  }
}

}  // namespace

void write_rollouts_jsonl(const std::string& path, const std::vector<Rollout>& rollouts,
                          const Vocab& v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write rollouts: " + path);
  std::string line;
  for (const auto& r : rollouts) {
    line.clear();
    line += "{\"streamId\":";
    line += std::to_string(r.stream_id);
    line += ",\"truncated\":";
    line += r.truncated ? "true" : "false";
    line += ",\"finalScore\":[";
    line += std::to_string(r.final_home);
    line += ',';
    line += std::to_string(r.final_away);
    line += "],\"events\":[";
    for (std::size_t i = 0; i < r.events.size(); ++i) {
      const Event& e = r.events[i];
      if (i > 0) line += ',';
      line += "[\"";
      line += v.token_name(static_cast<TokenId>(e.type));
      line += "\",";
      append_json_field(line, e.is_goal);
      line += ',';
      append_json_field(line, e.is_accurate);
      line += ',';
      append_json_field(line, e.is_home);
      line += ',';
      append_json_field(line, e.period);
      line += ',';
      append_json_field(line, e.minute);
      line += ',';
      append_json_field(line, e.second);
      line += ',';
      append_json_field(line, e.x);
      line += ',';
      append_json_field(line, e.y);
      line += ',';
      append_json_field(line, e.home_score);
      line += ',';
      append_json_field(line, e.away_score);
      line += ']';
    }
    line += "]}\n";
    out << line;
  }
  if (!out) throw IoError("short write to rollouts file: " + path);
}

namespace {

std::int16_t json_field(const nlohmann::json& j, const char* key, std::int16_t fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  return static_cast<std::int16_t>(j[key].get<int>());
}

Event event_from_json(const nlohmann::json& j, const Vocab& v) {
  Event e{};
  if (!j.contains("eventType") || !j["eventType"].is_string()) {
    throw ParseError("event object missing \"eventType\"");
  }
  e.type = static_cast<std::int16_t>(v.type_token(j["eventType"].get<std::string>()));
  e.is_goal = json_field(j, "isGoal", kNA);
  e.is_accurate = json_field(j, "isAccurate", kNA);
  e.is_home = json_field(j, "isHome", kNA);
  e.period = json_field(j, "period", 1);
  e.minute = json_field(j, "minute", 0);
  e.second = json_field(j, "second", 0);
  e.x = json_field(j, "x", kNA);
  e.y = json_field(j, "y", kNA);
  e.home_score = json_field(j, "homeScore", 0);
  e.away_score = json_field(j, "awayScore", 0);
  e.time_elapsed = json_field(j, "timeElapsed", 0);
  return e;
}

nlohmann::json parse_json_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed JSON in " + path + " at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
}

}  // namespace

std::vector<Event> load_context_json(const std::string& path, const Vocab& v) {
  const nlohmann::json doc = parse_json_or_throw(path);
  if (!doc.is_array()) throw ParseError("context file must be a JSON array: " + path);
  std::vector<Event> out;
  for (const auto& je : doc) out.push_back(event_from_json(je, v));
  return out;
}

GameState load_state_json(const std::string& path, int k, const Vocab& v) {
  const nlohmann::json doc = parse_json_or_throw(path);
  if (!doc.is_object()) throw ParseError("state file must be a JSON object: " + path);
  GameState s = GameState::kickoff(k);
  if (doc.contains("context")) {
    for (const auto& je : doc["context"]) {
      s.push_context(event_from_json(je, v));
    }
  }
  s.period = json_field(doc, "period", s.context.empty() ? std::int16_t{1}
                                                         : s.context.back().period);
  s.minute = json_field(doc, "minute", s.context.empty() ? std::int16_t{0}
                                                         : s.context.back().minute);
  s.second = json_field(doc, "second", s.context.empty() ? std::int16_t{0}
                                                         : s.context.back().second);
  s.home_score = json_field(doc, "homeScore",
                            s.context.empty() ? std::int16_t{0} : s.context.back().home_score);
  s.away_score = json_field(doc, "awayScore",
                            s.context.empty() ? std::int16_t{0} : s.context.back().away_score);
  return s;
}

ThroughputReport measure_throughput(const TokenModel& m, std::int64_t n_rollouts,
                                    std::uint64_t seed, const BatchOptions& opts) {
  BatchOptions o = opts;
  o.keep_events = false;
  const auto t0 = std::chrono::steady_clock::now();
  GameState start = GameState::kickoff(m.context_k());
  auto rollouts = batch_rollout(start, m, n_rollouts, seed, o);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ThroughputReport rep;
  for (const auto& r : rollouts) rep.events += r.n_events;
  rep.seconds = secs;
  rep.events_per_second = secs > 0 ? static_cast<double>(rep.events) / secs : 0.0;
  return rep;
}

}  // namespace lem
