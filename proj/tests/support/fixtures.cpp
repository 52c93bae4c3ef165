#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "lem/codec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lem::testing {

namespace {

struct TypeWeight {
  const char* name;
  int weight;
};

// Rough per-match mix; shots land near 4% of events.
constexpr TypeWeight kTypeTable[] = {
    {"simple_pass", 80},    {"ground_attacking_duel", 20}, {"ground_defending_duel", 20},
    {"ground_loose_ball_duel", 10}, {"air_duel", 8},       {"high_pass", 10},
    {"touch", 8},           {"head_pass", 6},              {"throw_in", 6},
    {"cross", 4},           {"clearance", 4},              {"launch", 4},
    {"free_kick", 4},       {"foul", 4},                   {"goal_kick", 3},
    {"shot", 8},            {"corner", 2},                 {"acceleration", 2},
    {"smart_pass", 2},      {"offside", 1},
};

const char* pick_type(RngStream& rng) {
  int total = 0;
  for (const auto& t : kTypeTable) total += t.weight;
  int r = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(total));
  for (const auto& t : kTypeTable) {
    r -= t.weight;
    if (r < 0) return t.name;
  }
  return kTypeTable[0].name;
}

int uniform_int(RngStream& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng.next_u64() %
                               static_cast<std::uint64_t>(hi - lo + 1));
}

double goal_probability(int x) {
  if (x >= 85) return 0.35;
  if (x >= 70) return 0.12;
  return 0.03;
}

// One first-class generated action of the shared synthetic process.
struct Action {
  std::string type;
  bool home;
  bool goal;
  bool own_goal;
  bool accurate;
  int x;
  int y;
  double event_sec;  // within the period
};

struct ProcessState {
  bool home = true;
  int x = 50;
  int y = 50;
  double sec = 0.0;
};

Action next_action(ProcessState& st, RngStream& rng) {
  Action a;
  const bool flip = rng.next_double() < 0.35;
  if (flip) {
    st.home = !st.home;
    st.x = std::clamp(100 - st.x + uniform_int(rng, -4, 4), 0, 100);
    st.y = std::clamp(100 - st.y + uniform_int(rng, -5, 5), 0, 100);
  } else {
    st.x = std::clamp(st.x + uniform_int(rng, -8, 8), 0, 100);
    st.y = std::clamp(st.y + uniform_int(rng, -10, 10), 0, 100);
  }
  st.sec += 1.0 + static_cast<double>(rng.next_u64() % 50) / 10.0;

  a.type = pick_type(rng);
  a.home = st.home;
  a.x = st.x;
  a.y = st.y;
  a.event_sec = st.sec;
  a.goal = false;
  a.own_goal = false;
  if (a.type == "shot") {
    a.goal = rng.next_double() < goal_probability(st.x);
    a.accurate = a.goal || rng.next_double() < 0.4;
  } else {
    a.accurate = rng.next_double() < 0.75;
    a.own_goal = a.type == "clearance" && rng.next_double() < 0.01;
  }
  return a;
}

std::string wyscout_label(const std::string& normalized) {
  std::string s = normalized;
  std::replace(s.begin(), s.end(), '_', ' ');
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

}  // namespace

void write_wyscout_fixture(const std::string& dir, const FixtureOptions& opts) {
  fs::create_directories(dir);
  std::int64_t next_match_id = 1000;
  bool unknown_emitted = false;

  for (const auto& league : opts.leagues) {
    json matches = json::array();
    json events = json::array();
    for (int mi = 0; mi < opts.matches_per_league; ++mi) {
      const std::int64_t match_id = next_match_id++;
      const std::int64_t home_id = match_id * 10 + 1;
      const std::int64_t away_id = match_id * 10 + 2;

      json teams_data;
      teams_data[std::to_string(home_id)] = {{"side", "home"}, {"teamId", home_id}};
      teams_data[std::to_string(away_id)] = {{"side", "away"}, {"teamId", away_id}};
      matches.push_back({{"wyId", match_id},
                         {"label", "Home FC - Away United, fixture"},
                         {"dateutc", "2017-10-01 14:00:00"},
                         {"teamsData", teams_data}});

      RngStream rng(opts.seed, static_cast<std::uint64_t>(match_id));
      for (int period = 1; period <= 2; ++period) {
        ProcessState st;
        st.home = period == 1;
        for (int i = 0; i < opts.events_per_half; ++i) {
          const Action a = next_action(st, rng);
          json je;
          je["matchId"] = match_id;
          je["teamId"] = a.home ? home_id : away_id;
          je["matchPeriod"] = period == 1 ? "1H" : "2H";
          je["eventSec"] = a.event_sec;
          if (a.type == "offside") {
            je["eventName"] = "Offside";
            je["subEventName"] = "";
          } else if (opts.include_unknown_type && !unknown_emitted && a.type == "launch") {
            je["eventName"] = "Pass";
            je["subEventName"] = "Mystery ball";
            unknown_emitted = true;
          } else {
            je["eventName"] = "Event";
            je["subEventName"] = wyscout_label(a.type);
          }
          json tags = json::array();
          if (a.goal) tags.push_back({{"id", 101}});
          if (a.own_goal) tags.push_back({{"id", 102}});
          if (a.accurate) tags.push_back({{"id", 1801}});
          je["tags"] = tags;
          je["positions"] = json::array(
              {{{"x", a.x}, {"y", a.y}}, {{"x", std::min(100, a.x + 3)}, {"y", a.y}}});
          events.push_back(std::move(je));
        }
      }
    }
    std::ofstream(fs::path(dir) / ("matches_" + league + ".json")) << matches.dump();
    std::ofstream(fs::path(dir) / ("events_" + league + ".json")) << events.dump();
  }
}

std::vector<MatchEvents> synthetic_corpus(int n_matches, int events_per_half,
                                          std::uint64_t seed) {
  const Vocab& v = Vocab::builtin();
  std::vector<MatchEvents> out;
  out.reserve(static_cast<std::size_t>(n_matches));

  for (int mi = 0; mi < n_matches; ++mi) {
    MatchEvents me;
    me.match_id = 5000 + mi;
    me.league = "France";
    RngStream rng(seed, static_cast<std::uint64_t>(mi));

    std::int16_t hs = 0, as = 0;
    Event last{};
    for (int period = 1; period <= 2; ++period) {
      ProcessState st;
      st.home = period == 1;
      double prev_sec = 0.0;
      for (int i = 0; i < events_per_half; ++i) {
        const Action a = next_action(st, rng);
        Event e{};
        e.type = static_cast<std::int16_t>(v.type_token(a.type));
        e.is_goal = a.goal ? 1 : 0;
        e.is_accurate = a.accurate ? 1 : 0;
        e.is_home = a.home ? 1 : 0;
        const long total = static_cast<long>(a.event_sec);
        long minute = total / 60 + 45L * (period - 1);
        long second = total % 60;
        if (minute > 100) {
          minute = 100;
          second = 59;
        }
        e.period = static_cast<std::int16_t>(period);
        e.minute = static_cast<std::int16_t>(minute);
        e.second = static_cast<std::int16_t>(second);
        e.x = static_cast<std::int16_t>(a.x);
        e.y = static_cast<std::int16_t>(a.y);
        if (a.goal) {
          if (a.home) {
            hs = static_cast<std::int16_t>(std::min(100, hs + 1));
          } else {
            as = static_cast<std::int16_t>(std::min(100, as + 1));
          }
        }
        e.home_score = hs;
        e.away_score = as;
        e.time_elapsed = static_cast<std::int16_t>(
            std::clamp(std::lround(i == 0 ? 0.0 : a.event_sec - prev_sec), 0L, 100L));
        prev_sec = a.event_sec;
        me.events.push_back(e);
        last = e;
      }
      Event b{};
      b.type = static_cast<std::int16_t>(period == 1 ? kPeriodOverToken : kGameOverToken);
      b.period = last.period;
      b.minute = last.minute;
      b.second = last.second;
      b.home_score = hs;
      b.away_score = as;
      b.time_elapsed = 0;
      me.events.push_back(b);
    }
    out.push_back(std::move(me));
  }
  return out;
}

int position_from_input(const float* input, int k) {
  const int base = kEventTokens * k;
  int filled = 0;
  for (int q = 0; q < kPredictedTokens - 1; ++q) {
    if (input[base + q] != 1.0f) {
      filled = q + 1;
    }
  }
  return filled;
}

void UniformStub::predict(const float* /*inputs*/, int batch, float* outputs,
                          int /*threads*/) const {
  std::fill(outputs, outputs + static_cast<std::size_t>(batch) * kVocabSize, 0.5f);
}

void FixedTokenStub::predict(const float* inputs, int batch, float* outputs,
                             int /*threads*/) const {
  for (int b = 0; b < batch; ++b) {
    float* row = outputs + static_cast<std::size_t>(b) * kVocabSize;
    std::fill(row, row + kVocabSize, 0.0f);
    const int pos = position_from_input(inputs + static_cast<std::size_t>(b) * input_width(), k_);
    row[tokens_[static_cast<std::size_t>(pos)]] = 1.0f;
  }
}

void RepeatCoordinateStub::predict(const float* inputs, int batch, float* outputs,
                                   int /*threads*/) const {
  const int width = input_width();
  for (int b = 0; b < batch; ++b) {
    const float* in = inputs + static_cast<std::size_t>(b) * width;
    float* row = outputs + static_cast<std::size_t>(b) * kVocabSize;
    std::fill(row, row + kVocabSize, 0.0f);
    const int pos = position_from_input(in, 1);
    const auto slot_value = [&](int slot) {
      return static_cast<int>(std::lround(in[slot] * kNormalization));
    };
    switch (pos) {
      case 0: {
        const TokenId pass = Vocab::builtin().type_token("simple_pass");
        row[pass] = static_cast<float>(1.0 - p_over_);
        row[kGameOverToken] = static_cast<float>(p_over_);
        break;
      }
      case 1:
        row[0] = 1.0f;  // never a goal
        break;
      case 2:
        row[1] = 1.0f;
        break;
      case 3: {
        const int home = slot_value(3);
        if (home == 0 || home == 1) {
          row[home] = 1.0f;  // keep possession with the same side
        } else {
          row[0] = row[1] = 0.5f;
        }
        break;
      }
      case 4:
        row[1] = 1.0f;  // one second per event
        break;
      case 5:
      case 6: {
        const int coord = slot_value(pos == 5 ? 7 : 8);
        if (coord >= 0 && coord <= 100) {
          row[coord] = 1.0f;
        } else {
          for (int t = 0; t <= 100; ++t) row[t] = 1.0f;
        }
        break;
      }
      default:
        break;
    }
  }
}

void NoGoalStub::predict(const float* inputs, int batch, float* outputs,
                         int /*threads*/) const {
  const int width = input_width();
  std::fill(outputs, outputs + static_cast<std::size_t>(batch) * kVocabSize, 0.5f);
  for (int b = 0; b < batch; ++b) {
    const int pos = position_from_input(inputs + static_cast<std::size_t>(b) * width, k_);
    if (pos == 1) {
      outputs[static_cast<std::size_t>(b) * kVocabSize + 1] = 0.0f;
    }
  }
}

}  // namespace lem::testing
