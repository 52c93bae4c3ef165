#include "lem/codec.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "json.hpp"

namespace lem {

namespace {

// Frozen from training-corpus frequencies, most to least frequent. The head of
// the ordering is pinned by the reference encoding (simple_pass=101,
// ground_attacking_duel=102, ground_defending_duel=103, shot=116). "other" is
// the reserved bucket for unrecognized provider labels.
const std::vector<std::string> kFrozenTypes = {
    "simple_pass",            // 101
    "ground_attacking_duel",  // 102
    "ground_defending_duel",  // 103
    "ground_loose_ball_duel", // 104
    "air_duel",               // 105
    "high_pass",              // 106
    "touch",                  // 107
    "head_pass",              // 108
    "throw_in",               // 109
    "cross",                  // 110
    "clearance",              // 111
    "launch",                 // 112
    "free_kick",              // 113
    "foul",                   // 114
    "goal_kick",              // 115
    "shot",                   // 116
    "corner",                 // 117
    "acceleration",           // 118
    "smart_pass",             // 119
    "ball_out_of_the_field",  // 120
    "offside",                // 121
    "reflexes",               // 122
    "free_kick_cross",        // 123
    "hand_pass",              // 124
    "save_attempt",           // 125
    "whistle",                // 126
    "goalkeeper_leaving_line",// 127
    "hand_foul",              // 128
    "free_kick_shot",         // 129
    "penalty",                // 130
    "violent_foul",           // 131
    "out_of_game_foul",       // 132
    "time_lost_foul",         // 133
    "protest",                // 134
    "simulation",             // 135
    "late_card_foul",         // 136
    "other",                  // 137
};

TokenId field_token(std::int16_t v) {
  if (is_na(v)) return kNaNToken;
  return static_cast<TokenId>(v);
}

}  // namespace

const Vocab& Vocab::builtin() {
  static const Vocab v{kFrozenTypes};
  return v;
}

Vocab::Vocab(std::vector<std::string> event_types) : types_(std::move(event_types)) {
  if (static_cast<int>(types_.size()) != kTypeCount) {
    throw Error("vocabulary must list exactly 37 event types, got " +
                std::to_string(types_.size()));
  }
  for (std::size_t i = 0; i < types_.size(); ++i) {
    auto [it, inserted] = index_.emplace(types_[i], static_cast<TokenId>(kTypeBase + i));
    if (!inserted) throw Error("duplicate event type in vocabulary: " + types_[i]);
  }
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

Vocab Vocab::from_json(std::string_view json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw ParseError("vocabulary file is not valid JSON");
  if (!j.contains("event_types") || !j["event_types"].is_array()) {
    throw ParseError("vocabulary JSON missing \"event_types\" array");
  }
  std::vector<std::string> types;
  for (const auto& t : j["event_types"]) types.push_back(t.get<std::string>());
  return Vocab(std::move(types));
}

std::string Vocab::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["event_types"] = types_;
  return j.dump(2) + "\n";
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary file: " + path);
  out << to_json();
}

TokenId Vocab::type_token(std::string_view name) const {
  if (name == kPeriodOverName) return kPeriodOverToken;
  if (name == kGameOverName) return kGameOverToken;
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error("event type not in vocabulary: " + std::string(name));
  return it->second;
}

bool Vocab::has_type(std::string_view name) const {
  return index_.contains(std::string(name));
}

const std::string& Vocab::token_name(TokenId t) const {
  static const std::string period_over = kPeriodOverName;
  static const std::string game_over = kGameOverName;
  if (t == kPeriodOverToken) return period_over;
  if (t == kGameOverToken) return game_over;
  if (t >= kTypeBase && t < kTypeBase + kTypeCount) return types_[t - kTypeBase];
  throw Error("token " + std::to_string(t) + " has no name");
}

DecodedToken decode_token(TokenId t, const Vocab& v) {
  if (t >= kVocabSize) throw Error("token id out of range: " + std::to_string(t));
  if (t < kNumericCount) return {TokenKind::Numeric, static_cast<int>(t), {}};
  if (t == kNaNToken) return {TokenKind::NaN, kNA, {}};
  if (t == kPeriodOverToken) return {TokenKind::PeriodOver, kNA, kPeriodOverName};
  if (t == kGameOverToken) return {TokenKind::GameOver, kNA, kGameOverName};
  return {TokenKind::EventType, kNA, v.token_name(t)};
}

std::array<TokenId, kEventTokens> encode_event(const Event& e, const Vocab&) {
  if (e.type < kTypeBase || e.type > kGameOverToken) {
    throw Error("cannot encode event: type token " + std::to_string(e.type) +
                " outside 101..139");
  }
  return {static_cast<TokenId>(e.type), field_token(e.is_goal),  field_token(e.is_accurate),
          field_token(e.is_home),       field_token(e.period),   field_token(e.minute),
          field_token(e.second),        field_token(e.x),        field_token(e.y),
          field_token(e.home_score),    field_token(e.away_score)};
}

InputVector build_input(std::span<const Event> context, std::span<const TokenId> prefix,
                        const Vocab& v, int k) {
  if (k < 1) throw Error("context length k must be >= 1");
  if (static_cast<int>(prefix.size()) > kPredictedTokens - 1) {
    throw Error("prefix longer than 6 tokens");
  }
  if (static_cast<int>(context.size()) > k) {
    context = context.subspan(context.size() - static_cast<std::size_t>(k));
  }

  InputVector slots(static_cast<std::size_t>(input_width(k)), kNaNToken);
  std::size_t pos = 0;

  // Pre-match pseudo-events: all NaN except clock (1, 0, 0) and scores (0, 0).
  const int missing = k - static_cast<int>(context.size());
  for (int i = 0; i < missing; ++i) {
    slots[pos + 4] = 1;
    slots[pos + 5] = 0;
    slots[pos + 6] = 0;
    slots[pos + 9] = 0;
    slots[pos + 10] = 0;
    pos += kEventTokens;
  }
  for (const Event& e : context) {
    const auto enc = encode_event(e, v);
    std::copy(enc.begin(), enc.end(), slots.begin() + static_cast<std::ptrdiff_t>(pos));
    pos += kEventTokens;
  }
  std::copy(prefix.begin(), prefix.end(), slots.begin() + static_cast<std::ptrdiff_t>(pos));
  return slots;
}

void input_to_features(const InputVector& in, float* out) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = static_cast<float>(in[i]) / kNormalization;
  }
}

std::string normalize_type_name(std::string_view raw) {
  std::string s;
  s.reserve(raw.size());
  for (char c : raw) {
    if (c == ' ') {
      s.push_back('_');
    } else {
      s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return s;
}

}  // namespace lem
