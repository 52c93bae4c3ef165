#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lem/common.hpp"
#include "lem/event.hpp"

namespace lem {

using TokenId = std::uint16_t;

// Vocabulary layout: 0..100 numerics, 101..137 event types by descending
// training-corpus frequency, 138/139 boundary markers, 140 <NaN>.
inline constexpr int kNumericCount = 101;
inline constexpr int kTypeBase = 101;
inline constexpr int kTypeCount = 37;
inline constexpr TokenId kPeriodOverToken = 138;
inline constexpr TokenId kGameOverToken = 139;
inline constexpr TokenId kNaNToken = 140;
inline constexpr int kVocabSize = 141;

inline constexpr const char* kPeriodOverName = "<PERIOD_OVER>";
inline constexpr const char* kGameOverName = "<GAME_OVER>";

// Tokens per encoded event and per predicted event (period/minute/second are
// collapsed into timeElapsed on the prediction side).
inline constexpr int kEventTokens = 11;
inline constexpr int kPredictedTokens = 7;

inline constexpr int input_width(int k) { return kEventTokens * k + kPredictedTokens - 1; }

// Every slot is fed to the model as value / 140.
inline constexpr float kNormalization = 140.0f;

class Vocab {
 public:
  // The frozen 37-type list shipped with this repo (data/vocab_wyscout_v2.json).
  static const Vocab& builtin();

  explicit Vocab(std::vector<std::string> event_types);

  static Vocab load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_json() const;
  static Vocab from_json(std::string_view json_text);

  const std::vector<std::string>& event_types() const { return types_; }

  // Token for a 37-list type name; throws Error if unknown.
  TokenId type_token(std::string_view name) const;
  bool has_type(std::string_view name) const;

  // Name for any type or boundary token (101..139).
  const std::string& token_name(TokenId t) const;

 private:
  std::vector<std::string> types_;
  std::unordered_map<std::string, TokenId> index_;
};

enum class TokenKind { Numeric, EventType, PeriodOver, GameOver, NaN };

struct DecodedToken {
  TokenKind kind;
  int value = kNA;          // numeric tokens only
  std::string name;         // type/boundary tokens only
};

// Total on 0..140; exact inverse of encoding.
DecodedToken decode_token(TokenId t, const Vocab& v);

// [type, isGoal, isAccurate, isHome, period, minute, second, x, y, homeScore, awayScore]
std::array<TokenId, kEventTokens> encode_event(const Event& e, const Vocab& v);

using InputVector = std::vector<TokenId>;

// Flattened context (oldest -> newest) followed by the already-predicted prefix,
// right-padded with <NaN> to width 11k+6. Missing context events at match start
// are all-NaN except clock (1, 0, 0) and scores (0, 0).
InputVector build_input(std::span<const Event> context, std::span<const TokenId> prefix,
                        const Vocab& v, int k);

// Slot-wise normalized copy for the network (value / 140).
void input_to_features(const InputVector& in, float* out);

// Wyscout name normalization: lowercase, spaces -> underscores.
std::string normalize_type_name(std::string_view raw);

}  // namespace lem
