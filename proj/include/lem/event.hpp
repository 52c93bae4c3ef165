#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lem/common.hpp"

namespace lem {

// Canonical event: the 11 modeled features plus the derived timeElapsed.
// The type is stored as its vocabulary token (101..139, boundary tokens
// included); names only appear at file boundaries. Undefined fields hold kNA.
struct Event {
  std::int16_t type = kNA;          // token id, 101..139
  std::int16_t is_goal = kNA;       // 0/1
  std::int16_t is_accurate = kNA;   // 0/1
  std::int16_t is_home = kNA;       // 0/1
  std::int16_t period = 1;          // 1/2
  std::int16_t minute = 0;          // 0..100
  std::int16_t second = 0;          // 0..59
  std::int16_t x = kNA;             // 0..100
  std::int16_t y = kNA;             // 0..100
  std::int16_t home_score = 0;      // 0..100
  std::int16_t away_score = 0;      // 0..100
  std::int16_t time_elapsed = 0;    // 0..100, seconds since previous event

  bool operator==(const Event&) const = default;
};

struct MatchMeta {
  std::int64_t match_id = 0;
  std::int64_t home_team_id = 0;
  std::int64_t away_team_id = 0;
  std::string league;       // England | Spain | Germany | Italy | France
  std::string label;        // provider label, e.g. "Real Madrid - Barcelona, 3 - 0"
  std::string date_utc;     // provider timestamp, informational
};

struct MatchEvents {
  std::int64_t match_id = 0;
  std::string league;
  std::vector<Event> events;  // includes the two boundary events
};

}  // namespace lem
