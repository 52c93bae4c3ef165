#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lem/codec.hpp"
#include "lem/event.hpp"

namespace lem {

// One record from a Wyscout V2 events file, before derivation.
struct RawEvent {
  std::int64_t match_id = 0;
  std::int64_t team_id = 0;
  std::string event_name;
  std::string sub_event_name;
  int period_id = 1;                               // 1 or 2
  double event_sec = 0.0;                          // seconds within the period
  std::vector<std::pair<double, double>> positions;  // (x, y) percentages
  std::vector<int> tags;
};

// Collected non-fatal ingest diagnostics.
struct IngestReport {
  std::vector<std::string> warnings;

  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

// League name from a Wyscout file name (matches_England.json -> England).
std::string league_from_filename(const std::string& path);

// Wyscout matches file -> per-match metadata. Throws ParseError on malformed
// JSON (with byte offset) and DataError when a match does not have exactly one
// home and one away side.
std::vector<MatchMeta> parse_matches(const std::string& path);

// Wyscout events file -> raw records in file order.
std::vector<RawEvent> parse_raw_events(const std::string& path);

// Canonical derivation for one match: 11-feature events with running scores,
// derived timeElapsed, and the synthetic <PERIOD_OVER>/<GAME_OVER> markers.
// `raw` must be this match's events in file order.
std::vector<Event> derive_events(std::vector<RawEvent> raw, const MatchMeta& meta,
                                 const Vocab& v, IngestReport* report = nullptr);

struct Corpus {
  std::vector<MatchMeta> metas;       // aligned with matches
  std::vector<MatchEvents> matches;
};

// Parse every matches_*.json / events_*.json pair found in the two
// directories (they may be the same directory).
Corpus ingest_directories(const std::string& events_dir, const std::string& matches_dir,
                          const Vocab& v, IngestReport* report = nullptr);

struct Split {
  std::vector<MatchEvents> train;  // France, Germany, Italy
  std::vector<MatchEvents> test;   // England, Spain
};

Split split_dataset(const std::vector<MatchEvents>& matches, IngestReport* report = nullptr);

// Canonical cache: one CSV per split, NA for undefined fields, LF endings.
void write_events_csv(const std::string& path, const std::vector<MatchEvents>& matches,
                      const Vocab& v);
std::vector<MatchEvents> read_events_csv(const std::string& path, const Vocab& v);

struct CorpusStats {
  double mean_events_per_match = 0.0;  // first-class events, boundaries excluded
  double mean_goals_per_match = 0.0;   // final homeScore + awayScore
  std::int64_t n_matches = 0;
};

CorpusStats corpus_stats(const std::vector<MatchEvents>& matches);

// (type name, count) sorted by descending count, ties by name; feeds the
// vocabulary-order report.
std::vector<std::pair<std::string, std::int64_t>> type_frequencies(
    const std::vector<MatchEvents>& matches, const Vocab& v);

}  // namespace lem
