#include "lem/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lem {

namespace {

constexpr int kGoalTag = 101;
constexpr int kOwnGoalTag = 102;
constexpr int kAccurateTag = 1801;

const std::set<std::string> kTrainLeagues = {"France", "Germany", "Italy"};
const std::set<std::string> kTestLeagues = {"England", "Spain"};

json parse_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON in " + path + " at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
}

std::int16_t clamp_i16(long v, long lo, long hi) {
  return static_cast<std::int16_t>(std::clamp(v, lo, hi));
}

// Saturate the whole clock when the minute cap binds, so (minute, second)
// stays monotone deep into injury time.
void set_clock(Event& e, int period_id, double event_sec) {
  if (event_sec < 0) event_sec = 0;
  const long total = static_cast<long>(event_sec);
  long minute = total / 60 + 45L * (period_id - 1);
  long second = total % 60;
  if (minute > 100) {
    minute = 100;
    second = 59;
  }
  e.period = static_cast<std::int16_t>(period_id);
  e.minute = static_cast<std::int16_t>(minute);
  e.second = static_cast<std::int16_t>(second);
}

int map_period(const json& je) {
  if (je.contains("matchPeriod")) {
    const std::string p = je["matchPeriod"].get<std::string>();
    if (p == "1H") return 1;
    if (p == "2H") return 2;
    return 0;  // extra time / shootout, absent from this league format
  }
  if (je.contains("periodId")) {
    const int p = je["periodId"].get<int>();
    return (p == 1 || p == 2) ? p : 0;
  }
  return 0;
}

}  // namespace

std::string league_from_filename(const std::string& path) {
  std::string stem = fs::path(path).stem().string();
  const auto pos = stem.find_last_of('_');
  if (pos == std::string::npos || pos + 1 >= stem.size()) {
    throw ConfigError("cannot derive league from file name: " + path);
  }
  return stem.substr(pos + 1);
}

std::vector<MatchMeta> parse_matches(const std::string& path) {
  const json doc = parse_json_file(path);
  if (!doc.is_array()) throw ParseError("matches file is not a JSON array: " + path);
  const std::string league = league_from_filename(path);

  std::vector<MatchMeta> out;
  out.reserve(doc.size());
  for (const auto& jm : doc) {
    MatchMeta m;
    m.match_id = jm.at("wyId").get<std::int64_t>();
    m.league = league;
    m.label = jm.value("label", "");
    m.date_utc = jm.value("dateutc", "");

    int homes = 0, aways = 0;
    for (const auto& [key, side] : jm.at("teamsData").items()) {
      const std::string s = side.value("side", "");
      const std::int64_t team = side.contains("teamId")
                                    ? side["teamId"].get<std::int64_t>()
                                    : std::stoll(key);
      if (s == "home") {
        m.home_team_id = team;
        ++homes;
      } else if (s == "away") {
        m.away_team_id = team;
        ++aways;
      }
    }
    if (homes != 1 || aways != 1) {
      throw DataError("match " + std::to_string(m.match_id) +
                      " does not have exactly one home and one away side");
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<RawEvent> parse_raw_events(const std::string& path) {
  const json doc = parse_json_file(path);
  if (!doc.is_array()) throw ParseError("events file is not a JSON array: " + path);

  std::vector<RawEvent> out;
  out.reserve(doc.size());
  for (const auto& je : doc) {
    RawEvent r;
    r.match_id = je.at("matchId").get<std::int64_t>();
    r.team_id = je.at("teamId").get<std::int64_t>();
    r.event_name = je.value("eventName", "");
    if (je.contains("subEventName") && je["subEventName"].is_string()) {
      r.sub_event_name = je["subEventName"].get<std::string>();
    }
    r.period_id = map_period(je);
    r.event_sec = je.at("eventSec").get<double>();
    if (je.contains("positions")) {
      for (const auto& jp : je["positions"]) {
        r.positions.emplace_back(jp.value("x", 0.0), jp.value("y", 0.0));
      }
    }
    if (je.contains("tags")) {
      for (const auto& jt : je["tags"]) {
        if (jt.contains("id")) r.tags.push_back(jt["id"].get<int>());
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Event> derive_events(std::vector<RawEvent> raw, const MatchMeta& meta,
                                 const Vocab& v, IngestReport* report) {
  auto warn = [&](std::string msg) {
    if (report != nullptr) report->warn(std::move(msg));
  };

  // Drop periods outside {1,2}, then order by (period, eventSec), file order on ties.
  std::erase_if(raw, [&](const RawEvent& r) {
    if (r.period_id == 1 || r.period_id == 2) return false;
    warn("match " + std::to_string(meta.match_id) + ": dropped event outside periods 1-2");
    return true;
  });
  std::stable_sort(raw.begin(), raw.end(), [](const RawEvent& a, const RawEvent& b) {
    if (a.period_id != b.period_id) return a.period_id < b.period_id;
    return a.event_sec < b.event_sec;
  });

  std::vector<Event> out;
  out.reserve(raw.size() + 2);
  std::int16_t home_score = 0;
  std::int16_t away_score = 0;
  int current_period = 1;
  bool period_has_events = false;
  double prev_sec = 0.0;
  Event last{};
  last.period = 1;

  auto close_period = [&](TokenId boundary) {
    Event b{};
    b.type = static_cast<std::int16_t>(boundary);
    b.period = out.empty() ? static_cast<std::int16_t>(current_period) : last.period;
    b.minute = out.empty() ? static_cast<std::int16_t>(45 * (current_period - 1)) : last.minute;
    b.second = out.empty() ? std::int16_t{0} : last.second;
    b.home_score = home_score;
    b.away_score = away_score;
    b.time_elapsed = 0;
    out.push_back(b);
    last = b;
  };

  for (const RawEvent& r : raw) {
    if (r.period_id != current_period) {
      close_period(kPeriodOverToken);
      current_period = r.period_id;
      period_has_events = false;
    }

    Event e{};
    std::string name = normalize_type_name(r.sub_event_name);
    if (name.empty()) name = normalize_type_name(r.event_name);
    if (!v.has_type(name)) {
      warn("match " + std::to_string(meta.match_id) + ": unknown event type '" + name +
           "' mapped to 'other'");
      name = "other";
    }
    e.type = static_cast<std::int16_t>(v.type_token(name));

    bool goal = false, own_goal = false, accurate = false;
    for (int tag : r.tags) {
      if (tag == kGoalTag) goal = true;
      if (tag == kOwnGoalTag) own_goal = true;
      if (tag == kAccurateTag) accurate = true;
    }
    const bool home_side = r.team_id == meta.home_team_id;
    e.is_goal = goal ? 1 : 0;
    e.is_accurate = accurate ? 1 : 0;
    e.is_home = home_side ? 1 : 0;

    set_clock(e, r.period_id, r.event_sec);

    if (r.positions.empty()) {
      warn("match " + std::to_string(meta.match_id) + ": event without positions");
      e.x = 0;
      e.y = 0;
    } else {
      e.x = clamp_i16(std::lround(r.positions.front().first), 0, 100);
      e.y = clamp_i16(std::lround(r.positions.front().second), 0, 100);
    }

    // The scoring row already reflects its own goal.
    if (goal) {
      if (home_side) {
        home_score = clamp_i16(home_score + 1L, 0, 100);
      } else {
        away_score = clamp_i16(away_score + 1L, 0, 100);
      }
    }
    if (own_goal) {
      if (home_side) {
        away_score = clamp_i16(away_score + 1L, 0, 100);
      } else {
        home_score = clamp_i16(home_score + 1L, 0, 100);
      }
    }
    e.home_score = home_score;
    e.away_score = away_score;

    if (period_has_events) {
      e.time_elapsed = clamp_i16(std::lround(std::max(0.0, r.event_sec - prev_sec)), 0, 100);
    } else {
      e.time_elapsed = 0;
    }
    prev_sec = r.event_sec;
    period_has_events = true;

    out.push_back(e);
    last = e;
  }

  if (current_period == 1) {
    // Match with no second-half events: close the first half, then place the
    // terminal marker at the half reset.
    close_period(kPeriodOverToken);
    last.period = 2;
    last.minute = 45;
    last.second = 0;
  }
  close_period(kGameOverToken);

  return out;
}

Corpus ingest_directories(const std::string& events_dir, const std::string& matches_dir,
                          const Vocab& v, IngestReport* report) {
  std::vector<std::string> match_files;
  for (const auto& entry : fs::directory_iterator(matches_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("matches_", 0) == 0 && entry.path().extension() == ".json") {
      match_files.push_back(entry.path().string());
    }
  }
  std::sort(match_files.begin(), match_files.end());
  if (match_files.empty()) {
    throw ConfigError("no matches_*.json files found in " + matches_dir);
  }

  Corpus corpus;
  for (const std::string& mf : match_files) {
    const std::string league = league_from_filename(mf);
    const std::string ef =
        (fs::path(events_dir) / ("events_" + league + ".json")).string();
    if (!fs::exists(ef)) {
      throw ConfigError("missing events file for league " + league + ": " + ef);
    }

    auto metas = parse_matches(mf);
    std::unordered_map<std::int64_t, const MatchMeta*> by_id;
    for (const auto& m : metas) by_id[m.match_id] = &m;

    // Group per match, preserving file order of both matches and events.
    auto raw = parse_raw_events(ef);
    std::vector<std::int64_t> order;
    std::unordered_map<std::int64_t, std::vector<RawEvent>> grouped;
    for (auto& r : raw) {
      auto [it, inserted] = grouped.try_emplace(r.match_id);
      if (inserted) order.push_back(r.match_id);
      it->second.push_back(std::move(r));
    }

    for (std::int64_t match_id : order) {
      auto it = by_id.find(match_id);
      if (it == by_id.end()) {
        throw DataError("events reference match " + std::to_string(match_id) +
                        " absent from " + mf);
      }
      MatchEvents me;
      me.match_id = match_id;
      me.league = league;
      me.events = derive_events(std::move(grouped[match_id]), *it->second, v, report);
      corpus.matches.push_back(std::move(me));
      corpus.metas.push_back(*it->second);
    }
    for (const auto& m : metas) {
      if (!grouped.contains(m.match_id) && report != nullptr) {
        report->warn("match " + std::to_string(m.match_id) + " has no events; skipped");
      }
    }
  }
  return corpus;
}

Split split_dataset(const std::vector<MatchEvents>& matches, IngestReport* report) {
  Split s;
  for (const auto& m : matches) {
    if (kTrainLeagues.contains(m.league)) {
      s.train.push_back(m);
    } else if (kTestLeagues.contains(m.league)) {
      s.test.push_back(m);
    } else {
      throw ConfigError("unknown league label: " + m.league);
    }
  }
  if (s.train.empty() && report != nullptr) {
    report->warn("train split is empty (no France/Germany/Italy matches)");
  }
  return s;
}

namespace {

void append_field(std::string& line, std::int16_t v) {
  line.push_back(',');
  if (is_na(v)) {
    line += "NA";
  } else {
    line += std::to_string(v);
  }
}

std::int16_t parse_field(const std::string& s, const std::string& path) {
  if (s == "NA") return kNA;
  try {
    return static_cast<std::int16_t>(std::stoi(s));
  } catch (const std::exception&) {
    throw ParseError("bad integer field '" + s + "' in " + path);
  }
}

}  // namespace

static const char* kCsvHeader =
    "matchId,league,eventType,isGoal,isAccurate,isHome,period,minute,second,x,y,"
    "homeScore,awayScore,timeElapsed";

void write_events_csv(const std::string& path, const std::vector<MatchEvents>& matches,
                      const Vocab& v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write CSV: " + path);
  out << kCsvHeader << '\n';
  std::string line;
  for (const auto& m : matches) {
    for (const Event& e : m.events) {
      line.clear();
      line += std::to_string(m.match_id);
      line.push_back(',');
      line += m.league;
      line.push_back(',');
      line += v.token_name(static_cast<TokenId>(e.type));
      append_field(line, e.is_goal);
      append_field(line, e.is_accurate);
      append_field(line, e.is_home);
      append_field(line, e.period);
      append_field(line, e.minute);
      append_field(line, e.second);
      append_field(line, e.x);
      append_field(line, e.y);
      append_field(line, e.home_score);
      append_field(line, e.away_score);
      append_field(line, e.time_elapsed);
      line.push_back('\n');
      out << line;
    }
  }
  if (!out) throw IoError("short write to CSV: " + path);
}

std::vector<MatchEvents> read_events_csv(const std::string& path, const Vocab& v) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV: " + path);
  if (line != kCsvHeader) throw ParseError("unexpected CSV header in " + path);

  std::vector<MatchEvents> out;
  std::vector<std::string> fields;
  fields.reserve(14);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 14) {
      throw ParseError("expected 14 CSV fields, got " + std::to_string(fields.size()) +
                       " in " + path);
    }
    const std::int64_t match_id = std::stoll(fields[0]);
    if (out.empty() || out.back().match_id != match_id) {
      MatchEvents me;
      me.match_id = match_id;
      me.league = fields[1];
      out.push_back(std::move(me));
    }
    Event e{};
    e.type = static_cast<std::int16_t>(v.type_token(fields[2]));
    e.is_goal = parse_field(fields[3], path);
    e.is_accurate = parse_field(fields[4], path);
    e.is_home = parse_field(fields[5], path);
    e.period = parse_field(fields[6], path);
    e.minute = parse_field(fields[7], path);
    e.second = parse_field(fields[8], path);
    e.x = parse_field(fields[9], path);
    e.y = parse_field(fields[10], path);
    e.home_score = parse_field(fields[11], path);
    e.away_score = parse_field(fields[12], path);
    e.time_elapsed = parse_field(fields[13], path);
    out.back().events.push_back(e);
  }
  return out;
}

CorpusStats corpus_stats(const std::vector<MatchEvents>& matches) {
  CorpusStats s;
  s.n_matches = static_cast<std::int64_t>(matches.size());
  if (matches.empty()) return s;
  std::int64_t events = 0;
  std::int64_t goals = 0;
  for (const auto& m : matches) {
    for (const Event& e : m.events) {
      if (e.type < kPeriodOverToken) ++events;
    }
    if (!m.events.empty()) {
      goals += m.events.back().home_score + m.events.back().away_score;
    }
  }
  s.mean_events_per_match = static_cast<double>(events) / static_cast<double>(matches.size());
  s.mean_goals_per_match = static_cast<double>(goals) / static_cast<double>(matches.size());
  return s;
}

std::vector<std::pair<std::string, std::int64_t>> type_frequencies(
    const std::vector<MatchEvents>& matches, const Vocab& v) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& name : v.event_types()) counts[name] = 0;
  for (const auto& m : matches) {
    for (const Event& e : m.events) {
      if (e.type >= kTypeBase && e.type < kTypeBase + kTypeCount) {
        counts[v.token_name(static_cast<TokenId>(e.type))] += 1;
      }
    }
  }
  std::vector<std::pair<std::string, std::int64_t>> out(counts.begin(), counts.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

}  // namespace lem
