#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "lem/ingest.hpp"

using namespace lem;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lem_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RawEvent raw(std::int64_t team, int period, double sec, const char* sub, double x, double y,
             std::vector<int> tags = {}) {
  RawEvent r;
  r.match_id = 1;
  r.team_id = team;
  r.event_name = "Event";
  r.sub_event_name = sub;
  r.period_id = period;
  r.event_sec = sec;
  r.positions = {{x, y}};
  r.tags = std::move(tags);
  return r;
}

MatchMeta meta_fixture() {
  MatchMeta m;
  m.match_id = 1;
  m.home_team_id = 10;
  m.away_team_id = 20;
  m.league = "France";
  return m;
}

}  // namespace

TEST_CASE("derive_events reproduces the reference shot row") {
  const Vocab& v = Vocab::builtin();
  std::vector<RawEvent> rs = {
      raw(20, 1, 100.0, "Shot", 85, 40, {101, 1801}),
      raw(20, 1, 200.0, "Shot", 90, 50, {101, 1801}),
      raw(20, 2, 134.2, "Shot", 87, 43, {101, 1801}),
  };
  const auto events = derive_events(rs, meta_fixture(), v);

  // 3 shots + <PERIOD_OVER> + <GAME_OVER>
  REQUIRE(events.size() == 5);
  const Event& shot = events[3];
  CHECK(shot.type == v.type_token("shot"));
  CHECK(shot.is_goal == 1);
  CHECK(shot.is_accurate == 1);
  CHECK(shot.is_home == 0);
  CHECK(shot.period == 2);
  CHECK(shot.minute == 47);
  CHECK(shot.second == 14);
  CHECK(shot.x == 87);
  CHECK(shot.y == 43);
  CHECK(shot.home_score == 0);
  CHECK(shot.away_score == 3);  // the scoring row reflects its own goal
  CHECK(shot.time_elapsed == 0);  // first event of the period
}

TEST_CASE("time elapsed: zero at period start, clipped delta elsewhere") {
  const Vocab& v = Vocab::builtin();
  std::vector<RawEvent> rs = {
      raw(10, 1, 11.0, "Simple pass", 50, 50),
      raw(10, 1, 12.0, "Simple pass", 52, 50),
      raw(10, 1, 500.0, "Simple pass", 54, 50),
  };
  const auto events = derive_events(rs, meta_fixture(), v);
  CHECK(events[0].time_elapsed == 0);
  CHECK(events[1].time_elapsed == 1);
  CHECK(events[2].time_elapsed == 100);  // 488s gap clips at 100
}

TEST_CASE("boundary events: one per half, ordered, NaN payload") {
  const Vocab& v = Vocab::builtin();
  std::vector<RawEvent> rs = {
      raw(10, 1, 10.0, "Simple pass", 50, 50),
      raw(20, 2, 5.0, "Simple pass", 60, 40),
  };
  const auto events = derive_events(rs, meta_fixture(), v);
  REQUIRE(events.size() == 4);
  const Event& po = events[1];
  const Event& go = events[3];
  CHECK(po.type == kPeriodOverToken);
  CHECK(go.type == kGameOverToken);
  CHECK(po.period == 1);
  CHECK(po.minute == 0);
  CHECK(po.second == 10);
  CHECK(go.period == 2);
  CHECK(is_na(po.is_goal));
  CHECK(is_na(po.is_home));
  CHECK(is_na(po.x));
  CHECK(is_na(go.y));
}

TEST_CASE("own goal credits the opposing side; isGoal stays 0") {
  const Vocab& v = Vocab::builtin();
  std::vector<RawEvent> rs = {
      raw(10, 1, 5.0, "Clearance", 10, 10, {102}),
      raw(20, 2, 5.0, "Clearance", 10, 10, {102}),
  };
  const auto events = derive_events(rs, meta_fixture(), v);
  CHECK(events[0].is_goal == 0);
  CHECK(events[0].home_score == 0);
  CHECK(events[0].away_score == 1);  // home own goal
  CHECK(events[2].home_score == 1);  // away own goal
  CHECK(events[2].away_score == 1);
}

TEST_CASE("unknown type maps to 'other' with a warning; bad periods are dropped") {
  const Vocab& v = Vocab::builtin();
  IngestReport report;
  std::vector<RawEvent> rs = {
      raw(10, 1, 5.0, "Mystery ball", 50, 50),
      raw(10, 3, 6.0, "Simple pass", 50, 50),
      raw(10, 1, 7.0, "Simple pass", 50, 50),
  };
  const auto events = derive_events(rs, meta_fixture(), v, &report);
  REQUIRE(events.size() == 4);  // 2 kept + 2 boundaries
  CHECK(events[0].type == v.type_token("other"));
  CHECK(report.warnings.size() == 2);
}

TEST_CASE("empty subEventName falls back to the event name") {
  const Vocab& v = Vocab::builtin();
  std::vector<RawEvent> rs = {raw(10, 1, 5.0, "", 50, 50)};
  rs[0].event_name = "Offside";
  const auto events = derive_events(rs, meta_fixture(), v);
  CHECK(events[0].type == v.type_token("offside"));
}

TEST_CASE("minute clips at 100 with a saturated clock") {
  const Vocab& v = Vocab::builtin();
  // 58 minutes into the second half = minute 103 before clipping.
  std::vector<RawEvent> rs = {raw(10, 2, 3500.0, "Simple pass", 50, 50)};
  const auto events = derive_events(rs, meta_fixture(), v);
  CHECK(events[0].minute == 100);
  CHECK(events[0].second == 59);
}

TEST_CASE("wyscout fixture ingests with intact invariants") {
  const fs::path dir = temp_dir("ingest_fixture");
  testing::FixtureOptions opts;
  opts.matches_per_league = 2;
  opts.events_per_half = 50;
  testing::write_wyscout_fixture(dir.string(), opts);

  IngestReport report;
  const Corpus corpus = ingest_directories(dir.string(), dir.string(), Vocab::builtin(), &report);
  REQUIRE(corpus.matches.size() == 10);

  for (const auto& m : corpus.matches) {
    const auto& ev = m.events;
    REQUIRE(ev.size() == 102);  // 2x50 + 2 boundaries

    int period_over = 0, game_over = 0;
    std::int16_t hs = 0, as = 0;
    long clock = -1;
    std::int64_t home_goals = 0, away_goals = 0, home_own = 0, away_own = 0;
    for (const Event& e : ev) {
      // score monotonicity
      CHECK(e.home_score >= hs);
      CHECK(e.away_score >= as);
      hs = e.home_score;
      as = e.away_score;
      // clock monotonicity
      const long c = (static_cast<long>(e.period) << 20) + e.minute * 60L + e.second;
      CHECK(c >= clock);
      clock = c;
      if (e.period == 2 && e.type < kPeriodOverToken) CHECK(e.minute >= 45);
      if (e.type == kPeriodOverToken) ++period_over;
      if (e.type == kGameOverToken) ++game_over;
      if (e.is_goal == 1 && e.is_home == 1) ++home_goals;
      if (e.is_goal == 1 && e.is_home == 0) ++away_goals;
    }
    CHECK(period_over == 1);
    CHECK(game_over == 1);
    CHECK(ev.back().type == kGameOverToken);

    // goal-count consistency, own goals credited to the opposing side
    home_own = ev.back().away_score - away_goals;
    away_own = ev.back().home_score - home_goals;
    CHECK(home_own >= 0);
    CHECK(away_own >= 0);
    CHECK(ev.back().home_score == home_goals + away_own);
    CHECK(ev.back().away_score == away_goals + home_own);
  }
}

TEST_CASE("split respects the league partition") {
  const fs::path dir = temp_dir("ingest_split");
  testing::FixtureOptions opts;
  opts.matches_per_league = 2;
  opts.events_per_half = 10;
  testing::write_wyscout_fixture(dir.string(), opts);
  const Corpus corpus = ingest_directories(dir.string(), dir.string(), Vocab::builtin());

  const Split split = split_dataset(corpus.matches);
  CHECK(split.train.size() == 6);  // France, Germany, Italy
  CHECK(split.test.size() == 4);   // England, Spain
  CHECK(split.train.size() + split.test.size() == corpus.matches.size());
  for (const auto& m : split.train) {
    CHECK((m.league == "France" || m.league == "Germany" || m.league == "Italy"));
  }

  SUBCASE("unknown league is a config error") {
    auto broken = corpus.matches;
    broken[0].league = "Atlantis";
    CHECK_THROWS_AS(split_dataset(broken), ConfigError);
  }

  SUBCASE("england-only corpus leaves the train split empty, with a warning") {
    std::vector<MatchEvents> england;
    for (const auto& m : corpus.matches) {
      if (m.league == "England") england.push_back(m);
    }
    IngestReport report;
    const Split s = split_dataset(england, &report);
    CHECK(s.train.empty());
    CHECK(!report.warnings.empty());
  }
}

TEST_CASE("parse_matches validates sides and names parse failures") {
  const fs::path dir = temp_dir("ingest_matches");

  {
    std::ofstream out(dir / "matches_England.json");
    out << R"([{"wyId": 5, "label": "A - B", "teamsData": {
      "1": {"side": "home", "teamId": 1},
      "2": {"side": "home", "teamId": 2}}}])";
  }
  CHECK_THROWS_AS(parse_matches((dir / "matches_England.json").string()), DataError);

  {
    std::ofstream out(dir / "matches_Spain.json");
    out << "[{broken";
  }
  CHECK_THROWS_WITH_AS(parse_matches((dir / "matches_Spain.json").string()),
                       doctest::Contains("byte"), ParseError);

  {
    std::ofstream out(dir / "matches_Italy.json");
    out << "[]";
  }
  CHECK(parse_matches((dir / "matches_Italy.json").string()).empty());
}

TEST_CASE("canonical CSV round-trips and is byte-stable") {
  const fs::path dir = temp_dir("ingest_csv");
  const auto corpus = testing::synthetic_corpus(3, 25, 9);

  const std::string p1 = (dir / "a.csv").string();
  const std::string p2 = (dir / "b.csv").string();
  write_events_csv(p1, corpus, Vocab::builtin());
  write_events_csv(p2, corpus, Vocab::builtin());

  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  CHECK(b1.find("\r") == std::string::npos);

  const auto loaded = read_events_csv(p1, Vocab::builtin());
  REQUIRE(loaded.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(loaded[i].match_id == corpus[i].match_id);
    CHECK(loaded[i].league == corpus[i].league);
    REQUIRE(loaded[i].events.size() == corpus[i].events.size());
    CHECK(loaded[i].events == corpus[i].events);
  }
}

TEST_CASE("corpus stats count first-class events and final goals") {
  const auto corpus = testing::synthetic_corpus(4, 30, 11);
  const CorpusStats stats = corpus_stats(corpus);
  CHECK(stats.n_matches == 4);
  CHECK(stats.mean_events_per_match == doctest::Approx(60.0));
  double goals = 0;
  for (const auto& m : corpus) {
    goals += m.events.back().home_score + m.events.back().away_score;
  }
  CHECK(stats.mean_goals_per_match == doctest::Approx(goals / 4.0));
}

TEST_CASE("type frequencies sort by descending count") {
  const auto corpus = testing::synthetic_corpus(4, 40, 13);
  const auto freqs = type_frequencies(corpus, Vocab::builtin());
  REQUIRE(freqs.size() == kTypeCount);
  for (std::size_t i = 1; i < freqs.size(); ++i) {
    CHECK(freqs[i - 1].second >= freqs[i].second);
  }
  CHECK(freqs[0].first == "simple_pass");
}
