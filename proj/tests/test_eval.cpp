#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "lem/eval.hpp"
#include "lem/sampler.hpp"

using namespace lem;

namespace {

// Every token of event i is a fixed function of event i-1 (x walks by +7,
// the rest derive from it), so a rule-following stub predicts perfectly.
constexpr int kFirstX = 5;
constexpr int kFirstTe = 2;

int next_x(int prev_x) { return (prev_x + 7) % 101; }
int next_te(int prev_x) { return (prev_x * 3 + 2) % 101; }
int next_goal(int prev_x) { return prev_x > 50 ? 1 : 0; }
int y_of(int x) { return (x + 13) % 101; }

std::vector<MatchEvents> oracle_corpus(int n_matches, int n_events) {
  const Vocab& v = Vocab::builtin();
  std::vector<MatchEvents> out;
  for (int m = 0; m < n_matches; ++m) {
    MatchEvents me;
    me.match_id = 100 + m;
    me.league = "England";
    int prev_x = -1;
    for (int i = 0; i < n_events; ++i) {
      Event e{};
      e.type = static_cast<std::int16_t>(v.type_token("simple_pass"));
      e.is_goal = static_cast<std::int16_t>(prev_x < 0 ? 0 : next_goal(prev_x));
      e.is_accurate = 1;
      e.is_home = 1;
      e.period = 1;
      e.minute = 0;
      e.second = 0;
      e.x = static_cast<std::int16_t>(prev_x < 0 ? kFirstX : next_x(prev_x));
      e.y = static_cast<std::int16_t>(y_of(e.x));
      e.home_score = 0;
      e.away_score = 0;
      e.time_elapsed = static_cast<std::int16_t>(prev_x < 0 ? kFirstTe : next_te(prev_x));
      prev_x = e.x;
      me.events.push_back(e);
    }
    out.push_back(std::move(me));
  }
  return out;
}

// Implements the same rule from the model side; k = 1.
class OracleStub : public TokenModel {
 public:
  int context_k() const override { return 1; }
  int input_width() const override { return lem::input_width(1); }
  void predict(const float* inputs, int batch, float* outputs, int /*threads*/) const override {
    for (int b = 0; b < batch; ++b) {
      const float* in = inputs + static_cast<std::size_t>(b) * input_width();
      float* row = outputs + static_cast<std::size_t>(b) * kVocabSize;
      std::fill(row, row + kVocabSize, 0.0f);
      const int pos = testing::position_from_input(in, 1);
      const auto slot = [&](int s) { return static_cast<int>(std::lround(in[s] * 140.0f)); };
      const int prev_x = slot(7) <= 100 ? slot(7) : -1;
      switch (pos) {
        case 0:
          row[Vocab::builtin().type_token("simple_pass")] = 1.0f;
          break;
        case 1:
          row[prev_x < 0 ? 0 : next_goal(prev_x)] = 1.0f;
          break;
        case 2:
        case 3:
          row[1] = 1.0f;
          break;
        case 4:
          row[prev_x < 0 ? kFirstTe : next_te(prev_x)] = 1.0f;
          break;
        case 5:
          row[prev_x < 0 ? kFirstX : next_x(prev_x)] = 1.0f;
          break;
        case 6: {
          const int own_x = slot(16);  // teacher-forced x in the prefix
          row[y_of(own_x)] = 1.0f;
          break;
        }
        default:
          break;
      }
    }
  }
};

}  // namespace

TEST_CASE("a perfect predictor scores ACC=1, F1=1, MAE=0, R2=1") {
  const auto corpus = oracle_corpus(2, 40);
  OracleStub stub;
  const MetricsReport r = evaluate(stub, corpus, 1, Vocab::builtin());

  CHECK(r.type.acc == doctest::Approx(1.0));
  CHECK(r.type.f1 == doctest::Approx(1.0));
  CHECK(r.goal.acc == doctest::Approx(1.0));
  CHECK(r.goal.f1 == doctest::Approx(1.0));
  CHECK(r.accurate.f1 == doctest::Approx(1.0));
  CHECK(r.home.acc == doctest::Approx(1.0));
  CHECK(r.time_elapsed.mae == doctest::Approx(0.0));
  CHECK(r.time_elapsed.r2 == doctest::Approx(1.0));
  CHECK(r.x.mae == doctest::Approx(0.0));
  CHECK(r.x.r2 == doctest::Approx(1.0));
  CHECK(r.y.mae == doctest::Approx(0.0));
  CHECK(r.y.r2 == doctest::Approx(1.0));
  CHECK(r.x.n == 80);
  CHECK(r.type.n == 80);

  // the median point estimate agrees on one-hot distributions
  const MetricsReport rm =
      evaluate(stub, corpus, 1, Vocab::builtin(), PointEstimate::Median);
  CHECK(rm.x.mae == doctest::Approx(0.0));
}

TEST_CASE("evaluation is deterministic and rejects an empty test set") {
  const auto corpus = testing::synthetic_corpus(2, 20, 3);
  testing::UniformStub stub(1);
  const MetricsReport a = evaluate(stub, corpus, 1, Vocab::builtin());
  const MetricsReport b = evaluate(stub, corpus, 1, Vocab::builtin());
  CHECK(a.type.acc == b.type.acc);
  CHECK(a.x.mae == b.x.mae);
  CHECK_THROWS_AS(evaluate(stub, {}, 1, Vocab::builtin()), ConfigError);
}

TEST_CASE("boundary events only contribute to the Type variable") {
  const auto corpus = testing::synthetic_corpus(1, 25, 19);
  testing::UniformStub stub(1);
  const MetricsReport r = evaluate(stub, corpus, 1, Vocab::builtin());
  CHECK(r.type.n == 52);  // 50 first-class + 2 boundary
  CHECK(r.goal.n == 50);
  CHECK(r.x.n == 50);
}

TEST_CASE("majority baseline reproduces the closed-form weighted F1") {
  const Vocab& v = Vocab::builtin();
  // 6 simple passes, 4 shots: majority accuracy a = 0.6,
  // weighted F1 = a * 2a/(1+a) = 0.45.
  MatchEvents me;
  me.match_id = 1;
  me.league = "England";
  for (int i = 0; i < 10; ++i) {
    Event e{};
    e.type = static_cast<std::int16_t>(v.type_token(i < 6 ? "simple_pass" : "shot"));
    e.is_goal = 0;
    e.is_accurate = static_cast<std::int16_t>(i < 7 ? 1 : 0);
    e.is_home = static_cast<std::int16_t>(i % 2);
    e.period = 1;
    e.minute = 0;
    e.second = 0;
    e.x = static_cast<std::int16_t>(10 * i);
    e.y = 50;
    e.home_score = 0;
    e.away_score = 0;
    e.time_elapsed = 1;
    me.events.push_back(e);
  }
  const std::vector<MatchEvents> data = {me};

  const MetricsReport bl = baseline(data, data);
  CHECK(bl.type.acc == doctest::Approx(0.6));
  CHECK(bl.type.f1 == doctest::Approx(0.6 * 2 * 0.6 / 1.6));
  CHECK(bl.accurate.acc == doctest::Approx(0.7));
  CHECK(bl.accurate.f1 > 0.0);  // majority class is the positive class here
  CHECK(bl.goal.acc == doctest::Approx(1.0));
  CHECK(bl.goal.f1 == 0.0);  // all-negative target, majority 0

  // x targets 0,10,..,90: mean 45, MAE 25, R2 exactly 0 on the fit split
  CHECK(bl.x.mae == doctest::Approx(25.0));
  CHECK(bl.x.r2 == doctest::Approx(0.0));
  // constant targets: MAE 0 and R2 0 by convention
  CHECK(bl.y.mae == doctest::Approx(0.0));
  CHECK(bl.y.r2 == doctest::Approx(0.0));
}

TEST_CASE("bench_inference reports a self-ratio of 1") {
  testing::UniformStub a(1);
  const auto table = bench_inference({{"only", &a}}, 16, 3);
  REQUIRE(table.size() == 1);
  CHECK(table[0].ratio_vs_first == doctest::Approx(1.0));
  CHECK(table[0].events_per_second > 0.0);
}
