#include <cmath>

#include "doctest.h"
#include "tohfb/errors.hpp"
#include "tohfb/feedback.hpp"

using namespace tohfb;

TEST_CASE("condition names") {
  for (auto c : kAllConditions) CHECK(parse_condition(to_string(c)) == c);
  CHECK(to_string(Condition::SubgoalNumeric) == "subgoal_numeric");
  CHECK_THROWS_AS(parse_condition("loud"), Error);
  CHECK(shows_numeric_feedback(Condition::Numeric));
  CHECK(shows_numeric_feedback(Condition::SubgoalNumeric));
  CHECK_FALSE(shows_numeric_feedback(Condition::Optional));
  CHECK(offers_feedback_button(Condition::Optional));
  CHECK(shows_subgoal(Condition::Subgoal));
  CHECK_FALSE(shows_subgoal(Condition::NoFeedback));
}

TEST_CASE("move budget") {
  CHECK(allowed_moves(15) == 23);
  CHECK(allowed_moves(2) == 3);
  CHECK(allowed_moves(7) == 11);
  CHECK(allowed_moves(1) == 2);
  CHECK_THROWS_AS(allowed_moves(0), Error);
}

TEST_CASE("move evaluation follows the distance change") {
  const auto g = shared_graph(4);
  const auto target = TohState::parse("2222");
  const auto values = tutor_values(g, target);
  const auto d = shortest_distances(*g, target);

  // With an even disk count the smallest disk starts towards the middle peg.
  const auto good = evaluate_move(values, *g, TohState::parse("0000"), TohState::parse("1000"));
  CHECK(d[g->index_of(TohState::parse("1000"))] == 14);
  CHECK(good.delta == DeltaClass::Improving);
  CHECK(good.label == "good move +2");
  CHECK(good.h_value == 2);

  const auto bad = evaluate_move(values, *g, TohState::parse("1000"), TohState::parse("0000"));
  CHECK(bad.delta == DeltaClass::Worsening);
  CHECK(bad.label == std::string(kBadLabel));
  CHECK(bad.h_value == -2);

  // An equal-distance edge exists and is shown as a bad move.
  bool found = false;
  for (std::size_t e = 0; e < g->num_edges() && !found; ++e) {
    const std::size_t s = g->source_of(e), t = g->edge(e).next;
    if (d[s] != d[t]) continue;
    found = true;
    const auto ev = evaluate_edge(values, s, t);
    CHECK(ev.delta == DeltaClass::Neutral);
    CHECK(ev.label == std::string(kBadLabel));
    CHECK(ev.h_value == -2);
  }
  CHECK(found);
  CHECK_THROWS_AS(evaluate_move(values, *g, TohState::parse("0000"), TohState::parse("2222")), Error);
}

TEST_CASE("feedback sign is exhaustive over targets and gamma-invariant") {
  const auto g = shared_graph(4);
  for (std::size_t t = 0; t < g->num_states(); ++t) {
    const auto d = shortest_distances(*g, t);
    const auto a = feedback_signal(tutor_values(g, g->state(t), 0.5));
    const auto b = feedback_signal(tutor_values(g, g->state(t), 0.99));
    CHECK(a == b);
    for (std::size_t e = 0; e < g->num_edges(); ++e) {
      const int dd = d[g->edge(e).next] - d[g->source_of(e)];
      CHECK(a[e] == (dd < 0 ? 2.0 : -2.0));
    }
  }
}

TEST_CASE("sub-goals") {
  CHECK(subgoal_for(TohState::parse("0022"), 4).str() == "1110");
  CHECK(subgoal_for(TohState::parse("2221"), 4).str() == "2220");
  CHECK(subgoal_for(TohState::parse("01212"), 5).str() == "11110");
  try {
    subgoal_for(TohState::parse("0120"), 4);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TargetInStartTriangle);
  }
  // The sub-goal is adjacent to the triangle's entry state.
  const auto g = shared_graph(5);
  CHECK(g->find_edge(g->index_of(subgoal_for(TohState::parse("00002"), 5)),
                     g->index_of(critical_entry_state(Triangle::T2, 5))) != StateGraph::npos);
}

TEST_CASE("scores per condition") {
  ScoreInputs in;
  in.m_allowed = 23;
  in.m_used = 15;
  CHECK(score_trial(Condition::NoFeedback, in, true).total == 90);
  CHECK(score_trial(Condition::NoFeedback, in, false).total == 0);

  ScoreInputs five;
  five.m_allowed = 23;
  five.m_used = 23;
  five.m_good = 20;
  five.m_bad = 3;
  five.subgoal_reached = true;
  const auto s = score_trial(Condition::SubgoalNumeric, five, true);
  CHECK(s.base == 10);
  CHECK(s.feedback_bonus == 34);
  CHECK(s.subgoal_bonus == 5);
  CHECK(s.total == 49);
  for (auto c : kAllConditions) CHECK(score_trial(c, five, false).total == 0);

  ScoreInputs opt = in;
  opt.f_optional = 2;
  CHECK(score_trial(Condition::Optional, opt, true).optional_penalty == 2);
  CHECK(score_trial(Condition::Optional, opt, true).total == 88);
  // Components outside the condition are not scored.
  CHECK(score_trial(Condition::Numeric, opt, true).optional_penalty == 0);
  CHECK(score_trial(Condition::Subgoal, five, true).feedback_bonus == 0);

  ScoreInputs bad = in;
  bad.m_good = 10;
  bad.m_bad = 6;
  CHECK_THROWS_AS(score_trial(Condition::Numeric, bad, true), Error);
  ScoreInputs over = in;
  over.m_used = 24;
  CHECK_THROWS_AS(score_trial(Condition::NoFeedback, over, true), Error);
}

TEST_CASE("score monotonicity") {
  ScoreInputs base;
  base.m_allowed = 23;
  base.m_used = 17;
  base.m_good = 10;
  base.m_bad = 5;
  base.f_optional = 1;
  const int s0 = score_trial(Condition::SubgoalNumeric, base, true).total;
  auto more = base;
  ++more.m_used;
  CHECK(score_trial(Condition::SubgoalNumeric, more, true).total <= s0);
  auto good = base;
  ++good.m_good;
  CHECK(score_trial(Condition::SubgoalNumeric, good, true).total >= s0);
  auto pen = base;
  ++pen.f_optional;
  CHECK(score_trial(Condition::Optional, pen, true).total <= score_trial(Condition::Optional, base, true).total);
  auto sub = base;
  sub.subgoal_reached = true;
  CHECK(score_trial(Condition::Subgoal, sub, true).total >= score_trial(Condition::Subgoal, base, true).total);
}

TEST_CASE("percentage score") {
  CHECK(percentage_score(23, 15, 15, true) == 100.0);
  CHECK(percentage_score(23, 15, 15, false) == 0.0);
  CHECK(percentage_score(23, 23, 15, true) == doctest::Approx(100.0 / 9.0));
  for (int used = 15; used <= 23; ++used) {
    const double p = percentage_score(23, used, 15, true);
    CHECK(p > 0.0);
    CHECK(p <= 100.0);
    CHECK((p == 100.0) == (used == 15));
  }
  CHECK_THROWS_AS(percentage_score(10, 10, 11, true), Error);
}

TEST_CASE("maximum possible score") {
  CHECK(max_possible_score(Condition::NoFeedback, 15, 23) == 90);
  CHECK(max_possible_score(Condition::Numeric, 15, 23) == 120);
  CHECK(max_possible_score(Condition::SubgoalNumeric, 15, 23) == 125);
  CHECK(max_possible_score(Condition::Subgoal, 15, 23) == 95);
  CHECK(max_possible_score(Condition::Optional, 15, 23) == 90);
}

TEST_CASE("target sampling stays out of the start triangle and splits evenly") {
  Rng rng(99);
  int t2 = 0, t3 = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto t = sample_target(4, rng);
    const auto tri = triangle_of(t);
    CHECK(tri != Triangle::T1);
    (tri == Triangle::T2 ? t2 : t3)++;
  }
  CHECK(std::abs(t2 - 5000) < 200);
  CHECK(t2 + t3 == 10000);
}
