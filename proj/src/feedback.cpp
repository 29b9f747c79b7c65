#include "tohfb/feedback.hpp"

#include <algorithm>
#include <cmath>

#include "tohfb/errors.hpp"

namespace tohfb {

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::NoFeedback: return "no_feedback";
    case Condition::Numeric: return "numeric";
    case Condition::Optional: return "optional";
    case Condition::Subgoal: return "subgoal";
    case Condition::SubgoalNumeric: return "subgoal_numeric";
  }
  return "?";
}

Condition parse_condition(std::string_view name) {
  for (auto c : kAllConditions)
    if (to_string(c) == name) return c;
  fail(ErrorCode::InvalidCondition, "unknown condition '" + std::string(name) + "'");
}

bool shows_numeric_feedback(Condition c) {
  return c == Condition::Numeric || c == Condition::SubgoalNumeric;
}

bool offers_feedback_button(Condition c) { return c == Condition::Optional; }

bool shows_subgoal(Condition c) {
  return c == Condition::Subgoal || c == Condition::SubgoalNumeric;
}

std::string_view to_string(DeltaClass d) {
  switch (d) {
    case DeltaClass::Improving: return "improving";
    case DeltaClass::Neutral: return "neutral";
    case DeltaClass::Worsening: return "worsening";
  }
  return "?";
}

DeltaClass parse_delta(std::string_view name) {
  for (auto d : {DeltaClass::Improving, DeltaClass::Neutral, DeltaClass::Worsening})
    if (to_string(d) == name) return d;
  fail(ErrorCode::ParseError, "unknown delta class '" + std::string(name) + "'");
}

int allowed_moves(int m_min) {
  if (m_min < 1) fail(ErrorCode::InvalidArgument, "m_min must be at least 1");
  return (3 * m_min + 1) / 2;
}

MoveEvaluation evaluate_edge(const ValueTable& values, std::size_t from, std::size_t to) {
  const double before = values.v[from];
  const double after = values.v[to];
  const double slack = 1e-12 * std::max({1.0, std::abs(before), std::abs(after)});
  MoveEvaluation ev;
  if (after > before + slack) {
    ev.delta = DeltaClass::Improving;
  } else if (after < before - slack) {
    ev.delta = DeltaClass::Worsening;
  } else {
    ev.delta = DeltaClass::Neutral;
  }
  const bool good = ev.delta == DeltaClass::Improving;
  ev.label = std::string(good ? kGoodLabel : kBadLabel);
  ev.h_value = good ? kFeedbackMagnitude : -kFeedbackMagnitude;
  return ev;
}

MoveEvaluation evaluate_move(const ValueTable& values, const StateGraph& graph,
                             const TohState& from, const TohState& to) {
  const auto s = graph.index_of(from);
  const auto t = graph.index_of(to);
  if (graph.find_edge(s, t) == StateGraph::npos)
    fail(ErrorCode::NotAdjacent, from.str() + " and " + to.str() + " are not adjacent");
  return evaluate_edge(values, s, t);
}

std::vector<double> feedback_signal(const ValueTable& values) {
  const auto& topo = *values.topology;
  std::vector<double> h(topo.num_edges());
  for (std::size_t e = 0; e < topo.num_edges(); ++e)
    h[e] = evaluate_edge(values, topo.source[e], topo.next[e]).h_value;
  return h;
}

ValueTable tutor_values(GraphPtr graph, const TohState& target, double gamma) {
  return value_iteration(target_reward_mdp(std::move(graph), target, gamma));
}

TohState sample_target(int n, Rng& rng) {
  if (n < 1 || n > kMaxDisks) fail(ErrorCode::InvalidArgument, "disk count out of range");
  std::size_t third = 1;
  for (int i = 1; i < n; ++i) third *= 3;
  const auto u = static_cast<std::size_t>(uniform_index(rng, 2 * third));
  return TohState::from_index((1 + u / third) * third + u % third, n);
}

TohState subgoal_for(const TohState& target, int n) {
  if (target.disks() != n) fail(ErrorCode::InvalidState, "target has the wrong disk count");
  const auto tri = triangle_of(target);
  if (tri == Triangle::T1)
    fail(ErrorCode::TargetInStartTriangle, "target " + target.str() + " lies in T1");
  return critical_exit_state(tri, n);
}

ScoreBreakdown score_trial(Condition condition, const ScoreInputs& in, bool solved) {
  if (in.m_allowed < 0 || in.m_used < 0 || in.m_good < 0 || in.m_bad < 0 || in.f_optional < 0)
    fail(ErrorCode::InconsistentCounters, "counters must be non-negative");
  if (in.m_good + in.m_bad > in.m_used)
    fail(ErrorCode::InconsistentCounters, "more labelled moves than moves used");
  if (solved && in.m_used > in.m_allowed)
    fail(ErrorCode::InconsistentCounters, "a solved trial cannot exceed its move budget");

  ScoreBreakdown out;
  out.base = 10 * (in.m_allowed - in.m_used + 1);
  if (shows_numeric_feedback(condition)) out.feedback_bonus = 2 * (in.m_good - in.m_bad);
  if (offers_feedback_button(condition)) out.optional_penalty = in.f_optional;
  if (shows_subgoal(condition)) out.subgoal_bonus = in.subgoal_reached ? 5 : 0;
  out.total = solved ? out.base + out.feedback_bonus - out.optional_penalty + out.subgoal_bonus : 0;
  return out;
}

double percentage_score(int m_allowed, int m_used, int m_min, bool solved) {
  if (m_min > m_allowed) fail(ErrorCode::InvalidArgument, "m_min exceeds m_allowed");
  if (!solved) return 0.0;
  return 100.0 * static_cast<double>(m_allowed - m_used + 1) /
         static_cast<double>(m_allowed - m_min + 1);
}

int max_possible_score(Condition condition, int m_min, int m_allowed) {
  ScoreInputs in;
  in.m_allowed = m_allowed;
  in.m_used = m_min;
  in.m_good = shows_numeric_feedback(condition) ? m_min : 0;
  in.subgoal_reached = true;
  return score_trial(condition, in, true).total;
}

}  // namespace tohfb
