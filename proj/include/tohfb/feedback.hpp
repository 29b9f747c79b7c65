#pragma once
// The five experiment conditions: move evaluation against the tutor's value
// function, sub-goals and the scoring rules.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tohfb/mdp.hpp"
#include "tohfb/random.hpp"
#include "tohfb/toh.hpp"

namespace tohfb {

enum class Condition { NoFeedback, Numeric, Optional, Subgoal, SubgoalNumeric };

inline constexpr Condition kAllConditions[] = {Condition::NoFeedback, Condition::Numeric,
                                               Condition::Optional, Condition::Subgoal,
                                               Condition::SubgoalNumeric};

/// "no_feedback", "numeric", "optional", "subgoal", "subgoal_numeric".
std::string_view to_string(Condition c);
/// Throws InvalidCondition.
Condition parse_condition(std::string_view name);

bool shows_numeric_feedback(Condition c);  // labels after every move
bool offers_feedback_button(Condition c);
bool shows_subgoal(Condition c);

enum class DeltaClass { Improving, Neutral, Worsening };

std::string_view to_string(DeltaClass d);
DeltaClass parse_delta(std::string_view name);

inline constexpr std::string_view kGoodLabel = "good move +2";
inline constexpr std::string_view kBadLabel = "bad move -2";
inline constexpr int kFeedbackMagnitude = 2;

struct MoveEvaluation {
  DeltaClass delta = DeltaClass::Neutral;
  std::string label;
  int h_value = 0;  // +2 or -2
};

/// ceil(1.5 * m_min). Throws InvalidArgument for m_min < 1.
int allowed_moves(int m_min);

/// Classifies s -> s' by the change of the tutor value. Neutral moves show
/// the bad label and carry -2. Throws NotAdjacent.
MoveEvaluation evaluate_move(const ValueTable& values, const StateGraph& graph,
                             const TohState& from, const TohState& to);
MoveEvaluation evaluate_edge(const ValueTable& values, std::size_t from, std::size_t to);

/// +-2 feedback on every edge of the graph for one value table.
std::vector<double> feedback_signal(const ValueTable& values);

/// Tutor value table for one target (hard value iteration, arrival reward).
ValueTable tutor_values(GraphPtr graph, const TohState& target, double gamma = kDefaultGamma);

/// Uniform draw over the states of T2 and T3.
TohState sample_target(int n, Rng& rng);

/// The T1 critical state preceding the target's triangle ("1110"/"2220" for
/// n = 4). Throws TargetInStartTriangle.
TohState subgoal_for(const TohState& target, int n);

struct ScoreInputs {
  int m_allowed = 0;
  int m_used = 0;
  int m_good = 0;
  int m_bad = 0;
  int f_optional = 0;
  bool subgoal_reached = false;
};

struct ScoreBreakdown {
  int base = 0;
  int feedback_bonus = 0;
  int optional_penalty = 0;
  int subgoal_bonus = 0;
  int total = 0;

  bool operator==(const ScoreBreakdown&) const = default;
};

/// Per-condition score; an unsolved trial scores 0 in total. Throws
/// InconsistentCounters on negative counts, m_good + m_bad > m_used, or a
/// solved trial that exceeded its budget.
ScoreBreakdown score_trial(Condition condition, const ScoreInputs& inputs, bool solved);

/// 100 (m_allowed - m_used + 1) / (m_allowed - m_min + 1), 0 when unsolved.
double percentage_score(int m_allowed, int m_used, int m_min, bool solved);

/// Score of an optimal solve with every bonus the condition offers.
int max_possible_score(Condition condition, int m_min, int m_allowed);

}  // namespace tohfb
