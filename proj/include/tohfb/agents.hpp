#pragma once
// Synthetic participants. Each agent samples moves from a softmax policy
// built by one of the four feedback-integration models and is stationary
// within a trial.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "tohfb/feedback.hpp"
#include "tohfb/mdp.hpp"
#include "tohfb/random.hpp"
#include "tohfb/trajectory.hpp"

namespace tohfb::agents {

enum class AgentModel { M1, M2, M3, M4 };

inline constexpr AgentModel kAllModels[] = {AgentModel::M1, AgentModel::M2, AgentModel::M3,
                                            AgentModel::M4};

std::string_view to_string(AgentModel m);
/// "M1".."M4" (case-insensitive). Throws InvalidArgument.
AgentModel parse_model(std::string_view name);

struct AgentSpec {
  AgentModel model = AgentModel::M2;
  double k = 1.0;              // feedback gain; ignored by M1
  double target_weight = 1.0;  // reward for arriving at the trial target
  // Extra arrival rewards keyed by state string; entries whose length differs
  // from the trial's disk count are skipped.
  std::map<std::string, double> state_weights;
  double gamma = kDefaultGamma;
  std::uint64_t seed = 0;
  double request_rate = 0.5;  // chance of pressing "Get Feedback" after a move
};

/// Per-edge arrival rewards of the spec for one target.
std::vector<double> agent_rewards(const AgentSpec& spec, const StateGraph& graph,
                                  const TohState& target);

/// The agent's action distribution for one target. With `feedback` false
/// the +-2 signal is treated as absent (h = 0), which reduces M2/M3 to M1 and
/// M4 to uniform choice. The target is absorbing.
SoftPolicy agent_policy(const AgentSpec& spec, GraphPtr graph, const TohState& target,
                        bool feedback = true);

/// Whether an agent perceives feedback on this trial.
bool agent_sees_feedback(Condition condition, Phase phase);

/// Owns one random stream; policies are cached per (n, target, feedback).
class AgentSimulator {
 public:
  explicit AgentSimulator(AgentSpec spec, std::string session_id = "agent");

  /// Samples one trial from `start` until the target or the budget is hit.
  /// budget < 0 uses m_allowed of the start/target pair.
  TrajectoryRecord run_trial(Condition condition, Phase phase, int trial_index,
                             const TohState& start, const TohState& target, int budget = -1);

  TohState draw_target(int n) { return sample_target(n, rng_); }
  const AgentSpec& spec() const { return spec_; }

 private:
  const SoftPolicy& policy_for(const GraphPtr& graph, const TohState& target, bool feedback);

  AgentSpec spec_;
  std::string session_id_;
  Rng rng_;
  std::map<std::tuple<int, std::size_t, bool>, SoftPolicy> policies_;
  std::map<std::pair<int, std::size_t>, ValueTable> tutors_;
};

/// One trial from a fresh stream seeded by spec.seed.
TrajectoryRecord simulate_trial(const AgentSpec& spec, Condition condition, int n,
                                const TohState& start, const TohState& target, int budget);

struct Protocol {
  Condition condition = Condition::Numeric;
  int training_trials = 10;
  int training_disks = 4;
  int transfer_trials = 5;
  int transfer_disks = 5;
  std::optional<TohState> training_target;  // fixed target instead of random draws
};

/// Per agent: training trials then transfer trials, start on peg 0, fresh
/// target per trial. Transfer trials keep the session condition in the
/// record but behave as no-feedback. Agents run in parallel; records are
/// ordered by (agent, trial). Throws InvalidArgument for an empty cohort.
std::vector<TrajectoryRecord> simulate_cohort(const std::vector<AgentSpec>& specs,
                                              const Protocol& protocol);

}  // namespace tohfb::agents
