#pragma once
// Tabular MDPs over deterministic transition graphs: exact value iteration
// for the tutor, soft (log-sum-exp) value iteration and softmax policies for
// maximum-entropy agents.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "tohfb/kernels.hpp"
#include "tohfb/toh.hpp"

namespace tohfb {

inline constexpr double kDefaultGamma = 0.95;
inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr int kDefaultIterationCap = 100000;

/// Deterministic transition structure: one edge per action.
struct Topology {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> next;
  std::vector<std::uint32_t> source;
  GraphPtr graph;  // null for hand-built topologies

  std::size_t num_states() const { return offsets.size() - 1; }
  std::size_t num_edges() const { return next.size(); }
  std::size_t degree(std::size_t s) const { return offsets[s + 1] - offsets[s]; }

  static std::shared_ptr<const Topology> from_graph(GraphPtr graph);
  /// successors[s] lists next states of each action; self-loops allowed.
  static std::shared_ptr<const Topology> from_adjacency(
      const std::vector<std::vector<std::uint32_t>>& successors);
};

using TopologyPtr = std::shared_ptr<const Topology>;

class TabularMdp {
 public:
  /// Throws InvalidArgument unless 0 <= gamma < 1.
  TabularMdp(TopologyPtr topology, double gamma);

  const Topology& topology() const { return *topology_; }
  const TopologyPtr& topology_ptr() const { return topology_; }
  double gamma() const { return gamma_; }

  std::span<const double> reward() const { return reward_; }
  std::span<double> reward() { return reward_; }
  std::span<const std::uint8_t> terminal() const { return terminal_; }
  void set_terminal(std::size_t state, bool value = true);
  bool is_terminal(std::size_t state) const { return terminal_[state] != 0; }

  kernels::SweepProblem problem(std::span<const double> reward) const;

 private:
  TopologyPtr topology_;
  double gamma_;
  std::vector<double> reward_;
  std::vector<std::uint8_t> terminal_;
};

/// Reward 1 on every transition that arrives at `target`; target absorbing.
/// Throws UnknownState.
TabularMdp target_reward_mdp(GraphPtr graph, const TohState& target, double gamma = kDefaultGamma);

/// Per-state V and per-edge Q. For hard solutions V(s) = max_a Q(s,a); for
/// soft ones V(s) = log sum_a exp Q(s,a).
struct ValueTable {
  TopologyPtr topology;
  std::vector<std::uint8_t> terminal;
  std::vector<double> v;
  std::vector<double> q;
  int iterations = 0;
  double residual = 0.0;
  bool soft = false;

  double value(std::size_t s) const { return v[s]; }
  std::span<const double> q_row(std::size_t s) const {
    return {q.data() + topology->offsets[s], topology->degree(s)};
  }
};

/// Exact value iteration. Q(s,a) = gamma * (r(s,a) + V(s')) with terminal
/// continuation 0, so rewards are booked on arrival and discounted to the
/// decision step. A terminal state reports its best arrival reward, hence for
/// target_reward_mdp V(s) = gamma^d(s) and V(target) = 1.
/// Throws NonConvergence past the cap.
ValueTable value_iteration(const TabularMdp& mdp, double tol = kDefaultTolerance,
                           int max_iter = kDefaultIterationCap);

/// Soft value iteration on a caller-supplied per-edge reward:
/// Q(s,a) = r(s,a) + gamma * V(s'), V(s) = log sum_a exp Q(s,a), V = 0 on
/// terminal states. Throws NonConvergence past the cap.
ValueTable soft_value_iteration(const TabularMdp& mdp, std::span<const double> reward,
                                double tol = kDefaultTolerance,
                                int max_iter = kDefaultIterationCap);

/// Same fixed point, forced through the serial or OpenMP sweep.
ValueTable soft_value_iteration_serial(const TabularMdp& mdp, std::span<const double> reward,
                                       double tol = kDefaultTolerance,
                                       int max_iter = kDefaultIterationCap);
ValueTable soft_value_iteration_parallel(const TabularMdp& mdp, std::span<const double> reward,
                                         double tol = kDefaultTolerance,
                                         int max_iter = kDefaultIterationCap);

/// Per-edge action probabilities; terminal rows are empty (all zero).
struct SoftPolicy {
  TopologyPtr topology;
  std::vector<double> prob;

  std::span<const double> row(std::size_t s) const {
    return {prob.data() + topology->offsets[s], topology->degree(s)};
  }
};

/// P(a|s) = exp(Q(s,a) - log sum_b exp Q(s,b)). Works for any Q table: it
/// renormalizes per row, which is the identity for soft solutions.
SoftPolicy softmax_policy(const ValueTable& values);

/// Softmax over an arbitrary per-edge score table.
SoftPolicy softmax_from_scores(TopologyPtr topology, std::span<const std::uint8_t> terminal,
                               std::span<const double> scores);

/// Greedy rollout from `start`, taking the first maximizing action. Stops at a
/// terminal state or after max_steps. Returns visited state indices.
std::vector<std::size_t> greedy_rollout(const ValueTable& values, std::size_t start,
                                        std::size_t max_steps);

/// Indices of edges achieving the row maximum within `rel_tol`.
std::vector<std::size_t> argmax_edges(std::span<const double> row, double rel_tol = 1e-12);

void write_value_csv(std::ostream& out, const StateGraph& graph, const ValueTable& values);
void write_q_csv(std::ostream& out, const StateGraph& graph, const ValueTable& values);

}  // namespace tohfb
