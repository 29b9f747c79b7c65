#pragma once
// Maximum-entropy IRL with linear state rewards: soft-Bellman likelihood of
// demonstrations, its exact gradient, L1-penalized fitting and lambda
// selection by trajectory-level cross-validation.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tohfb/mdp.hpp"
#include "tohfb/soft_solver.hpp"
#include "tohfb/toh.hpp"
#include "tohfb/trajectory.hpp"

namespace tohfb::irl {

enum class FeatureMode { AllStates, Subset8, Custom };

std::string_view to_string(FeatureMode m);
/// "all", "allstates", "subset8". Throws InvalidArgument.
FeatureMode parse_feature_mode(std::string_view name);

/// Indicator features on a list of states. r(s) = w[feature_of(s)], zero for
/// states outside the list.
struct FeatureMap {
  FeatureMode mode = FeatureMode::AllStates;
  std::vector<TohState> states;
  std::vector<int> feature_of;  // per state index, -1 when featureless

  std::size_t dim() const { return states.size(); }

  static FeatureMap all_states(const StateGraph& graph);
  static FeatureMap subset8(const StateGraph& graph);
  /// Throws InvalidArgument on duplicates or a disk-count mismatch.
  static FeatureMap custom(const StateGraph& graph, const std::vector<TohState>& states);
};

/// Rewards booked on arrival: r(e) = w[feature_of(next(e))].
std::vector<double> edge_rewards(const Topology& topo, const FeatureMap& features,
                                 std::span<const double> weights);

/// Paths as edge indices over one graph, optionally sharing a terminal target.
struct Demonstrations {
  GraphPtr graph;
  std::optional<std::size_t> target;
  std::vector<std::vector<std::uint32_t>> paths;

  std::size_t num_steps() const;

  /// Replays each record's moves on the graph. With a target, paths stop at
  /// the first arrival there. Records with a different disk count throw
  /// InvalidArgument.
  static Demonstrations from_records(GraphPtr graph, const std::vector<TrajectoryRecord>& records,
                                     const std::optional<TohState>& target);
};

/// Empirical edge and state visit counts of a subset of paths.
struct EdgeCounts {
  std::vector<double> edge;
  std::vector<double> state;
  double steps = 0.0;

  static EdgeCounts from_paths(const Demonstrations& demos, std::span<const std::size_t> which);
  static EdgeCounts all(const Demonstrations& demos);
};

/// How the +-2 feedback signal h(e) enters the agent model.
enum class FeedbackChannel {
  None,        // softmax of soft-VI Q on r = w.f
  QBias,       // softmax of Q + k h, Q from soft VI on w.f
  RewardBias,  // soft VI on r = w.f + k h
  QOnly,       // softmax of k h, no reward features
};

/// Log-likelihood of demonstrations under one channel, parameterized by
/// theta = [w..., k] (k only when the channel uses feedback; QOnly has just
/// k). Holds a warm-started solver, so one instance per thread.
class LikelihoodModel {
 public:
  LikelihoodModel(const Demonstrations& demos, FeatureMap features, double gamma,
                  FeedbackChannel channel = FeedbackChannel::None,
                  std::vector<double> feedback = {});

  std::size_t num_params() const;
  std::size_t num_weights() const { return channel_ == FeedbackChannel::QOnly ? 0 : features_.dim(); }
  bool has_gain() const { return channel_ != FeedbackChannel::None; }
  FeedbackChannel channel() const { return channel_; }
  const FeatureMap& features() const { return features_; }
  const Topology& topology() const { return *topology_; }
  std::span<const std::uint8_t> terminal() const { return terminal_; }

  /// Sum over counted steps of log P(a|s). Fills grad when non-empty.
  /// Throws NonConvergence from the soft solve.
  double evaluate(std::span<const double> theta, const EdgeCounts& counts,
                  std::span<double> grad = {});

  /// Per-edge action probabilities at theta.
  std::vector<double> policy(std::span<const double> theta);

  void reset() { solver_.reset(); }

 private:
  void scores(std::span<const double> theta);

  TopologyPtr topology_;
  std::vector<std::uint8_t> terminal_;
  FeatureMap features_;
  double gamma_;
  FeedbackChannel channel_;
  std::vector<double> h_;
  SoftBellmanSolver solver_;

  std::vector<double> reward_;
  std::vector<double> logp_;  // log policy per edge
  std::vector<double> pi_;    // policy per edge
  std::vector<double> c_;
  std::vector<double> cin_;
  std::vector<double> nu_;
};

double log_likelihood(const Demonstrations& demos, std::span<const double> weights,
                      const FeatureMap& features, double gamma = kDefaultGamma);
std::vector<double> likelihood_gradient(const Demonstrations& demos, std::span<const double> weights,
                                        const FeatureMap& features, double gamma = kDefaultGamma);

/// {0, 0.1, ..., 2}.
std::vector<double> default_lambda_grid();

struct IrlConfig {
  double gamma = kDefaultGamma;
  std::vector<double> lambdas = default_lambda_grid();
  int folds = 5;
  double step = 0.1;
  int max_iter = 5000;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct FitResult {
  std::vector<double> theta;
  double loglik = 0.0;     // unpenalized, on the fitted counts
  double objective = 0.0;  // loglik - lambda |w|_1
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // objective per accepted iterate
};

/// Maximizes logL(theta) - lambda |w|_1 by accelerated proximal gradient
/// with backtracking; k is never penalized. The objective is scaled by the
/// step count so the step size is independent of dataset size. A cap hit
/// is reported through `converged`, not thrown.
FitResult fit(LikelihoodModel& model, const EdgeCounts& counts, double lambda,
              const IrlConfig& config, std::span<const double> start = {});

/// Convenience overload for the plain reward model on all demonstrations.
FitResult fit(const Demonstrations& demos, const FeatureMap& features, double lambda,
              const IrlConfig& config);

struct IrlResult {
  std::vector<double> theta;
  double lambda = 0.0;
  std::vector<double> lambdas;
  std::vector<double> cv_mean;                // per lambda
  std::vector<std::vector<double>> cv_folds;  // per lambda, per fold
  double train_loglik = 0.0;
  std::size_t steps = 0;
  std::size_t trajectories = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
  FeatureMode mode = FeatureMode::AllStates;
  FeedbackChannel channel = FeedbackChannel::None;

  /// Reward weights (theta without the trailing gain).
  std::vector<double> weights() const;
  std::optional<double> gain() const;
};

/// Seeded shuffle of trajectory indices dealt round-robin into folds.
std::vector<int> assign_folds(std::size_t trajectories, int folds, std::uint64_t seed);

/// Mean validation logL per lambda over trajectory folds, then a refit on
/// all data at the best lambda (first maximum on ties). Folds run in
/// parallel; the lambda path within a fold is warm-started in grid order.
/// Throws TooFewTrajectories.
IrlResult cross_validate(const Demonstrations& demos, const FeatureMap& features,
                         const IrlConfig& config,
                         FeedbackChannel channel = FeedbackChannel::None,
                         const std::vector<double>& feedback = {});
IrlResult cross_validate_serial(const Demonstrations& demos, const FeatureMap& features,
                                const IrlConfig& config,
                                FeedbackChannel channel = FeedbackChannel::None,
                                const std::vector<double>& feedback = {});

/// Per-state reward scaled by max |w|; zero outside the feature set.
std::vector<double> reward_map_export(std::span<const double> weights, const FeatureMap& features,
                                      const StateGraph& graph);

void write_reward_csv(std::ostream& out, const StateGraph& graph, std::span<const double> map);
nlohmann::json to_json(const IrlResult& result, const FeatureMap& features);

}  // namespace tohfb::irl
