#pragma once
// Comparison of the four feedback-integration models on six target groups
// (sub-triangles of T2 and T3), scored by AIC and BIC.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tohfb/agents.hpp"
#include "tohfb/irl.hpp"
#include "tohfb/trajectory.hpp"

namespace tohfb::models {

using agents::AgentModel;

struct Group {
  std::string name;  // e.g. "T2/1": triangle, then the second-largest disk's peg
  Triangle triangle = Triangle::T2;
  int sub = 0;       // s[n-2]
  int key = 0;       // 3 * s[n-1] + s[n-2], as StateGraph::sub_triangle
  TohState target;   // designated target; feedback is scored against it
  std::vector<TrajectoryRecord> records;  // truncated copies
  irl::Demonstrations demos;

  std::size_t observations() const { return records.size(); }
};

struct GroupPartition {
  GraphPtr graph;
  std::vector<Group> groups;  // always six, ordered T2/0..T2/2, T3/0..T3/2
};

/// The corner p..p s2 s3 of the sub-triangle closest (BFS) to the
/// triangle's critical entry state; ties go to the smaller state string.
TohState designated_target(const StateGraph& graph, Triangle triangle, int sub);

/// Groups records by their target's sub-triangle and cuts each record at
/// the first post-state inside that sub-triangle. Records that never enter
/// are kept whole. The designated target is not absorbing in the fits: it
/// stands in for targets the participants kept walking towards, so the
/// models must not believe the episode ends there. Throws TargetInT1 and InvalidArgument on a disk-count
/// mismatch.
GroupPartition partition_groups(const std::vector<TrajectoryRecord>& records, int n = 4);

/// +-2 on every edge against the group's designated target.
std::vector<double> feedback_table(const GraphPtr& graph, const Group& group,
                                   double gamma = kDefaultGamma);

struct Criteria {
  double aic = 0.0;
  double bic = 0.0;
  double aic_norm = 0.0;
  double bic_norm = 0.0;
};

/// AIC = 2p - 2 logL, BIC = p ln(o) - 2 logL, normalized by o.
Criteria information_criteria(int p, std::size_t o, double loglik);

struct ModelFit {
  AgentModel model = AgentModel::M1;
  irl::FeatureMode featmap = irl::FeatureMode::Subset8;
  int p = 0;
  std::size_t o = 0;
  std::vector<double> weights;
  std::optional<double> k;
  double lambda = 0.0;
  double loglik = 0.0;
  bool converged = false;
  Criteria criteria;
};

irl::FeedbackChannel channel_of(AgentModel model);
int parameter_count(AgentModel model, std::size_t features);

/// Fits one model to one group with lambda by cross-validation (M4 has no
/// penalized weights and skips it). Throws TooFewTrajectories.
ModelFit fit_model(const GroupPartition& partition, const Group& group, AgentModel model,
                   const irl::FeatureMap& features, const irl::IrlConfig& config);

/// Grid used by the model comparison; coarser than the IRL default.
std::vector<double> default_model_lambdas();

struct ReportRow {
  std::string group;
  AgentModel model = AgentModel::M1;
  irl::FeatureMode featmap = irl::FeatureMode::Subset8;
  int p = 0;
  std::size_t o = 0;
  double loglik = 0.0;
  double aic_norm = 0.0;
  double bic_norm = 0.0;
  bool aic_winner = false;
  bool bic_winner = false;
  std::optional<double> k;
  double lambda = 0.0;
};

struct Report {
  std::vector<ReportRow> rows;
  std::vector<std::string> warnings;  // groups excluded for lack of data

  /// Winner per group for one feature mode and criterion.
  std::vector<std::pair<std::string, AgentModel>> winners(irl::FeatureMode featmap, bool bic) const;
};

/// Every group x feature mode x model, fitted concurrently and merged in
/// that order. Groups with fewer trajectories than folds are excluded with
/// a warning.
Report model_selection_report(const GroupPartition& partition,
                              const std::vector<irl::FeatureMode>& featmaps,
                              const irl::IrlConfig& config);

/// Columns: group, model, featmap, p, o, logL, AIC_norm, BIC_norm,
/// aic_winner, bic_winner.
void write_report_csv(std::ostream& out, const Report& report);
void write_report_table(std::ostream& out, const Report& report);

}  // namespace tohfb::models
