#include "tohfb/models.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "tohfb/errors.hpp"

namespace tohfb::models {

namespace {

TohState corner(int n, int p, int a, int b) {
  std::vector<std::uint8_t> d(static_cast<std::size_t>(n), static_cast<std::uint8_t>(p));
  d[static_cast<std::size_t>(n - 2)] = static_cast<std::uint8_t>(a);
  d[static_cast<std::size_t>(n - 1)] = static_cast<std::uint8_t>(b);
  return TohState(std::move(d));
}

int last_digit_of(Triangle t) { return t == Triangle::T2 ? 2 : t == Triangle::T3 ? 1 : 0; }

}  // namespace

TohState designated_target(const StateGraph& graph, Triangle triangle, int sub) {
  const int n = graph.disks();
  if (n < 3) fail(ErrorCode::InvalidArgument, "sub-triangle groups need n >= 3");
  const auto dist = shortest_distances(graph, critical_entry_state(triangle, n));
  std::optional<TohState> best;
  int best_d = 0;
  for (int p = 0; p < kPegs; ++p) {
    const TohState c = corner(n, p, sub, last_digit_of(triangle));
    const int d = dist[graph.index_of(c)];
    if (!best || d < best_d || (d == best_d && c.str() < best->str())) {
      best = c;
      best_d = d;
    }
  }
  return *best;
}

GroupPartition partition_groups(const std::vector<TrajectoryRecord>& records, int n) {
  GroupPartition part;
  part.graph = shared_graph(n);
  const auto& graph = *part.graph;
  for (Triangle tri : {Triangle::T2, Triangle::T3}) {
    for (int sub = 0; sub < kPegs; ++sub) {
      Group g;
      g.triangle = tri;
      g.sub = sub;
      g.key = 3 * last_digit_of(tri) + sub;
      g.name = std::string(to_string(tri)) + "/" + std::to_string(sub);
      g.target = designated_target(graph, tri, sub);
      part.groups.push_back(std::move(g));
    }
  }
  for (const auto& r : records) {
    if (r.n != n) fail(ErrorCode::InvalidArgument, "record " + r.session_id + " has the wrong disk count");
    const auto tri = triangle_of(r.target);
    if (tri == Triangle::T1)
      fail(ErrorCode::TargetInT1, "record " + r.session_id + " targets " + r.target.str() + " in T1");
    const int key = graph.sub_triangle(graph.index_of(r.target));
    auto& g = *std::find_if(part.groups.begin(), part.groups.end(),
                            [&](const Group& x) { return x.key == key; });
    TrajectoryRecord cut = r;
    for (std::size_t i = 0; i < cut.moves.size(); ++i) {
      if (graph.sub_triangle(graph.index_of(cut.moves[i].post)) == key) {
        cut.moves.resize(i + 1);
        break;
      }
    }
    cut.m_used = static_cast<int>(cut.moves.size());
    g.records.push_back(std::move(cut));
  }
  for (auto& g : part.groups) g.demos = irl::Demonstrations::from_records(part.graph, g.records, std::nullopt);
  return part;
}

std::vector<double> feedback_table(const GraphPtr& graph, const Group& group, double gamma) {
  return feedback_signal(tutor_values(graph, group.target, gamma));
}

Criteria information_criteria(int p, std::size_t o, double loglik) {
  Criteria c;
  c.aic = 2.0 * p - 2.0 * loglik;
  c.bic = p * std::log(static_cast<double>(o)) - 2.0 * loglik;
  c.aic_norm = c.aic / static_cast<double>(o);
  c.bic_norm = c.bic / static_cast<double>(o);
  return c;
}

irl::FeedbackChannel channel_of(AgentModel model) {
  switch (model) {
    case AgentModel::M1: return irl::FeedbackChannel::None;
    case AgentModel::M2: return irl::FeedbackChannel::QBias;
    case AgentModel::M3: return irl::FeedbackChannel::RewardBias;
    case AgentModel::M4: return irl::FeedbackChannel::QOnly;
  }
  return irl::FeedbackChannel::None;
}

int parameter_count(AgentModel model, std::size_t features) {
  const int f = static_cast<int>(features);
  switch (model) {
    case AgentModel::M1: return f;
    case AgentModel::M2:
    case AgentModel::M3: return f + 1;
    case AgentModel::M4: return 1;
  }
  return 0;
}

ModelFit fit_model(const GroupPartition& partition, const Group& group, AgentModel model,
                   const irl::FeatureMap& features, const irl::IrlConfig& config) {
  if (group.demos.paths.empty()) fail(ErrorCode::EmptyDataset, "group " + group.name + " is empty");
  ModelFit out;
  out.model = model;
  out.featmap = features.mode;
  out.p = parameter_count(model, features.dim());
  out.o = group.observations();
  const auto channel = channel_of(model);
  std::vector<double> h;
  if (channel != irl::FeedbackChannel::None)
    h = feedback_table(partition.graph, group, config.gamma);

  if (model == AgentModel::M4) {
    irl::LikelihoodModel lm(group.demos, features, config.gamma, channel, h);
    const auto r = irl::fit(lm, irl::EdgeCounts::all(group.demos), 0.0, config);
    out.k = r.theta[0];
    out.loglik = r.loglik;
    out.converged = r.converged;
  } else {
    const auto r = irl::cross_validate(group.demos, features, config, channel, h);
    out.weights = r.weights();
    out.k = r.gain();
    out.lambda = r.lambda;
    out.loglik = r.train_loglik;
    out.converged = r.converged;
  }
  out.criteria = information_criteria(out.p, out.o, out.loglik);
  return out;
}

std::vector<double> default_model_lambdas() { return {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}; }

std::vector<std::pair<std::string, AgentModel>> Report::winners(irl::FeatureMode featmap,
                                                               bool bic) const {
  std::vector<std::pair<std::string, AgentModel>> out;
  for (const auto& r : rows)
    if (r.featmap == featmap && (bic ? r.bic_winner : r.aic_winner)) out.emplace_back(r.group, r.model);
  return out;
}

Report model_selection_report(const GroupPartition& partition,
                              const std::vector<irl::FeatureMode>& featmaps,
                              const irl::IrlConfig& config) {
  Report rep;
  struct Task {
    const Group* group;
    irl::FeatureMode mode;
    AgentModel model;
  };
  std::vector<Task> tasks;
  for (const auto& g : partition.groups) {
    if (g.observations() < static_cast<std::size_t>(std::max(config.folds, 1))) {
      rep.warnings.push_back("group " + g.name + " excluded: " + std::to_string(g.observations()) +
                             " trajectories");
      continue;
    }
    for (auto mode : featmaps)
      for (auto m : agents::kAllModels) tasks.push_back({&g, mode, m});
  }

  std::vector<ModelFit> fits(tasks.size());
  std::vector<std::string> errors(tasks.size());
  const int nt = static_cast<int>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < nt; ++i) {
    const auto& t = tasks[static_cast<std::size_t>(i)];
    try {
      const auto fm = t.mode == irl::FeatureMode::AllStates ? irl::FeatureMap::all_states(*partition.graph)
                                                            : irl::FeatureMap::subset8(*partition.graph);
      fits[static_cast<std::size_t>(i)] = fit_model(partition, *t.group, t.model, fm, config);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) fail(ErrorCode::NonConvergence, "model fit failed: " + e);

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& f = fits[i];
    ReportRow row;
    row.group = tasks[i].group->name;
    row.model = f.model;
    row.featmap = f.featmap;
    row.p = f.p;
    row.o = f.o;
    row.loglik = f.loglik;
    row.aic_norm = f.criteria.aic_norm;
    row.bic_norm = f.criteria.bic_norm;
    row.k = f.k;
    row.lambda = f.lambda;
    rep.rows.push_back(row);
  }
  // Winner flags within each (group, feature mode) block of four models.
  for (std::size_t b = 0; b < rep.rows.size(); b += 4) {
    std::size_t ba = b, bb = b;
    for (std::size_t i = b; i < b + 4; ++i) {
      if (rep.rows[i].aic_norm < rep.rows[ba].aic_norm) ba = i;
      if (rep.rows[i].bic_norm < rep.rows[bb].bic_norm) bb = i;
    }
    rep.rows[ba].aic_winner = true;
    rep.rows[bb].bic_winner = true;
  }
  return rep;
}

void write_report_csv(std::ostream& out, const Report& report) {
  out << "group,model,featmap,p,o,logL,AIC_norm,BIC_norm,aic_winner,bic_winner\n";
  out << std::setprecision(10);
  for (const auto& r : report.rows) {
    out << r.group << ',' << to_string(r.model) << ',' << irl::to_string(r.featmap) << ',' << r.p
        << ',' << r.o << ',' << r.loglik << ',' << r.aic_norm << ',' << r.bic_norm << ','
        << (r.aic_winner ? 1 : 0) << ',' << (r.bic_winner ? 1 : 0) << '\n';
  }
  for (const auto& w : report.warnings) out << "# warning: " << w << '\n';
}

void write_report_table(std::ostream& out, const Report& report) {
  out << std::left << std::setw(7) << "group" << std::setw(6) << "model" << std::setw(11) << "features"
      << std::right << std::setw(5) << "p" << std::setw(6) << "o" << std::setw(13) << "logL"
      << std::setw(11) << "AIC/o" << std::setw(11) << "BIC/o" << std::setw(9) << "k"
      << "  best\n";
  out << std::fixed;
  for (const auto& r : report.rows) {
    out << std::left << std::setw(7) << r.group << std::setw(6) << to_string(r.model) << std::setw(11)
        << irl::to_string(r.featmap) << std::right << std::setw(5) << r.p << std::setw(6) << r.o
        << std::setw(13) << std::setprecision(3) << r.loglik << std::setw(11) << std::setprecision(4)
        << r.aic_norm << std::setw(11) << r.bic_norm << std::setw(9);
    if (r.k)
      out << std::setprecision(3) << *r.k;
    else
      out << "-";
    out << "  " << (r.aic_winner ? "AIC " : "") << (r.bic_winner ? "BIC" : "") << '\n';
  }
  out.unsetf(std::ios::floatfield);
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
}

}  // namespace tohfb::models
