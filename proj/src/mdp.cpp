#include "tohfb/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "tohfb/errors.hpp"

namespace tohfb {

std::shared_ptr<const Topology> Topology::from_graph(GraphPtr graph) {
  auto t = std::make_shared<Topology>();
  t->offsets.assign(graph->offsets().begin(), graph->offsets().end());
  t->next.reserve(graph->num_edges());
  t->source.reserve(graph->num_edges());
  for (std::size_t e = 0; e < graph->num_edges(); ++e) {
    t->next.push_back(graph->edge(e).next);
    t->source.push_back(static_cast<std::uint32_t>(graph->source_of(e)));
  }
  t->graph = std::move(graph);
  return t;
}

std::shared_ptr<const Topology> Topology::from_adjacency(
    const std::vector<std::vector<std::uint32_t>>& successors) {
  auto t = std::make_shared<Topology>();
  t->offsets.push_back(0);
  for (std::size_t s = 0; s < successors.size(); ++s) {
    if (successors[s].empty()) fail(ErrorCode::InvalidArgument, "every state needs an action");
    for (auto nx : successors[s]) {
      if (nx >= successors.size()) fail(ErrorCode::InvalidArgument, "successor out of range");
      t->next.push_back(nx);
      t->source.push_back(static_cast<std::uint32_t>(s));
    }
    t->offsets.push_back(t->next.size());
  }
  return t;
}

TabularMdp::TabularMdp(TopologyPtr topology, double gamma)
    : topology_(std::move(topology)), gamma_(gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    fail(ErrorCode::InvalidArgument, "discount must lie in [0, 1)");
  reward_.assign(topology_->num_edges(), 0.0);
  terminal_.assign(topology_->num_states(), 0);
}

void TabularMdp::set_terminal(std::size_t state, bool value) {
  if (state >= terminal_.size()) fail(ErrorCode::UnknownState, "terminal state out of range");
  terminal_[state] = value ? 1 : 0;
}

kernels::SweepProblem TabularMdp::problem(std::span<const double> reward) const {
  if (reward.size() != topology_->num_edges())
    fail(ErrorCode::InvalidArgument, "reward table must have one entry per edge");
  return {topology_->offsets, topology_->next, reward, terminal_, gamma_};
}

TabularMdp target_reward_mdp(GraphPtr graph, const TohState& target, double gamma) {
  const std::size_t t = graph->index_of(target);
  TabularMdp mdp(Topology::from_graph(std::move(graph)), gamma);
  const auto& topo = mdp.topology();
  auto reward = mdp.reward();
  for (std::size_t e = 0; e < topo.num_edges(); ++e) reward[e] = topo.next[e] == t ? 1.0 : 0.0;
  mdp.set_terminal(t);
  return mdp;
}

namespace {

using SweepFn = double (*)(const kernels::SweepProblem&, std::span<const double>,
                           std::span<double>);

ValueTable iterate(const TabularMdp& mdp, std::span<const double> reward, double tol,
                   int max_iter, SweepFn sweep, bool soft) {
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "tolerance must be positive");
  for (double r : reward)
    if (!std::isfinite(r)) fail(ErrorCode::InvalidArgument, "rewards must be finite");
  const auto problem = mdp.problem(reward);
  const auto& topo = mdp.topology();
  std::vector<double> v(topo.num_states(), 0.0);
  std::vector<double> w(topo.num_states(), 0.0);
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (residual >= tol) {
    if (it >= max_iter)
      fail(ErrorCode::NonConvergence,
           "value iteration did not converge within " + std::to_string(max_iter) + " sweeps");
    residual = sweep(problem, v, w);
    std::swap(v, w);
    ++it;
  }

  ValueTable out;
  out.topology = mdp.topology_ptr();
  out.terminal.assign(mdp.terminal().begin(), mdp.terminal().end());
  out.q.resize(topo.num_edges());
  out.iterations = it;
  out.residual = residual;
  out.soft = soft;
  const double g = mdp.gamma();
  for (std::size_t e = 0; e < topo.num_edges(); ++e) {
    const auto nx = topo.next[e];
    const double cont = mdp.is_terminal(nx) ? 0.0 : v[nx];
    out.q[e] = soft ? reward[e] + g * cont : g * (reward[e] + cont);
  }
  if (!soft) {
    // A terminal state reports the best reward booked on arriving there.
    for (std::size_t s = 0; s < topo.num_states(); ++s)
      if (mdp.is_terminal(s)) v[s] = 0.0;
    std::vector<double> arrival(topo.num_states(), -std::numeric_limits<double>::infinity());
    for (std::size_t e = 0; e < topo.num_edges(); ++e)
      arrival[topo.next[e]] = std::max(arrival[topo.next[e]], reward[e]);
    for (std::size_t s = 0; s < topo.num_states(); ++s)
      if (mdp.is_terminal(s) && std::isfinite(arrival[s])) v[s] = arrival[s];
  }
  out.v = std::move(v);
  return out;
}

}  // namespace

ValueTable value_iteration(const TabularMdp& mdp, double tol, int max_iter) {
  return iterate(mdp, mdp.reward(), tol, max_iter, &kernels::hard_sweep, false);
}

ValueTable soft_value_iteration(const TabularMdp& mdp, std::span<const double> reward,
                                double tol, int max_iter) {
  return iterate(mdp, reward, tol, max_iter, &kernels::soft_sweep, true);
}

ValueTable soft_value_iteration_serial(const TabularMdp& mdp, std::span<const double> reward,
                                       double tol, int max_iter) {
  return iterate(mdp, reward, tol, max_iter, &kernels::soft_sweep_serial, true);
}

ValueTable soft_value_iteration_parallel(const TabularMdp& mdp, std::span<const double> reward,
                                         double tol, int max_iter) {
  return iterate(mdp, reward, tol, max_iter, &kernels::soft_sweep_parallel, true);
}

SoftPolicy softmax_from_scores(TopologyPtr topology, std::span<const std::uint8_t> terminal,
                               std::span<const double> scores) {
  SoftPolicy pol;
  pol.prob.assign(topology->num_edges(), 0.0);
  for (std::size_t s = 0; s < topology->num_states(); ++s) {
    if (terminal[s]) continue;
    const std::size_t b = topology->offsets[s];
    const std::size_t end = topology->offsets[s + 1];
    if (b == end) continue;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t e = b; e < end; ++e) m = std::max(m, scores[e]);
    double z = 0.0;
    for (std::size_t e = b; e < end; ++e) z += std::exp(scores[e] - m);
    const double lse = m + std::log(z);
    for (std::size_t e = b; e < end; ++e) pol.prob[e] = std::exp(scores[e] - lse);
  }
  pol.topology = std::move(topology);
  return pol;
}

SoftPolicy softmax_policy(const ValueTable& values) {
  return softmax_from_scores(values.topology, values.terminal, values.q);
}

std::vector<std::size_t> argmax_edges(std::span<const double> row, double rel_tol) {
  std::vector<std::size_t> out;
  if (row.empty()) return out;
  const double m = *std::max_element(row.begin(), row.end());
  const double slack = rel_tol * std::max(1.0, std::abs(m));
  for (std::size_t i = 0; i < row.size(); ++i)
    if (row[i] >= m - slack) out.push_back(i);
  return out;
}

std::vector<std::size_t> greedy_rollout(const ValueTable& values, std::size_t start,
                                        std::size_t max_steps) {
  const auto& topo = *values.topology;
  std::vector<std::size_t> path{start};
  std::size_t s = start;
  for (std::size_t step = 0; step < max_steps && !values.terminal[s]; ++step) {
    const auto row = values.q_row(s);
    if (row.empty()) break;
    const std::size_t best = argmax_edges(row).front();
    s = topo.next[topo.offsets[s] + best];
    path.push_back(s);
  }
  return path;
}

void write_value_csv(std::ostream& out, const StateGraph& graph, const ValueTable& values) {
  out << "state,value\n" << std::setprecision(17);
  for (std::size_t s = 0; s < graph.num_states(); ++s)
    out << graph.label(s) << ',' << values.v[s] << '\n';
}

void write_q_csv(std::ostream& out, const StateGraph& graph, const ValueTable& values) {
  out << "state,from,to,q\n" << std::setprecision(17);
  for (std::size_t s = 0; s < graph.num_states(); ++s)
    for (std::size_t e = graph.edge_begin(s); e < graph.edge_end(s); ++e)
      out << graph.label(s) << ',' << graph.edge(e).action.from << ','
          << graph.edge(e).action.to << ',' << values.q[e] << '\n';
}

}  // namespace tohfb
