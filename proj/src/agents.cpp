#include "tohfb/agents.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "tohfb/errors.hpp"

namespace tohfb::agents {

std::string_view to_string(AgentModel m) {
  switch (m) {
    case AgentModel::M1: return "M1";
    case AgentModel::M2: return "M2";
    case AgentModel::M3: return "M3";
    case AgentModel::M4: return "M4";
  }
  return "?";
}

AgentModel parse_model(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto m : kAllModels)
    if (to_string(m) == up) return m;
  fail(ErrorCode::InvalidArgument, "unknown agent model '" + std::string(name) + "'");
}

std::vector<double> agent_rewards(const AgentSpec& spec, const StateGraph& graph,
                                  const TohState& target) {
  std::vector<double> arrive(graph.num_states(), 0.0);
  arrive[graph.index_of(target)] += spec.target_weight;
  for (const auto& [label, w] : spec.state_weights) {
    if (static_cast<int>(label.size()) != graph.disks()) continue;
    arrive[graph.index_of(TohState::parse(label))] += w;
  }
  std::vector<double> r(graph.num_edges());
  for (std::size_t e = 0; e < graph.num_edges(); ++e) r[e] = arrive[graph.edge(e).next];
  return r;
}

SoftPolicy agent_policy(const AgentSpec& spec, GraphPtr graph, const TohState& target,
                        bool feedback) {
  TabularMdp mdp(Topology::from_graph(graph), spec.gamma);
  mdp.set_terminal(graph->index_of(target));
  const auto topo = mdp.topology_ptr();
  std::vector<double> h(graph->num_edges(), 0.0);
  if (feedback && spec.model != AgentModel::M1)
    h = feedback_signal(tutor_values(graph, target, spec.gamma));

  if (spec.model == AgentModel::M4) {
    std::vector<double> s(h.size());
    for (std::size_t e = 0; e < h.size(); ++e) s[e] = spec.k * h[e];
    return softmax_from_scores(topo, mdp.terminal(), s);
  }
  auto r = agent_rewards(spec, *graph, target);
  if (spec.model == AgentModel::M3)
    for (std::size_t e = 0; e < r.size(); ++e) r[e] += spec.k * h[e];
  const auto values = soft_value_iteration(mdp, r);
  if (spec.model != AgentModel::M2) return softmax_policy(values);
  std::vector<double> s(values.q);
  for (std::size_t e = 0; e < s.size(); ++e) s[e] += spec.k * h[e];
  return softmax_from_scores(topo, mdp.terminal(), s);
}

bool agent_sees_feedback(Condition condition, Phase phase) {
  return phase == Phase::Training &&
         (shows_numeric_feedback(condition) || offers_feedback_button(condition));
}

AgentSimulator::AgentSimulator(AgentSpec spec, std::string session_id)
    : spec_(std::move(spec)), session_id_(std::move(session_id)), rng_(spec_.seed) {}

const SoftPolicy& AgentSimulator::policy_for(const GraphPtr& graph, const TohState& target,
                                             bool feedback) {
  const auto key = std::make_tuple(graph->disks(), graph->index_of(target), feedback);
  auto it = policies_.find(key);
  if (it == policies_.end())
    it = policies_.emplace(key, agent_policy(spec_, graph, target, feedback)).first;
  return it->second;
}

TrajectoryRecord AgentSimulator::run_trial(Condition condition, Phase phase, int trial_index,
                                           const TohState& start, const TohState& target,
                                           int budget) {
  const int n = start.disks();
  if (target.disks() != n) fail(ErrorCode::InvalidState, "start and target disk counts differ");
  const auto graph = shared_graph(n);
  const auto s0 = graph->index_of(start);
  const auto t = graph->index_of(target);

  TrajectoryRecord rec;
  rec.session_id = session_id_;
  rec.condition = condition;
  rec.trial_index = trial_index;
  rec.phase = phase;
  rec.n = n;
  rec.start = start;
  rec.target = target;
  const bool training = phase == Phase::Training;
  if (training && shows_subgoal(condition) && triangle_of(target) != Triangle::T1)
    rec.subgoal = subgoal_for(target, n);
  rec.m_min = shortest_distances(*graph, t)[s0];
  rec.m_allowed = budget >= 0 ? budget : allowed_moves(std::max(rec.m_min, 1));
  if (rec.m_allowed < 1) fail(ErrorCode::InvalidArgument, "budget must be at least 1");

  const bool sees = agent_sees_feedback(condition, phase);
  const auto& pol = policy_for(graph, target, sees);
  const bool numeric = training && shows_numeric_feedback(condition);
  const bool button = training && offers_feedback_button(condition);
  const ValueTable* tutor = nullptr;
  if (numeric || button) {
    const auto key = std::make_pair(n, t);
    auto it = tutors_.find(key);
    if (it == tutors_.end()) it = tutors_.emplace(key, tutor_values(graph, target, spec_.gamma)).first;
    tutor = &it->second;
  }

  std::size_t cur = s0;
  int step = 0;
  while (cur != t && step < rec.m_allowed) {
    const auto row = pol.row(cur);
    const double u = uniform01(rng_);
    std::size_t pick = row.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      acc += row[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    const Edge& edge = graph->edges(cur)[pick];
    MoveRecord m;
    m.pre = graph->state(cur);
    m.action = edge.action;
    m.post = graph->state(edge.next);
    m.t = ++step;
    bool show = numeric;
    if (button && uniform01(rng_) < spec_.request_rate) {
      m.requested = true;
      m.requests = 1;
      show = true;
    }
    if (show) {
      const auto ev = evaluate_edge(*tutor, cur, edge.next);
      m.label = ev.label;
      m.delta = ev.delta;
    }
    rec.moves.push_back(std::move(m));
    cur = edge.next;
  }
  rec.m_used = static_cast<int>(rec.moves.size());
  rec.solved = cur == t && rec.m_used <= rec.m_allowed;
  rec.score = score_trial(condition, score_inputs_from_moves(rec), rec.solved);
  rec.pct = rec.solved ? percentage_score(rec.m_allowed, rec.m_used, rec.m_min, true) : 0.0;
  return rec;
}

TrajectoryRecord simulate_trial(const AgentSpec& spec, Condition condition, int n,
                                const TohState& start, const TohState& target, int budget) {
  if (budget < 1) fail(ErrorCode::InvalidArgument, "budget must be at least 1");
  if (start.disks() != n) fail(ErrorCode::InvalidState, "start has the wrong disk count");
  AgentSimulator sim(spec);
  return sim.run_trial(condition, Phase::Training, 1, start, target, budget);
}

std::vector<TrajectoryRecord> simulate_cohort(const std::vector<AgentSpec>& specs,
                                              const Protocol& protocol) {
  if (specs.empty()) fail(ErrorCode::InvalidArgument, "cohort needs at least one agent");
  const int na = static_cast<int>(specs.size());
  std::vector<std::vector<TrajectoryRecord>> per(specs.size());
  std::vector<std::string> errors(specs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int a = 0; a < na; ++a) {
    try {
      char id[32];
      std::snprintf(id, sizeof id, "agent-%04d", a + 1);
      AgentSimulator sim(specs[static_cast<std::size_t>(a)], id);
      auto& out = per[static_cast<std::size_t>(a)];
      int trial = 0;
      for (int i = 0; i < protocol.training_trials; ++i) {
        const int n = protocol.training_disks;
        const TohState target = protocol.training_target ? *protocol.training_target : sim.draw_target(n);
        out.push_back(sim.run_trial(protocol.condition, Phase::Training, ++trial,
                                    TohState::uniform(n, 0), target));
      }
      for (int i = 0; i < protocol.transfer_trials; ++i) {
        const int n = protocol.transfer_disks;
        const TohState target = sim.draw_target(n);
        out.push_back(sim.run_trial(protocol.condition, Phase::Transfer, ++trial,
                                    TohState::uniform(n, 0), target));
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(a)] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) fail(ErrorCode::InvalidArgument, "cohort simulation failed: " + e);
  std::vector<TrajectoryRecord> all;
  for (auto& v : per)
    for (auto& r : v) all.push_back(std::move(r));
  return all;
}

}  // namespace tohfb::agents
