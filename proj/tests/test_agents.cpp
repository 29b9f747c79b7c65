#include <cmath>
#include <set>

#include "doctest.h"
#include "tohfb/agents.hpp"
#include "tohfb/errors.hpp"

using namespace tohfb;
using agents::AgentModel;
using agents::AgentSpec;

namespace {

AgentSpec spec_of(AgentModel m, double k, double target_weight = 5.0) {
  AgentSpec s;
  s.model = m;
  s.k = k;
  s.target_weight = target_weight;
  return s;
}

double max_diff(const SoftPolicy& a, const SoftPolicy& b) {
  double d = 0.0;
  for (std::size_t e = 0; e < a.prob.size(); ++e) d = std::max(d, std::abs(a.prob[e] - b.prob[e]));
  return d;
}

}  // namespace

TEST_CASE("model names") {
  for (auto m : agents::kAllModels) CHECK(agents::parse_model(agents::to_string(m)) == m);
  CHECK(agents::parse_model("m3") == AgentModel::M3);
  CHECK_THROWS_AS(agents::parse_model("M5"), Error);
}

TEST_CASE("feedback-only agents weigh +2 against -2") {
  const auto g = shared_graph(4);
  const auto target = TohState::parse("2222");
  const auto pol = agents::agent_policy(spec_of(AgentModel::M4, 0.5), g, target);
  const auto h = feedback_signal(tutor_values(g, target));
  for (std::size_t s = 0; s < g->num_states(); ++s) {
    if (s == g->index_of(target)) continue;
    const auto row = pol.row(s);
    double z = 0.0;
    for (std::size_t e = g->offsets()[s]; e < g->offsets()[s + 1]; ++e) z += std::exp(0.5 * h[e]);
    for (std::size_t i = 0; i < row.size(); ++i)
      CHECK(row[i] == doctest::Approx(std::exp(0.5 * h[g->offsets()[s] + i]) / z).epsilon(1e-12));
  }
  // One +2 and one -2 move at the start: e / (e + 1/e).
  const auto row = pol.row(g->index_of(TohState::parse("0000")));
  CHECK(std::max(row[0], row[1]) == doctest::Approx(0.8808).epsilon(1e-4));
  // Without feedback the agent chooses uniformly.
  const auto blind = agents::agent_policy(spec_of(AgentModel::M4, 0.5), g, target, false);
  CHECK(blind.row(0)[0] == doctest::Approx(0.5));
}

TEST_CASE("zero gain collapses the feedback models onto the reward-only model") {
  const auto g = shared_graph(4);
  const auto target = TohState::parse("1021");
  const auto m1 = agents::agent_policy(spec_of(AgentModel::M1, 0.0), g, target);
  CHECK(max_diff(m1, agents::agent_policy(spec_of(AgentModel::M2, 0.0), g, target)) < 1e-9);
  CHECK(max_diff(m1, agents::agent_policy(spec_of(AgentModel::M3, 0.0), g, target)) < 1e-9);
  // M1 ignores k entirely, and feedback is irrelevant to it.
  CHECK(max_diff(m1, agents::agent_policy(spec_of(AgentModel::M1, 3.0), g, target)) < 1e-15);
  CHECK(max_diff(agents::agent_policy(spec_of(AgentModel::M2, 2.0), g, target, false), m1) < 1e-9);
  // Positive gain moves probability towards +2 edges.
  const auto h = feedback_signal(tutor_values(g, target));
  const auto m2 = agents::agent_policy(spec_of(AgentModel::M2, 1.0), g, target);
  double good1 = 0.0, good2 = 0.0;
  for (std::size_t e = 0; e < h.size(); ++e)
    if (h[e] > 0) {
      good1 += m1.prob[e];
      good2 += m2.prob[e];
    }
  CHECK(good2 > good1);
}

TEST_CASE("agent rewards") {
  const auto g = shared_graph(4);
  auto spec = spec_of(AgentModel::M1, 0.0, 2.0);
  spec.state_weights = {{"1110", 3.0}, {"11110", 9.0}};
  const auto r = agents::agent_rewards(spec, *g, TohState::parse("0012"));
  for (std::size_t e = 0; e < g->num_edges(); ++e) {
    const auto to = g->label(g->edge(e).next);
    CHECK(r[e] == (to == "0012" ? 2.0 : to == "1110" ? 3.0 : 0.0));
  }
}

TEST_CASE("a sharp feedback follower solves in the minimum") {
  auto spec = spec_of(AgentModel::M4, 50.0);
  spec.seed = 5;
  agents::AgentSimulator sim(spec);
  for (int i = 0; i < 5; ++i) {
    const auto target = sim.draw_target(4);
    const auto r = sim.run_trial(Condition::Numeric, Phase::Training, i + 1, TohState::uniform(4, 0), target);
    CHECK(r.solved);
    CHECK(r.m_used == r.m_min);
    for (const auto& m : r.moves) CHECK(m.delta == DeltaClass::Improving);
    validate_record(r);
  }
}

TEST_CASE("budget exhaustion and determinism") {
  auto spec = spec_of(AgentModel::M4, 0.0);
  spec.seed = 6;
  const auto start = TohState::uniform(4, 0);
  const auto target = TohState::parse("2222");
  const auto a = agents::simulate_trial(spec, Condition::NoFeedback, 4, start, target, 3);
  CHECK_FALSE(a.solved);
  CHECK(a.m_used == 3);
  CHECK(a.score.total == 0);
  CHECK(a.pct == 0.0);
  const auto b = agents::simulate_trial(spec, Condition::NoFeedback, 4, start, target, 3);
  CHECK(to_json(a) == to_json(b));
  CHECK_THROWS_AS(agents::simulate_trial(spec, Condition::NoFeedback, 4, start, target, 0), Error);
  CHECK_THROWS_AS(agents::simulate_trial(spec, Condition::NoFeedback, 5, start, target, 3), Error);
}

TEST_CASE("first moves follow the policy") {
  auto spec = spec_of(AgentModel::M3, 0.7, 8.0);
  spec.seed = 77;
  const auto g = shared_graph(4);
  const auto target = TohState::parse("0012");
  const auto start = TohState::parse("1000");
  const auto pol = agents::agent_policy(spec, g, target);
  const auto row = pol.row(g->index_of(start));
  REQUIRE(row.size() == 3);
  agents::AgentSimulator sim(spec);
  const int draws = 6000;
  std::vector<int> hits(3, 0);
  for (int i = 0; i < draws; ++i) {
    const auto r = sim.run_trial(Condition::Numeric, Phase::Training, 1, start, target, 1);
    const auto& edges = g->edges(g->index_of(start));
    for (std::size_t j = 0; j < 3; ++j)
      if (g->state(edges[j].next) == r.moves[0].post) ++hits[j];
  }
  double chi2 = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    const double expect = draws * row[j];
    chi2 += (hits[j] - expect) * (hits[j] - expect) / expect;
  }
  // 2 degrees of freedom; 13.8 is the 0.999 quantile.
  CHECK(chi2 < 13.8);
}

TEST_CASE("requests follow the optional condition") {
  auto spec = spec_of(AgentModel::M2, 1.0);
  spec.seed = 8;
  spec.request_rate = 1.0;
  agents::AgentSimulator sim(spec);
  const auto r = sim.run_trial(Condition::Optional, Phase::Training, 1, TohState::uniform(4, 0), TohState::parse("2222"));
  for (const auto& m : r.moves) {
    CHECK(m.requested);
    CHECK(m.label);
  }
  CHECK(r.score.optional_penalty == r.m_used);
  const auto t = sim.run_trial(Condition::Optional, Phase::Transfer, 11, TohState::uniform(5, 0), TohState::parse("22222"));
  for (const auto& m : t.moves) {
    CHECK_FALSE(m.requested);
    CHECK_FALSE(m.label);
  }
  CHECK(agents::agent_sees_feedback(Condition::Numeric, Phase::Training));
  CHECK_FALSE(agents::agent_sees_feedback(Condition::Numeric, Phase::Transfer));
  CHECK_FALSE(agents::agent_sees_feedback(Condition::Subgoal, Phase::Training));
}

TEST_CASE("cohorts") {
  std::vector<AgentSpec> specs;
  for (int i = 0; i < 20; ++i) {
    auto s = spec_of(AgentModel::M2, 1.0, 20.0);
    s.seed = 1000 + static_cast<std::uint64_t>(i);
    specs.push_back(s);
  }
  agents::Protocol protocol;
  protocol.condition = Condition::SubgoalNumeric;
  const auto recs = agents::simulate_cohort(specs, protocol);
  REQUIRE(recs.size() == 300);
  std::set<std::string> sessions;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    const int trial = static_cast<int>(i % 15) + 1;
    CHECK(r.trial_index == trial);
    CHECK(r.n == (trial <= 10 ? 4 : 5));
    CHECK(r.condition == Condition::SubgoalNumeric);
    CHECK(triangle_of(r.target) != Triangle::T1);
    CHECK(r.start == TohState::uniform(r.n, 0));
    CHECK(r.subgoal.has_value() == (trial <= 10));
    validate_record(r);
    sessions.insert(r.session_id);
  }
  CHECK(sessions.size() == 20);
  CHECK(to_json(agents::simulate_cohort(specs, protocol)[123]) == to_json(recs[123]));
  CHECK_THROWS_AS(agents::simulate_cohort({}, protocol), Error);

  protocol.training_target = TohState::parse("2212");
  for (const auto& r : agents::simulate_cohort({specs[0]}, protocol))
    if (r.phase == Phase::Training) CHECK(r.target.str() == "2212");
}
