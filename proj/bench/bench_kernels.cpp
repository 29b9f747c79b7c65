// Serial reference vs OpenMP kernels: single Bellman sweeps, full soft value
// iteration and cross-validated IRL.

#include <benchmark/benchmark.h>

#include <map>

#include "tohfb/agents.hpp"
#include "tohfb/irl.hpp"
#include "tohfb/kernels.hpp"
#include "tohfb/mdp.hpp"
#include "tohfb/random.hpp"

using namespace tohfb;

namespace {

struct Fixture {
  TabularMdp mdp;
  std::vector<double> reward;
  std::vector<double> v;

  explicit Fixture(int n) : mdp(target_reward_mdp(shared_graph(n), TohState::uniform(n, 2))) {
    Rng rng(static_cast<std::uint64_t>(n));
    reward.resize(mdp.topology().num_edges());
    for (auto& x : reward) x = uniform01(rng) - 0.5;
    v.resize(mdp.topology().num_states());
    for (auto& x : v) x = uniform01(rng);
  }
};

const Fixture& fixture(int n) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, Fixture(n)).first;
  return it->second;
}

template <double (*Sweep)(const kernels::SweepProblem&, std::span<const double>, std::span<double>)>
void BM_Sweep(benchmark::State& state) {
  const auto& f = fixture(static_cast<int>(state.range(0)));
  const auto p = f.mdp.problem(f.reward);
  std::vector<double> out(f.v.size());
  for (auto _ : state) benchmark::DoNotOptimize(Sweep(p, f.v, out));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.next.size()));
  state.counters["threads"] = kernels::max_threads();
}

void BM_SoftViSerial(benchmark::State& state) {
  const auto& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(soft_value_iteration_serial(f.mdp, f.reward).v.data());
}

void BM_SoftViParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(soft_value_iteration_parallel(f.mdp, f.reward).v.data());
}

const irl::Demonstrations& cv_demos() {
  static const irl::Demonstrations demos = [] {
    agents::AgentSpec spec;
    spec.model = agents::AgentModel::M1;
    spec.target_weight = 40.0;
    spec.seed = 17;
    agents::AgentSimulator sim(spec);
    const auto target = TohState::parse("2212");
    std::vector<TrajectoryRecord> recs;
    for (int i = 0; i < 100; ++i)
      recs.push_back(sim.run_trial(Condition::NoFeedback, Phase::Training, 1, TohState::uniform(4, 0), target));
    return irl::Demonstrations::from_records(shared_graph(4), recs, target);
  }();
  return demos;
}

irl::IrlConfig cv_config() {
  irl::IrlConfig cfg;
  cfg.lambdas = {0.0, 0.5, 1.0, 2.0};
  return cfg;
}

void BM_CrossValidateSerial(benchmark::State& state) {
  const auto& demos = cv_demos();
  const auto fm = irl::FeatureMap::all_states(*demos.graph);
  for (auto _ : state) benchmark::DoNotOptimize(irl::cross_validate_serial(demos, fm, cv_config()).lambda);
}

void BM_CrossValidateParallel(benchmark::State& state) {
  const auto& demos = cv_demos();
  const auto fm = irl::FeatureMap::all_states(*demos.graph);
  for (auto _ : state) benchmark::DoNotOptimize(irl::cross_validate(demos, fm, cv_config()).lambda);
}

}  // namespace

BENCHMARK(BM_Sweep<kernels::hard_sweep_serial>)->Name("hard_sweep/serial")->DenseRange(7, 9);
BENCHMARK(BM_Sweep<kernels::hard_sweep_parallel>)->Name("hard_sweep/parallel")->DenseRange(7, 9);
BENCHMARK(BM_Sweep<kernels::soft_sweep_serial>)->Name("soft_sweep/serial")->DenseRange(7, 9);
BENCHMARK(BM_Sweep<kernels::soft_sweep_parallel>)->Name("soft_sweep/parallel")->DenseRange(7, 9);
BENCHMARK(BM_SoftViSerial)->Name("soft_vi/serial")->DenseRange(7, 9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SoftViParallel)->Name("soft_vi/parallel")->DenseRange(7, 9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CrossValidateSerial)->Name("irl_cv/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CrossValidateParallel)->Name("irl_cv/parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
