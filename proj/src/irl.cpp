#include "tohfb/irl.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "tohfb/errors.hpp"

namespace tohfb::irl {

namespace {
constexpr double kSolveTol = 1e-12;
}

std::string_view to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::AllStates: return "all_states";
    case FeatureMode::Subset8: return "subset8";
    case FeatureMode::Custom: return "custom";
  }
  return "?";
}

FeatureMode parse_feature_mode(std::string_view name) {
  if (name == "all" || name == "all_states" || name == "allstates") return FeatureMode::AllStates;
  if (name == "subset8") return FeatureMode::Subset8;
  fail(ErrorCode::InvalidArgument, "unknown feature mode '" + std::string(name) + "'");
}

FeatureMap FeatureMap::all_states(const StateGraph& graph) {
  FeatureMap f;
  f.mode = FeatureMode::AllStates;
  f.feature_of.resize(graph.num_states());
  for (std::size_t s = 0; s < graph.num_states(); ++s) {
    f.states.push_back(graph.state(s));
    f.feature_of[s] = static_cast<int>(s);
  }
  return f;
}

FeatureMap FeatureMap::custom(const StateGraph& graph, const std::vector<TohState>& states) {
  FeatureMap f;
  f.mode = FeatureMode::Custom;
  f.feature_of.assign(graph.num_states(), -1);
  for (const auto& st : states) {
    const auto s = graph.index_of(st);
    if (f.feature_of[s] >= 0) fail(ErrorCode::InvalidArgument, "duplicate feature state " + st.str());
    f.feature_of[s] = static_cast<int>(f.states.size());
    f.states.push_back(st);
  }
  return f;
}

FeatureMap FeatureMap::subset8(const StateGraph& graph) {
  FeatureMap f = custom(graph, subset8_states(graph.disks()));
  f.mode = FeatureMode::Subset8;
  return f;
}

std::vector<double> edge_rewards(const Topology& topo, const FeatureMap& features,
                                 std::span<const double> weights) {
  std::vector<double> r(topo.num_edges(), 0.0);
  for (std::size_t e = 0; e < topo.num_edges(); ++e) {
    const int j = features.feature_of[topo.next[e]];
    if (j >= 0) r[e] = weights[static_cast<std::size_t>(j)];
  }
  return r;
}

std::size_t Demonstrations::num_steps() const {
  std::size_t n = 0;
  for (const auto& p : paths) n += p.size();
  return n;
}

Demonstrations Demonstrations::from_records(GraphPtr graph,
                                            const std::vector<TrajectoryRecord>& records,
                                            const std::optional<TohState>& target) {
  Demonstrations d;
  if (target) d.target = graph->index_of(*target);
  for (const auto& r : records) {
    if (r.n != graph->disks())
      fail(ErrorCode::InvalidArgument, "record " + r.session_id + " has the wrong disk count");
    std::vector<std::uint32_t> path;
    for (const auto& m : r.moves) {
      const auto s = graph->index_of(m.pre);
      if (d.target && s == *d.target) break;
      const auto e = graph->find_edge(s, graph->index_of(m.post));
      if (e == StateGraph::npos)
        fail(ErrorCode::InvalidArgument, "record " + r.session_id + " contains a non-edge");
      path.push_back(static_cast<std::uint32_t>(e));
    }
    d.paths.push_back(std::move(path));
  }
  d.graph = std::move(graph);
  return d;
}

EdgeCounts EdgeCounts::from_paths(const Demonstrations& demos, std::span<const std::size_t> which) {
  EdgeCounts c;
  c.edge.assign(demos.graph->num_edges(), 0.0);
  c.state.assign(demos.graph->num_states(), 0.0);
  for (std::size_t i : which) {
    for (auto e : demos.paths[i]) {
      c.edge[e] += 1.0;
      c.state[demos.graph->source_of(e)] += 1.0;
      c.steps += 1.0;
    }
  }
  return c;
}

EdgeCounts EdgeCounts::all(const Demonstrations& demos) {
  std::vector<std::size_t> idx(demos.paths.size());
  std::iota(idx.begin(), idx.end(), 0);
  return from_paths(demos, idx);
}

namespace {

std::vector<std::uint8_t> terminal_mask(const Demonstrations& demos) {
  std::vector<std::uint8_t> t(demos.graph->num_states(), 0);
  if (demos.target) t[*demos.target] = 1;
  return t;
}

}  // namespace

LikelihoodModel::LikelihoodModel(const Demonstrations& demos, FeatureMap features, double gamma,
                                 FeedbackChannel channel, std::vector<double> feedback)
    : topology_(Topology::from_graph(demos.graph)),
      terminal_(terminal_mask(demos)),
      features_(std::move(features)),
      gamma_(gamma),
      channel_(channel),
      h_(std::move(feedback)),
      solver_(topology_, terminal_, gamma) {
  const auto m = topology_->num_edges();
  if (channel_ != FeedbackChannel::None && h_.size() != m)
    fail(ErrorCode::InvalidArgument, "feedback table must have one entry per edge");
  if (features_.feature_of.size() != topology_->num_states())
    fail(ErrorCode::InvalidArgument, "feature map belongs to a different graph");
  reward_.assign(m, 0.0);
  logp_.assign(m, 0.0);
  pi_.assign(m, 0.0);
  c_.assign(m, 0.0);
  cin_.assign(topology_->num_states(), 0.0);
  nu_.assign(topology_->num_states(), 0.0);
}

std::size_t LikelihoodModel::num_params() const {
  return num_weights() + (has_gain() ? 1 : 0);
}

void LikelihoodModel::scores(std::span<const double> theta) {
  if (theta.size() != num_params()) fail(ErrorCode::InvalidArgument, "parameter vector has the wrong size");
  const auto& topo = *topology_;
  const double k = has_gain() ? theta.back() : 0.0;
  if (channel_ == FeedbackChannel::QOnly) {
    for (std::size_t e = 0; e < topo.num_edges(); ++e) logp_[e] = k * h_[e];
  } else {
    for (std::size_t e = 0; e < topo.num_edges(); ++e) {
      const int j = features_.feature_of[topo.next[e]];
      reward_[e] = j >= 0 ? theta[static_cast<std::size_t>(j)] : 0.0;
      if (channel_ == FeedbackChannel::RewardBias) reward_[e] += k * h_[e];
    }
    solver_.solve(reward_, kSolveTol);
    const auto q = solver_.q();
    for (std::size_t e = 0; e < topo.num_edges(); ++e)
      logp_[e] = q[e] + (channel_ == FeedbackChannel::QBias ? k * h_[e] : 0.0);
  }
  // Row-normalize the scores into log-probabilities.
  for (std::size_t s = 0; s < topo.num_states(); ++s) {
    const std::size_t b = topo.offsets[s];
    const std::size_t end = topo.offsets[s + 1];
    if (terminal_[s]) {
      for (std::size_t e = b; e < end; ++e) logp_[e] = pi_[e] = 0.0;
      continue;
    }
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t e = b; e < end; ++e) m = std::max(m, logp_[e]);
    double z = 0.0;
    for (std::size_t e = b; e < end; ++e) z += std::exp(logp_[e] - m);
    const double lse = m + std::log(z);
    for (std::size_t e = b; e < end; ++e) {
      logp_[e] -= lse;
      pi_[e] = std::exp(logp_[e]);
    }
  }
}

double LikelihoodModel::evaluate(std::span<const double> theta, const EdgeCounts& counts,
                                 std::span<double> grad) {
  scores(theta);
  const auto& topo = *topology_;
  double loglik = 0.0;
  for (std::size_t e = 0; e < topo.num_edges(); ++e) {
    if (counts.edge[e] == 0.0) continue;
    if (terminal_[topo.source[e]])
      fail(ErrorCode::InvalidArgument, "a demonstration step leaves the terminal target");
    loglik += counts.edge[e] * logp_[e];
  }
  if (grad.empty()) return loglik;
  if (grad.size() != num_params()) fail(ErrorCode::InvalidArgument, "gradient has the wrong size");

  // Sensitivity of logL to each edge score.
  for (std::size_t e = 0; e < topo.num_edges(); ++e)
    c_[e] = counts.edge[e] - counts.state[topo.source[e]] * pi_[e];
  std::fill(grad.begin(), grad.end(), 0.0);
  if (channel_ == FeedbackChannel::QOnly) {
    for (std::size_t e = 0; e < topo.num_edges(); ++e) grad[0] += c_[e] * h_[e];
    return loglik;
  }

  // Adjoint of the soft Bellman fixed point: scores depend on rewards both
  // directly and through the successor values.
  std::fill(cin_.begin(), cin_.end(), 0.0);
  for (std::size_t e = 0; e < topo.num_edges(); ++e)
    if (!terminal_[topo.next[e]]) cin_[topo.next[e]] += c_[e];
  solver_.solve_adjoint(cin_, nu_);
  const auto inner = solver_.policy();
  double dk = 0.0;
  for (std::size_t e = 0; e < topo.num_edges(); ++e) {
    const double mu = c_[e] + gamma_ * inner[e] * nu_[topo.source[e]];
    const int j = features_.feature_of[topo.next[e]];
    if (j >= 0) grad[static_cast<std::size_t>(j)] += mu;
    if (channel_ == FeedbackChannel::RewardBias) dk += mu * h_[e];
    if (channel_ == FeedbackChannel::QBias) dk += c_[e] * h_[e];
  }
  if (has_gain()) grad.back() = dk;
  return loglik;
}

std::vector<double> LikelihoodModel::policy(std::span<const double> theta) {
  scores(theta);
  return pi_;
}

double log_likelihood(const Demonstrations& demos, std::span<const double> weights,
                      const FeatureMap& features, double gamma) {
  LikelihoodModel model(demos, features, gamma);
  return model.evaluate(weights, EdgeCounts::all(demos));
}

std::vector<double> likelihood_gradient(const Demonstrations& demos, std::span<const double> weights,
                                        const FeatureMap& features, double gamma) {
  LikelihoodModel model(demos, features, gamma);
  std::vector<double> g(model.num_params());
  model.evaluate(weights, EdgeCounts::all(demos), g);
  return g;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(i / 10.0);
  return g;
}

namespace {

double l1(std::span<const double> theta, std::size_t nw) {
  double s = 0.0;
  for (std::size_t i = 0; i < nw; ++i) s += std::abs(theta[i]);
  return s;
}

// Loglik at theta, or -inf when the soft solve fails for a wild trial point.
double try_evaluate(LikelihoodModel& model, std::span<const double> theta, const EdgeCounts& counts,
                    std::span<double> grad = {}) {
  try {
    return model.evaluate(theta, counts, grad);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonConvergence) throw;
    model.reset();
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

FitResult fit(LikelihoodModel& model, const EdgeCounts& counts, double lambda,
              const IrlConfig& config, std::span<const double> start) {
  if (!(lambda >= 0.0)) fail(ErrorCode::InvalidArgument, "lambda must be non-negative");
  if (counts.steps <= 0.0) fail(ErrorCode::EmptyDataset, "no demonstration steps to fit");
  const std::size_t np = model.num_params();
  const std::size_t nw = model.num_weights();
  const double scale = 1.0 / counts.steps;
  const double pen = lambda * scale;

  std::vector<double> x(np, 0.0);
  if (!start.empty()) {
    if (start.size() != np) fail(ErrorCode::InvalidArgument, "start vector has the wrong size");
    x.assign(start.begin(), start.end());
  }
  FitResult out;
  double lx = model.evaluate(x, counts) * scale;
  double fx = lx - pen * l1(x, nw);
  std::vector<double> y = x, xprev = x, z(np), gy(np);
  double t = config.step;
  double tk = 1.0;
  int it = 0;
  for (; it < config.max_iter; ++it) {
    const double ly = try_evaluate(model, y, counts, gy) * scale;
    if (!std::isfinite(ly)) {
      y = x;  // momentum overshoot: restart from the last accepted iterate
      tk = 1.0;
      continue;
    }
    for (auto& g : gy) g *= scale;
    double lz = -std::numeric_limits<double>::infinity();
    double step2 = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < np; ++i) {
        const double u = y[i] + t * gy[i];
        z[i] = i < nw ? std::copysign(std::max(std::abs(u) - t * pen, 0.0), u) : u;
      }
      double lin = 0.0;
      step2 = 0.0;
      for (std::size_t i = 0; i < np; ++i) {
        const double d = z[i] - y[i];
        lin += gy[i] * d;
        step2 += d * d;
      }
      lz = try_evaluate(model, z, counts) * scale;
      if (std::isfinite(lz) && lz >= ly + lin - step2 / (2.0 * t) - 1e-14 * std::abs(ly)) break;
      t *= 0.5;
    }
    const double fz = std::isfinite(lz) ? lz - pen * l1(z, nw) : -std::numeric_limits<double>::infinity();
    double dmax = 0.0;
    for (std::size_t i = 0; i < np; ++i) dmax = std::max(dmax, std::abs(z[i] - y[i]));

    xprev = x;
    const bool accept = fz >= fx;
    if (accept) {
      x = z;
      fx = fz;
      lx = lz;
    }
    out.trace.push_back(fx);
    if (dmax < config.tol) {
      out.converged = true;
      ++it;
      break;
    }
    const double tk1 = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    if (accept) {
      for (std::size_t i = 0; i < np; ++i)
        y[i] = x[i] + ((tk - 1.0) / tk1) * (x[i] - xprev[i]);
      tk = tk1;
    } else {
      // Monotone variant: fall back to the last iterate and drop momentum.
      y = x;
      tk = 1.0;
    }
    t = std::min(t * 1.25, 1e3);
  }
  out.theta = x;
  out.iterations = it;
  out.loglik = lx / scale;
  out.objective = out.loglik - lambda * l1(x, nw);
  return out;
}

FitResult fit(const Demonstrations& demos, const FeatureMap& features, double lambda,
              const IrlConfig& config) {
  LikelihoodModel model(demos, features, config.gamma);
  return fit(model, EdgeCounts::all(demos), lambda, config);
}

std::vector<double> IrlResult::weights() const {
  if (channel == FeedbackChannel::QOnly) return {};
  if (channel == FeedbackChannel::None) return theta;
  return {theta.begin(), theta.end() - 1};
}

std::optional<double> IrlResult::gain() const {
  if (channel == FeedbackChannel::None || theta.empty()) return std::nullopt;
  return theta.back();
}

std::vector<int> assign_folds(std::size_t trajectories, int folds, std::uint64_t seed) {
  if (folds < 2) fail(ErrorCode::InvalidArgument, "need at least two folds");
  std::vector<std::size_t> order(trajectories);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit bounded draw keeps folds identical across
  // standard libraries.
  for (std::size_t i = trajectories; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<int> fold(trajectories);
  for (std::size_t i = 0; i < trajectories; ++i)
    fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  return fold;
}

namespace {

IrlResult run_cv(const Demonstrations& demos, const FeatureMap& features, const IrlConfig& config,
                 FeedbackChannel channel, const std::vector<double>& feedback, bool parallel) {
  const std::size_t ntraj = demos.paths.size();
  if (config.folds < 2) fail(ErrorCode::InvalidArgument, "need at least two folds");
  if (ntraj < static_cast<std::size_t>(config.folds))
    fail(ErrorCode::TooFewTrajectories, "need at least " + std::to_string(config.folds) +
                                            " trajectories, got " + std::to_string(ntraj));
  if (config.lambdas.empty()) fail(ErrorCode::InvalidArgument, "empty lambda grid");
  const auto fold = assign_folds(ntraj, config.folds, config.seed);
  const std::size_t nl = config.lambdas.size();
  const int nf = config.folds;

  IrlResult res;
  res.lambdas = config.lambdas;
  res.cv_folds.assign(nl, std::vector<double>(static_cast<std::size_t>(nf), 0.0));
  std::vector<std::string> errors(static_cast<std::size_t>(nf));

  auto run_fold = [&](int f) {
    std::vector<std::size_t> train, valid;
    for (std::size_t i = 0; i < ntraj; ++i) (fold[i] == f ? valid : train).push_back(i);
    const auto tc = EdgeCounts::from_paths(demos, train);
    const auto vc = EdgeCounts::from_paths(demos, valid);
    LikelihoodModel model(demos, features, config.gamma, channel, feedback);
    std::vector<double> theta(model.num_params(), 0.0);
    for (std::size_t l = 0; l < nl; ++l) {
      if (tc.steps > 0.0) theta = fit(model, tc, config.lambdas[l], config, theta).theta;
      res.cv_folds[l][static_cast<std::size_t>(f)] = vc.steps > 0.0 ? model.evaluate(theta, vc) : 0.0;
    }
  };

  if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int f = 0; f < nf; ++f) {
      try {
        run_fold(f);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(f)] = e.what();
      }
    }
    for (const auto& e : errors)
      if (!e.empty()) fail(ErrorCode::NonConvergence, "cross-validation fold failed: " + e);
  } else {
    for (int f = 0; f < nf; ++f) run_fold(f);
  }

  res.cv_mean.resize(nl);
  std::size_t best = 0;
  for (std::size_t l = 0; l < nl; ++l) {
    res.cv_mean[l] = std::accumulate(res.cv_folds[l].begin(), res.cv_folds[l].end(), 0.0) / nf;
    if (res.cv_mean[l] > res.cv_mean[best]) best = l;
  }
  res.lambda = config.lambdas[best];

  LikelihoodModel model(demos, features, config.gamma, channel, feedback);
  const auto all = EdgeCounts::all(demos);
  auto r = fit(model, all, res.lambda, config);
  res.theta = std::move(r.theta);
  res.train_loglik = r.loglik;
  res.iterations = r.iterations;
  res.converged = r.converged;
  res.trace = std::move(r.trace);
  res.steps = static_cast<std::size_t>(all.steps);
  res.trajectories = ntraj;
  res.mode = features.mode;
  res.channel = channel;
  return res;
}

}  // namespace

IrlResult cross_validate(const Demonstrations& demos, const FeatureMap& features,
                         const IrlConfig& config, FeedbackChannel channel,
                         const std::vector<double>& feedback) {
  return run_cv(demos, features, config, channel, feedback, true);
}

IrlResult cross_validate_serial(const Demonstrations& demos, const FeatureMap& features,
                                const IrlConfig& config, FeedbackChannel channel,
                                const std::vector<double>& feedback) {
  return run_cv(demos, features, config, channel, feedback, false);
}

std::vector<double> reward_map_export(std::span<const double> weights, const FeatureMap& features,
                                      const StateGraph& graph) {
  std::vector<double> map(graph.num_states(), 0.0);
  double scale = 0.0;
  for (std::size_t j = 0; j < features.dim(); ++j) scale = std::max(scale, std::abs(weights[j]));
  if (scale == 0.0) return map;
  for (std::size_t s = 0; s < graph.num_states(); ++s) {
    const int j = features.feature_of[s];
    if (j >= 0) map[s] = weights[static_cast<std::size_t>(j)] / scale;
  }
  return map;
}

void write_reward_csv(std::ostream& out, const StateGraph& graph, std::span<const double> map) {
  out << "state,reward\n" << std::setprecision(17);
  for (std::size_t s = 0; s < graph.num_states(); ++s) out << graph.label(s) << ',' << map[s] << '\n';
}

nlohmann::json to_json(const IrlResult& r, const FeatureMap& features) {
  using nlohmann::json;
  json weights = json::array();
  const auto w = r.weights();
  for (std::size_t j = 0; j < w.size(); ++j)
    weights.push_back({{"state", features.states[j].str()}, {"w", w[j]}});
  json j{{"features", std::string(to_string(r.mode))},
         {"lambda", r.lambda},
         {"lambdas", r.lambdas},
         {"cv_mean_loglik", r.cv_mean},
         {"cv_fold_loglik", r.cv_folds},
         {"weights", std::move(weights)},
         {"train_loglik", r.train_loglik},
         {"steps", r.steps},
         {"trajectories", r.trajectories},
         {"iterations", r.iterations},
         {"converged", r.converged},
         {"trace", r.trace}};
  if (auto k = r.gain()) j["k"] = *k;
  return j;
}

}  // namespace tohfb::irl
