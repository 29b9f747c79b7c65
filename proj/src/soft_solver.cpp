#include "tohfb/soft_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tohfb/errors.hpp"

namespace tohfb::irl {

namespace {
constexpr int kMaxNewtonSteps = 200;
constexpr double kRoundoffFloor = 1e-9;
}

SoftBellmanSolver::SoftBellmanSolver(TopologyPtr topology, std::vector<std::uint8_t> terminal,
                                     double gamma)
    : topology_(std::move(topology)), terminal_(std::move(terminal)), gamma_(gamma) {
  const auto& topo = *topology_;
  if (terminal_.size() != topo.num_states())
    fail(ErrorCode::InvalidArgument, "terminal mask size mismatch");
  row_of_.assign(topo.num_states(), -1);
  for (std::size_t s = 0; s < topo.num_states(); ++s) {
    if (terminal_[s]) continue;
    row_of_[s] = static_cast<int>(state_of_.size());
    state_of_.push_back(s);
  }
  const auto m = static_cast<Eigen::Index>(state_of_.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(state_of_.size() + topo.num_edges());
  for (Eigen::Index u = 0; u < m; ++u) trips.emplace_back(u, u, 1.0);
  for (std::size_t e = 0; e < topo.num_edges(); ++e) {
    const int r = row_of_[topo.source[e]];
    const int c = row_of_[topo.next[e]];
    if (r >= 0 && c >= 0) trips.emplace_back(r, c, 0.0);
  }
  a_.resize(m, m);
  a_.setFromTriplets(trips.begin(), trips.end());
  a_.makeCompressed();
  nnz_of_diag_.resize(state_of_.size());
  for (Eigen::Index u = 0; u < m; ++u)
    nnz_of_diag_[static_cast<std::size_t>(u)] = static_cast<int>(&a_.coeffRef(u, u) - a_.valuePtr());
  nnz_of_edge_.assign(topo.num_edges(), -1);
  for (std::size_t e = 0; e < topo.num_edges(); ++e) {
    const int r = row_of_[topo.source[e]];
    const int c = row_of_[topo.next[e]];
    if (r >= 0 && c >= 0) nnz_of_edge_[e] = static_cast<int>(&a_.coeffRef(r, c) - a_.valuePtr());
  }
  v_.assign(topo.num_states(), 0.0);
  q_.assign(topo.num_edges(), 0.0);
  pi_.assign(topo.num_edges(), 0.0);
}

void SoftBellmanSolver::reset() {
  std::fill(v_.begin(), v_.end(), 0.0);
  factorized_ = false;
}

void SoftBellmanSolver::evaluate_q(std::span<const double> reward) {
  const auto& topo = *topology_;
  for (std::size_t e = 0; e < topo.num_edges(); ++e) {
    const auto nx = topo.next[e];
    q_[e] = reward[e] + (terminal_[nx] ? 0.0 : gamma_ * v_[nx]);
  }
}

double SoftBellmanSolver::policy_and_residual(std::vector<double>& lse) {
  const auto& topo = *topology_;
  double residual = 0.0;
  for (std::size_t s : state_of_) {
    const std::size_t b = topo.offsets[s];
    const std::size_t end = topo.offsets[s + 1];
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t e = b; e < end; ++e) m = std::max(m, q_[e]);
    double z = 0.0;
    for (std::size_t e = b; e < end; ++e) {
      pi_[e] = std::exp(q_[e] - m);
      z += pi_[e];
    }
    for (std::size_t e = b; e < end; ++e) pi_[e] /= z;
    lse[s] = m + std::log(z);
    residual = std::max(residual, std::abs(lse[s] - v_[s]));
  }
  return residual;
}

void SoftBellmanSolver::factorize() {
  double* val = a_.valuePtr();
  std::fill(val, val + a_.nonZeros(), 0.0);
  for (int slot : nnz_of_diag_) val[slot] = 1.0;
  const auto& topo = *topology_;
  for (std::size_t e = 0; e < topo.num_edges(); ++e)
    if (nnz_of_edge_[e] >= 0) val[nnz_of_edge_[e]] -= gamma_ * pi_[e];
  if (!analyzed_) {
    lu_.analyzePattern(a_);
    analyzed_ = true;
  }
  lu_.factorize(a_);
  if (lu_.info() != Eigen::Success)
    fail(ErrorCode::NonConvergence, "soft policy evaluation matrix is singular");
  factorized_ = true;
}

void SoftBellmanSolver::solve(std::span<const double> reward, double tol) {
  const auto& topo = *topology_;
  if (reward.size() != topo.num_edges())
    fail(ErrorCode::InvalidArgument, "reward table must have one entry per edge");
  factorized_ = false;
  std::vector<double> lse(topo.num_states(), 0.0);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(state_of_.size()));
  double previous = std::numeric_limits<double>::infinity();
  for (steps_ = 0; steps_ < kMaxNewtonSteps; ++steps_) {
    evaluate_q(reward);
    const double residual = policy_and_residual(lse);
    if (!std::isfinite(residual)) {
      // Diverged from a poor warm start; restart from zero once.
      if (steps_ > 0) fail(ErrorCode::NonConvergence, "soft Bellman iterate is not finite");
      std::fill(v_.begin(), v_.end(), 0.0);
      continue;
    }
    // Near machine precision Newton stalls on rounding; accept the floor.
    const bool stalled = residual < kRoundoffFloor && residual >= previous;
    previous = residual;
    if (residual < tol || stalled) {
      for (std::size_t s : state_of_) v_[s] = lse[s];
      evaluate_q(reward);
      policy_and_residual(lse);
      // The adjoint must see the final policy, not the last Newton one.
      factorized_ = false;
      return;
    }
    // Soft policy evaluation: (I - gamma P) V = sum_a pi (r + entropy term).
    for (std::size_t u = 0; u < state_of_.size(); ++u) {
      const std::size_t s = state_of_[u];
      double cont = 0.0;
      for (std::size_t e = topo.offsets[s]; e < topo.offsets[s + 1]; ++e) {
        const auto nx = topo.next[e];
        if (!terminal_[nx]) cont += pi_[e] * v_[nx];
      }
      rhs[static_cast<Eigen::Index>(u)] = lse[s] - gamma_ * cont;
    }
    factorize();
    const Eigen::VectorXd x = lu_.solve(rhs);
    for (std::size_t u = 0; u < state_of_.size(); ++u) v_[state_of_[u]] = x[static_cast<Eigen::Index>(u)];
  }
  fail(ErrorCode::NonConvergence, "soft Bellman Newton iteration did not converge");
}

void SoftBellmanSolver::solve_adjoint(std::span<const double> rhs, std::span<double> nu) {
  if (!factorized_) factorize();
  Eigen::VectorXd b(static_cast<Eigen::Index>(state_of_.size()));
  for (std::size_t u = 0; u < state_of_.size(); ++u) b[static_cast<Eigen::Index>(u)] = rhs[state_of_[u]];
  const Eigen::VectorXd x = lu_.transpose().solve(b);
  std::fill(nu.begin(), nu.end(), 0.0);
  for (std::size_t u = 0; u < state_of_.size(); ++u) nu[state_of_[u]] = x[static_cast<Eigen::Index>(u)];
}

}  // namespace tohfb::irl
