#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cstdint>
#include <span>
#include <vector>

#include "tohfb/mdp.hpp"

namespace tohfb::irl {

/// Newton solver for the soft Bellman fixed point
///   V(s) = log sum_a exp(r(s,a) + gamma * V(s')),  V = 0 on terminals.
/// Each Newton step is an exact soft policy evaluation, so iterates improve
/// monotonically and converge quadratically near the fixed point. The last
/// factorization of (I - gamma P_pi) is kept for adjoint solves.
class SoftBellmanSolver {
 public:
  SoftBellmanSolver(TopologyPtr topology, std::vector<std::uint8_t> terminal, double gamma);

  /// Warm-starts from the previous solution. Throws NonConvergence.
  void solve(std::span<const double> reward, double tol = kDefaultTolerance);
  void reset();

  std::span<const double> v() const { return v_; }
  std::span<const double> q() const { return q_; }
  std::span<const double> policy() const { return pi_; }
  int last_newton_steps() const { return steps_; }

  /// Solves (I - gamma P_pi)^T nu = rhs for the policy of the last solve.
  /// Both vectors are indexed by state; terminal entries of nu are 0.
  void solve_adjoint(std::span<const double> rhs, std::span<double> nu);

  const Topology& topology() const { return *topology_; }
  std::span<const std::uint8_t> terminal() const { return terminal_; }
  double gamma() const { return gamma_; }

 private:
  void evaluate_q(std::span<const double> reward);
  double policy_and_residual(std::vector<double>& lse);
  void factorize();

  TopologyPtr topology_;
  std::vector<std::uint8_t> terminal_;
  double gamma_;

  std::vector<int> row_of_;            // state -> unknown index, -1 for terminals
  std::vector<std::size_t> state_of_;  // unknown index -> state
  std::vector<int> nnz_of_edge_;       // edge -> value slot of P entry, -1 if next terminal
  std::vector<int> nnz_of_diag_;       // unknown -> value slot of the diagonal

  Eigen::SparseMatrix<double> a_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool analyzed_ = false;
  bool factorized_ = false;

  std::vector<double> v_;
  std::vector<double> q_;
  std::vector<double> pi_;
  int steps_ = 0;
};

}  // namespace tohfb::irl
