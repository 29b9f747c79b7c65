#pragma once
// Bellman sweep kernels over a compressed-row edge list. Each kernel has a
// serial reference and an OpenMP variant; both perform a Jacobi update, so
// per-state results are bit-identical regardless of thread count.

#include <cstddef>
#include <cstdint>
#include <span>

namespace tohfb::kernels {

struct SweepProblem {
  std::span<const std::size_t> offsets;  // num_states + 1
  std::span<const std::uint32_t> next;   // successor per edge
  std::span<const double> reward;        // reward per edge
  std::span<const std::uint8_t> terminal;
  double gamma = 0.95;
};

/// v_out(s) = max_e gamma * (r(e) + vbar(next)), vbar(terminal) = 0.
/// Terminal rows are copied through. Returns the sup-norm change.
double hard_sweep_serial(const SweepProblem& p, std::span<const double> v_in,
                         std::span<double> v_out);
double hard_sweep_parallel(const SweepProblem& p, std::span<const double> v_in,
                           std::span<double> v_out);

/// v_out(s) = log sum_e exp(r(e) + gamma * vbar(next)), vbar(terminal) = 0.
double soft_sweep_serial(const SweepProblem& p, std::span<const double> v_in,
                         std::span<double> v_out);
double soft_sweep_parallel(const SweepProblem& p, std::span<const double> v_in,
                           std::span<double> v_out);

/// Picks the OpenMP variant once the state count makes threading pay off.
double hard_sweep(const SweepProblem& p, std::span<const double> v_in, std::span<double> v_out);
double soft_sweep(const SweepProblem& p, std::span<const double> v_in, std::span<double> v_out);

inline constexpr std::size_t kParallelThreshold = 2187;  // 3^7

int max_threads();

}  // namespace tohfb::kernels
