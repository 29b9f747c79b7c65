#include "tohfb/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace tohfb::kernels {

namespace {

inline double hard_row(const SweepProblem& p, std::span<const double> v, std::size_t s) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t e = p.offsets[s]; e < p.offsets[s + 1]; ++e) {
    const auto nx = p.next[e];
    const double cont = p.terminal[nx] ? 0.0 : v[nx];
    best = std::max(best, p.gamma * (p.reward[e] + cont));
  }
  return best;
}

inline double soft_row(const SweepProblem& p, std::span<const double> v, std::size_t s) {
  const std::size_t b = p.offsets[s];
  const std::size_t end = p.offsets[s + 1];
  auto q = [&](std::size_t e) {
    const auto nx = p.next[e];
    return p.reward[e] + p.gamma * (p.terminal[nx] ? 0.0 : v[nx]);
  };
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t e = b; e < end; ++e) m = std::max(m, q(e));
  double acc = 0.0;
  for (std::size_t e = b; e < end; ++e) acc += std::exp(q(e) - m);
  return m + std::log(acc);
}

}  // namespace

double hard_sweep_serial(const SweepProblem& p, std::span<const double> v_in,
                         std::span<double> v_out) {
  const std::size_t n = p.offsets.size() - 1;
  double residual = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    v_out[s] = p.terminal[s] ? v_in[s] : hard_row(p, v_in, s);
    residual = std::max(residual, std::abs(v_out[s] - v_in[s]));
  }
  return residual;
}

double hard_sweep_parallel(const SweepProblem& p, std::span<const double> v_in,
                           std::span<double> v_out) {
  const auto n = static_cast<std::ptrdiff_t>(p.offsets.size() - 1);
  double residual = 0.0;
#pragma omp parallel for schedule(static) reduction(max : residual)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    v_out[s] = p.terminal[s] ? v_in[s] : hard_row(p, v_in, s);
    residual = std::max(residual, std::abs(v_out[s] - v_in[s]));
  }
  return residual;
}

double soft_sweep_serial(const SweepProblem& p, std::span<const double> v_in,
                         std::span<double> v_out) {
  const std::size_t n = p.offsets.size() - 1;
  double residual = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    v_out[s] = p.terminal[s] ? 0.0 : soft_row(p, v_in, s);
    residual = std::max(residual, std::abs(v_out[s] - v_in[s]));
  }
  return residual;
}

double soft_sweep_parallel(const SweepProblem& p, std::span<const double> v_in,
                           std::span<double> v_out) {
  const auto n = static_cast<std::ptrdiff_t>(p.offsets.size() - 1);
  double residual = 0.0;
#pragma omp parallel for schedule(static) reduction(max : residual)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    v_out[s] = p.terminal[s] ? 0.0 : soft_row(p, v_in, s);
    residual = std::max(residual, std::abs(v_out[s] - v_in[s]));
  }
  return residual;
}

int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

double hard_sweep(const SweepProblem& p, std::span<const double> v_in, std::span<double> v_out) {
  if (p.offsets.size() - 1 >= kParallelThreshold && max_threads() > 1)
    return hard_sweep_parallel(p, v_in, v_out);
  return hard_sweep_serial(p, v_in, v_out);
}

double soft_sweep(const SweepProblem& p, std::span<const double> v_in, std::span<double> v_out) {
  if (p.offsets.size() - 1 >= kParallelThreshold && max_threads() > 1)
    return soft_sweep_parallel(p, v_in, v_out);
  return soft_sweep_serial(p, v_in, v_out);
}

}  // namespace tohfb::kernels
