#pragma once

#include "proxswitch/problem.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace proxswitch::kernels {

// Data-parallel loops. Each has a serial reference kept for testing; the
// parallel variants must agree with it exactly (the reductions are max or
// per-index writes, so results do not depend on thread scheduling).

/// Largest subgradient norm of oracle over the columns of samples.
double max_subgradient_norm_serial(const FunctionOracle& oracle,
                                   const Matrix& samples);
double max_subgradient_norm_parallel(const FunctionOracle& oracle,
                                     const Matrix& samples, int workers = 0);

/// Values of oracle at each column of samples.
Vector evaluate_batch_serial(const FunctionOracle& oracle,
                             const Matrix& samples);
Vector evaluate_batch_parallel(const FunctionOracle& oracle,
                               const Matrix& samples, int workers = 0);

/// Calls body(i) for i in [0, count) across workers threads; results indexed
/// by i so output order is independent of scheduling. workers <= 0 uses the
/// OpenMP default.
void parallel_for(std::int64_t count, int workers,
                  const std::function<void(std::int64_t)>& body);

template <class T, class Fn>
std::vector<T> parallel_map(std::int64_t count, int workers, Fn&& fn) {
  std::vector<T> out(static_cast<std::size_t>(count));
  parallel_for(count, workers,
               [&](std::int64_t i) { out[static_cast<std::size_t>(i)] = fn(i); });
  return out;
}

/// Independent 64-bit stream seed for (base, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace proxswitch::kernels
