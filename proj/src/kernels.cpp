#include "proxswitch/kernels.hpp"

#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace proxswitch::kernels {

namespace {

int resolve_workers(int workers) {
#ifdef _OPENMP
  return workers > 0 ? workers : omp_get_max_threads();
#else
  (void)workers;
  return 1;
#endif
}

}  // namespace

double max_subgradient_norm_serial(const FunctionOracle& oracle,
                                   const Matrix& samples) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    best = std::max(best, oracle(samples.col(j)).subgradient.norm());
  }
  return best;
}

double max_subgradient_norm_parallel(const FunctionOracle& oracle,
                                     const Matrix& samples, int workers) {
  const Eigen::Index cols = samples.cols();
  double best = 0.0;
#pragma omp parallel for reduction(max : best) schedule(static) \
    num_threads(resolve_workers(workers))
  for (Eigen::Index j = 0; j < cols; ++j) {
    best = std::max(best, oracle(samples.col(j)).subgradient.norm());
  }
  return best;
}

Vector evaluate_batch_serial(const FunctionOracle& oracle,
                             const Matrix& samples) {
  Vector out(samples.cols());
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    out[j] = oracle.value(samples.col(j));
  }
  return out;
}

Vector evaluate_batch_parallel(const FunctionOracle& oracle,
                               const Matrix& samples, int workers) {
  const Eigen::Index cols = samples.cols();
  Vector out(cols);
#pragma omp parallel for schedule(static) num_threads(resolve_workers(workers))
  for (Eigen::Index j = 0; j < cols; ++j) {
    out[j] = oracle.value(samples.col(j));
  }
  return out;
}

void parallel_for(std::int64_t count, int workers,
                  const std::function<void(std::int64_t)>& body) {
  std::exception_ptr failure;
  std::mutex failure_mutex;
#pragma omp parallel for schedule(dynamic, 1) \
    num_threads(resolve_workers(workers))
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over a golden-ratio stride
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace proxswitch::kernels
