#include "proxswitch/ssm.hpp"

#include <cmath>
#include <limits>

namespace proxswitch {

void SsmConfig::validate() const {
  if (!(tau > 0.0)) throw InputError("ssm: tau must be positive");
  if (T < 1) throw InputError("ssm: T must be at least 1");
  if (!(mu > 0.0)) throw InputError("ssm: mu must be positive");
  if (!(L1 >= 0.0)) throw InputError("ssm: L1 must be nonnegative");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw InputError("ssm: tail_fraction must lie in (0, 1]");
  }
}

double step_size(std::int64_t t, double mu, double L1) {
  if (!(mu > 0.0)) throw InputError("step_size: mu must be positive");
  if (t < 0) throw InputError("step_size: t must be nonnegative");
  const double td = static_cast<double>(t);
  return 2.0 / (mu * (td + 2.0) + L1 * L1 / (mu * (td + 1.0)));
}

namespace {

struct WeightedMean {
  Vector sum;
  Vector point_sum;
  double weight = 0.0;

  explicit WeightedMean(Eigen::Index n)
      : sum(Vector::Zero(n)), point_sum(Vector::Zero(n)) {}

  void add(double w, const Vector& v, const Vector& z) {
    sum.noalias() += w * v;
    point_sum.noalias() += w * z;
    weight += w;
  }
  Vector mean() const { return weight > 0.0 ? Vector(sum / weight) : sum; }
  Vector point() const {
    return weight > 0.0 ? Vector(point_sum / weight) : point_sum;
  }
};

}  // namespace

SsmResult ssm_solve(const FunctionOracle& F, const FunctionOracle& G,
                    const BoxDomain& domain, const Vector& z0,
                    const SsmConfig& config) {
  config.validate();
  const auto n = domain.dim();
  if (z0.size() != n || F.dim() != n || G.dim() != n) {
    throw InputError("ssm_solve: dimension mismatch");
  }
  if (!domain.contains(z0)) {
    throw InputError("ssm_solve: z0 outside the domain");
  }
  Vector z = project(domain, z0);
  {
    const double g0 = G.value(z);
    if (!(g0 <= config.tau)) {
      throw PreconditionError("ssm_solve: G(z0) = " + std::to_string(g0) +
                              " exceeds tau = " + std::to_string(config.tau));
    }
  }

  SsmResult result;
  Vector weighted_sum = Vector::Zero(n);
  double weight_total = 0.0;
  const std::int64_t tail_start = static_cast<std::int64_t>(
      std::floor(static_cast<double>(config.T) * (1.0 - config.tail_fraction)));
  WeightedMean tail_obj(n), tail_con(n), tail_con_all(n);
  if (config.record_trajectory) {
    result.trajectory.reserve(static_cast<std::size_t>(config.T));
  }

  for (std::int64_t t = 0; t < config.T; ++t) {
    const double alpha = step_size(t, config.mu, config.L1);
    Evaluation g = G(z);
    ++result.branch_tests;
    ++result.step_subgradients;
    const bool in_tail = t >= tail_start;
    if (in_tail) tail_con_all.add(alpha, g.subgradient, z);

    if (g.value <= config.tau) {
      Evaluation f = F(z);
      const double w = static_cast<double>(t + 1);
      weighted_sum.noalias() += w * z;
      weight_total += w;
      ++result.objective_steps;
      if (in_tail) tail_obj.add(alpha, f.subgradient, z);
      if (config.record_trajectory) {
        result.trajectory.push_back({t, z, f.value, g.value, Branch::Objective});
      }
      z = project(domain, z - alpha * f.subgradient);
    } else {
      ++result.constraint_steps;
      if (in_tail) tail_con.add(alpha, g.subgradient, z);
      if (config.record_trajectory) {
        result.trajectory.push_back(
            {t, z, F.value(z), g.value, Branch::Constraint});
      }
      z = project(domain, z - alpha * g.subgradient);
    }
  }

  result.final_iterate = z;
  if (weight_total > 0.0) {
    result.z_bar = weighted_sum / weight_total;
  } else {
    result.z_bar = z0;
    result.degenerate = true;
  }
  result.tail.objective_subgradient = tail_obj.mean();
  result.tail.objective_point = tail_obj.point();
  result.tail.objective_weight = tail_obj.weight;
  result.tail.constraint_subgradient = tail_con.mean();
  result.tail.constraint_point = tail_con.point();
  result.tail.constraint_weight = tail_con.weight;
  result.tail.constraint_subgradient_all = tail_con_all.mean();
  result.tail.constraint_point_all = tail_con_all.point();
  return result;
}

std::int64_t theorem2_min_T(double L0sq, double L1, double mu, double tau,
                            double dist0) {
  if (!(mu > 0.0)) throw InputError("theorem2_min_T: mu must be positive");
  if (!(tau > 0.0)) throw InputError("theorem2_min_T: tau must be positive");
  if (!(L0sq >= 0.0) || !(L1 >= 0.0) || !(dist0 >= 0.0)) {
    throw InputError("theorem2_min_T: constants must be nonnegative");
  }
  const double first = 8.0 * L0sq / (mu * tau);
  const double second = std::sqrt(2.0 * L1 * L1 * dist0 * dist0 / (mu * tau));
  const double bound = std::ceil(std::max(first, second));
  constexpr auto cap = std::numeric_limits<std::int64_t>::max();
  if (!(bound < static_cast<double>(cap))) return cap;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(bound));
}

}  // namespace proxswitch
