#pragma once

#include "proxswitch/problem.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace proxswitch {

// Switching subgradient method for min F(z) s.t. G(z) <= 0 over a box, with
// F and G mu-strongly convex. Steps on F while G(z_t) <= tau, on G otherwise.

struct SsmConfig {
  double tau = 1e-2;
  std::int64_t T = 1000;
  double mu = 1.0;
  double L1 = 0.0;
  bool record_trajectory = false;
  /// Fraction of the run (from the end) over which subgradients are averaged
  /// into SsmResult::tail.
  double tail_fraction = 0.5;

  void validate() const;
};

enum class Branch { Objective, Constraint };

struct SsmStep {
  std::int64_t t = 0;
  Vector z;
  double F = 0.0;
  double G = 0.0;
  Branch branch = Branch::Objective;
};

/// Step-size weighted averages of the subgradients used in the tail of a run.
/// Near the subproblem optimum these approximate the subgradients entering
/// its Fritz-John conditions.
struct TailAggregate {
  Vector objective_subgradient;   // mean of zeta_F over tail I-steps
  Vector objective_point;         // mean of z over the same steps
  double objective_weight = 0.0;  // sum of alpha_t over the same steps
  Vector constraint_subgradient;  // mean of zeta_G over tail J-steps
  Vector constraint_point;
  double constraint_weight = 0.0;
  Vector constraint_subgradient_all;  // mean of zeta_G over every tail step
  Vector constraint_point_all;
};

struct SsmResult {
  Vector z_bar;
  Vector final_iterate;
  std::int64_t objective_steps = 0;   // |I|
  std::int64_t constraint_steps = 0;  // |J|
  /// I was empty; z_bar is z0.
  bool degenerate = false;
  std::int64_t branch_tests = 0;
  std::int64_t step_subgradients = 0;
  TailAggregate tail;
  std::vector<SsmStep> trajectory;
};

/// alpha_t = 2 / (mu (t+2) + L1^2 / (mu (t+1))).
double step_size(std::int64_t t, double mu, double L1);

SsmResult ssm_solve(const FunctionOracle& F, const FunctionOracle& G,
                    const BoxDomain& domain, const Vector& z0,
                    const SsmConfig& config);

/// Smallest T with T >= max{8 L0^2/(mu tau), sqrt(2 L1^2 dist0^2/(mu tau))}.
/// Saturates at INT64_MAX.
std::int64_t theorem2_min_T(double L0sq, double L1, double mu, double tau,
                            double dist0);

}  // namespace proxswitch
