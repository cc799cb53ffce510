#pragma once

#include "proxswitch/problem.hpp"

#include <optional>

namespace proxswitch {

// Fritz-John and KKT residuals for min f s.t. g <= 0 over a box:
//   FJ:  min_{gamma0 in [0,1]} dist(gamma0 zeta_f + (1-gamma0) zeta_g, -N_X(x))
//   KKT: min_{lambda >= 0}     dist(zeta_f + lambda zeta_g, -N_X(x))
// Both objectives are convex and piecewise quadratic after squaring, with a
// continuous monotone derivative, so they are minimized by bisection on that
// derivative.

enum class StationarityKind { FJ, KKT };

struct StationarityCertificate {
  StationarityKind kind = StationarityKind::FJ;
  double residual = 0.0;
  double gamma0 = 1.0;   // FJ weight on the objective
  double lambda = 0.0;   // KKT multiplier, or gamma / gamma0 for FJ
  double comp_slack = 0.0;
  bool feasible = true;
  /// KKT minimizer sits at the search cap (multiplier divergence).
  bool lambda_at_cap = false;
};

/// Default cap on the KKT multiplier search.
inline constexpr double kLambdaCapFloor = 1e6;

/// max(B, 1e6) when a dual bound is known, else 1e6.
double lambda_cap(std::optional<double> dual_bound = std::nullopt);

StationarityCertificate fj_certificate(const BoxDomain& domain,
                                       const Vector& x, const Vector& zeta_f,
                                       const Vector& zeta_g, double g_value);

StationarityCertificate kkt_certificate(const BoxDomain& domain,
                                        const Vector& x, const Vector& zeta_f,
                                        const Vector& zeta_g, double g_value,
                                        double cap = kLambdaCapFloor);

/// Residuals at the oracles' own subgradient selection at x.
StationarityCertificate fj_residual(const ConstrainedProblem& problem,
                                    const Vector& x);
StationarityCertificate kkt_residual(const ConstrainedProblem& problem,
                                     const Vector& x,
                                     double cap = kLambdaCapFloor);

/// g <= 0, residual <= epsilon and comp_slack <= epsilon^2.
bool check_eps_point(const StationarityCertificate& cert, double g_value,
                     double epsilon);

}  // namespace proxswitch
