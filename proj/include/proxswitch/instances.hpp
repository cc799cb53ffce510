#pragma once

#include "proxswitch/problem.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace proxswitch {

// SCAD with a = 2, lambda = 1 scaled so that s(u) = 3 for |u| > 2.
double scad(double u);
/// Selection from the Clarke subdifferential of scad; 0 at u = 0.
double scad_grad(double u);
/// sum_i scad(x_i) - p and its coordinatewise subgradient.
Evaluation scad_constraint_eval(const Vector& x, double p);

/// Sparse phase retrieval: min (1/m) sum |(a_i^T x)^2 - b_i^2| subject to a
/// SCAD sparsity budget over the box [-10, 10]^n.
struct SprInstance {
  Matrix A;        // m x n
  Vector b_sq;     // (A x_star)^2 + eta
  Vector eta;
  Vector x_star;
  std::int64_t nnz = 0;
  double p = 0.0;
  BoxDomain box;
  double rho = 3.0;
  double rho_hat = 6.0;
  double M_estimate = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return A.cols(); }
  Eigen::Index m() const { return A.rows(); }
};

Evaluation spr_f_eval(const SprInstance& instance, const Vector& x);

/// Number of uniform box samples behind SprInstance::M_estimate.
inline constexpr int kMEstimateSamples = 10000;
inline constexpr double kMEstimateInflation = 1.2;

/// Deterministic under seed. A ~ N(0,1), x_star has nnz entries uniform in
/// +-[5, 10], eta ~ N(0,1), b_sq = (A x_star)^2 + eta.
SprInstance spr_generate(Eigen::Index n, Eigen::Index m, Eigen::Index nnz,
                         double p, std::uint64_t seed);

/// 1.2 x the largest objective/constraint subgradient norm over uniform
/// samples from the box.
double estimate_M(const SprInstance& instance, std::uint64_t seed,
                  int samples = kMEstimateSamples);

/// Same instance with a different SCAD budget (M is unaffected by p).
SprInstance with_budget(const SprInstance& instance, double p);

/// f_lb = 0, g_lb = -p, rho from the instance.
ConstrainedProblem to_problem(const SprInstance& instance);

std::string to_json(const SprInstance& instance);
SprInstance spr_from_json(std::string_view text);

// Strongly convex pairs with closed-form optima, used to certify the
// switching subgradient rate.
enum class CatalogId { Quad1d, Quad2d, Unbounded };

struct ConvexTestInstance {
  std::string name;
  FunctionOracle F;
  FunctionOracle G;
  BoxDomain domain;
  Vector z0;
  Vector z_star;
  double F_star = 0.0;
  double mu = 0.0;
  double L0sq = 0.0;  // valid for every tau <= kCatalogMaxTau
  double L1 = 0.0;
};

inline constexpr double kCatalogMaxTau = 0.1;

ConvexTestInstance convex_test_instance(CatalogId id);
CatalogId parse_catalog_id(std::string_view name);
std::string_view catalog_name(CatalogId id);

}  // namespace proxswitch
