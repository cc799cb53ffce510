#pragma once

#include "proxswitch/problem.hpp"
#include "proxswitch/ssm.hpp"
#include "proxswitch/stationarity.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace proxswitch {

/// Which stationarity notion drives the choice of (tau, T).
enum class Mode { FJ, KKT };

struct ProxConfig {
  double rho_hat = 6.0;
  double epsilon = 1e-2;
  Mode mode = Mode::FJ;
  std::optional<double> sigma;  // strong-MFCQ constant; required for KKT
  std::int64_t K_max = 100;
  std::optional<std::int64_t> T_override;
  std::optional<double> tau_override;
  /// When false, a non-decrease is recorded (Trajectory::first_stop) but the
  /// run continues to K_max. An infeasible iterate always ends the run.
  bool halt_on_non_decrease = true;

  void validate(const ConstrainedProblem& problem) const;
};

struct InnerParams {
  double tau = 0.0;
  std::int64_t T = 0;
};

/// F_k = f + (rho_hat/2)|x - center|^2 and G_k likewise with g.
std::pair<FunctionOracle, FunctionOracle> build_subproblem(
    const ConstrainedProblem& problem, const Vector& center, double rho_hat);

struct NonLipschitzConstants {
  double L0sq = 0.0;
  double L1 = 0.0;
};

/// (9 M^2 - 6 rho_hat g_lb, 6 rho_hat).
NonLipschitzConstants nonlipschitz_constants(double M, double g_lb,
                                             double rho_hat);
/// sqrt(-8 g_lb / (rho_hat - rho)): diameter bound of every subproblem
/// feasible set.
double diameter_D(double g_lb, double rho, double rho_hat);
/// (M + rho_hat D) / sigma: bound on subproblem multipliers under strong MFCQ.
double dual_bound_B(double M, double rho_hat, double D, double sigma);

InnerParams params_fj(double rho, double rho_hat, double epsilon, double L0sq,
                      double L1, double D);
InnerParams params_kkt(double rho, double rho_hat, double epsilon, double L0sq,
                       double L1, double D, double B);

/// Theoretical (tau, T) for the configured mode with overrides applied.
InnerParams resolve_inner_params(const ConstrainedProblem& problem,
                                 const ProxConfig& config);

/// Inner step schedule: alpha_t with mu = rho_hat - rho and L1 = 6 rho_hat.
SsmConfig inner_config(const ConstrainedProblem& problem, double rho_hat,
                       const InnerParams& params);

enum class StopReason { None, Budget, Infeasible, NonDecrease };
std::string_view to_string(StopReason reason);

struct OuterRecord {
  std::int64_t k = 0;
  Vector x;
  double f = 0.0;
  double g = 0.0;
  /// |x_{k+1} - x_k|; absent on the final record.
  std::optional<double> step_norm;
  /// Inner steps spent producing x_k (0 for x_0).
  std::int64_t inner_T = 0;
  std::int64_t objective_steps = 0;
  std::int64_t constraint_steps = 0;
  /// G_{k-1}(x_k): the subproblem constraint at the inner output.
  double subproblem_infeasibility = 0.0;
  StationarityCertificate fj;
  StationarityCertificate kkt;
};

struct Trajectory {
  std::vector<OuterRecord> records;
  StopReason stop_reason = StopReason::None;
  /// First k at which the stopping rule fired, and why; equals the final
  /// record when halting on every stop.
  std::optional<std::int64_t> first_stop_k;
  StopReason first_stop_reason = StopReason::None;
  InnerParams inner;
  Mode mode = Mode::FJ;
  double rho_hat = 0.0;
  std::int64_t subgradient_evaluations = 0;  // sum of inner T
  std::int64_t oracle_calls = 0;             // branch tests + step subgradients

  /// Last record with g(x_k) <= 0.
  const OuterRecord& last_feasible() const;
  /// Records strictly before the first stop (all records if none fired).
  std::size_t pre_stop_count() const;
  /// Index of the stopping record (records.size()-1 when stopped).
  std::int64_t completed_outer() const;
};

/// Certificates at an inner output x, built from the averaged tail
/// subgradients of the solve centered at `center`.
std::pair<StationarityCertificate, StationarityCertificate>
certify_from_tail(const ConstrainedProblem& problem, const Vector& center,
                  double rho_hat, const SsmResult& inner, const Vector& x,
                  double cap);

/// Proximally guided switching subgradient method with the stopping rule
/// g(x_k) > 0 or f(x_k) >= f(x_{k-1}).
Trajectory run(const ConstrainedProblem& problem, const ProxConfig& config,
               const Vector& x0);

/// CSV: k,f,g,step_norm,fj_residual,kkt_residual,lambda_hat,gamma0_hat,
/// comp_slack,inner_T,stop_reason. Floats use 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

struct RefinedPoint {
  Vector x_lo;
  double f = 0.0;
  double g = 0.0;
  StationarityCertificate fj;
  StationarityCertificate kkt;
};

/// One extra inner solve from x_final with 10x the configured inner budget.
/// Its output stands in for the nearby stationary point.
RefinedPoint refine(const ConstrainedProblem& problem, const ProxConfig& config,
                    const Vector& x_final);
Vector refine_x_lo(const ConstrainedProblem& problem, const ProxConfig& config,
                   const Vector& x_final);

inline constexpr std::int64_t kRefineBudgetFactor = 10;

}  // namespace proxswitch
