#include "proxswitch/prox.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace proxswitch {

void ProxConfig::validate(const ConstrainedProblem& problem) const {
  if (!(rho_hat > std::max(problem.rho, 1.0))) {
    throw InputError("prox: rho_hat must exceed max(rho, 1)");
  }
  if (!(epsilon > 0.0)) throw InputError("prox: epsilon must be positive");
  if (K_max < 1) throw InputError("prox: K_max must be at least 1");
  if (mode == Mode::KKT && !(sigma && *sigma > 0.0)) {
    throw InputError("prox: KKT mode requires a positive sigma");
  }
  if (T_override && *T_override < 1) {
    throw InputError("prox: T override must be at least 1");
  }
  if (tau_override && !(*tau_override > 0.0)) {
    throw InputError("prox: tau override must be positive");
  }
}

std::pair<FunctionOracle, FunctionOracle> build_subproblem(
    const ConstrainedProblem& problem, const Vector& center, double rho_hat) {
  if (!problem.domain.contains(center)) {
    throw InputError("build_subproblem: center outside the domain");
  }
  auto penalize = [center, rho_hat](FunctionOracle base) {
    return FunctionOracle(base.dim(), [base, center, rho_hat](const Vector& x) {
      Evaluation e = base(x);
      const Vector d = x - center;
      e.value += 0.5 * rho_hat * d.squaredNorm();
      e.subgradient.noalias() += rho_hat * d;
      return e;
    });
  };
  return {penalize(problem.f), penalize(problem.constraint())};
}

NonLipschitzConstants nonlipschitz_constants(double M, double g_lb,
                                             double rho_hat) {
  if (!(M > 0.0)) throw InputError("nonlipschitz_constants: M must be positive");
  if (!(g_lb <= 0.0)) {
    throw InputError("nonlipschitz_constants: g_lb must be nonpositive");
  }
  return {9.0 * M * M - 6.0 * rho_hat * g_lb, 6.0 * rho_hat};
}

double diameter_D(double g_lb, double rho, double rho_hat) {
  if (!(rho_hat > rho)) throw InputError("diameter_D: need rho_hat > rho");
  if (!(g_lb <= 0.0)) throw InputError("diameter_D: g_lb must be nonpositive");
  return std::sqrt(-8.0 * g_lb / (rho_hat - rho));
}

double dual_bound_B(double M, double rho_hat, double D, double sigma) {
  if (!(sigma > 0.0)) throw InputError("dual_bound_B: sigma must be positive");
  return (M + rho_hat * D) / sigma;
}

namespace {

void check_param_inputs(double rho, double rho_hat, double epsilon) {
  if (!(rho_hat > std::max(rho, 1.0))) {
    throw InputError("inner params: rho_hat must exceed max(rho, 1)");
  }
  if (!(epsilon > 0.0)) throw InputError("inner params: epsilon must be positive");
}

}  // namespace

InnerParams params_fj(double rho, double rho_hat, double epsilon, double L0sq,
                      double L1, double D) {
  check_param_inputs(rho, rho_hat, epsilon);
  const double mu = rho_hat - rho;
  InnerParams out;
  out.tau = mu * epsilon * epsilon / (4.0 * rho_hat * (2.0 * rho_hat - rho));
  // With tau as above, the switching-subgradient bound with z0 = x_k and
  // |z0 - z*| <= D is exactly the stated T_FJ.
  out.T = theorem2_min_T(L0sq, L1, mu, out.tau, D);
  return out;
}

InnerParams params_kkt(double rho, double rho_hat, double epsilon, double L0sq,
                       double L1, double D, double B) {
  check_param_inputs(rho, rho_hat, epsilon);
  if (!(B >= 0.0)) throw InputError("params_kkt: B must be nonnegative");
  const double mu = rho_hat - rho;
  InnerParams out;
  out.tau = mu * epsilon * epsilon /
            (4.0 * (1.0 + B) * (1.0 + B) * rho_hat * (2.0 * rho_hat - rho));
  out.T = theorem2_min_T(L0sq, L1, mu, out.tau, D);
  return out;
}

InnerParams resolve_inner_params(const ConstrainedProblem& problem,
                                 const ProxConfig& config) {
  config.validate(problem);
  const auto c = nonlipschitz_constants(problem.M, problem.g_lb, config.rho_hat);
  const double D = diameter_D(problem.g_lb, problem.rho, config.rho_hat);
  InnerParams params;
  if (config.mode == Mode::FJ) {
    params = params_fj(problem.rho, config.rho_hat, config.epsilon, c.L0sq,
                       c.L1, D);
  } else {
    const double B = dual_bound_B(problem.M, config.rho_hat, D, *config.sigma);
    params = params_kkt(problem.rho, config.rho_hat, config.epsilon, c.L0sq,
                        c.L1, D, B);
  }
  if (config.tau_override) params.tau = *config.tau_override;
  if (config.T_override) params.T = *config.T_override;
  return params;
}

SsmConfig inner_config(const ConstrainedProblem& problem, double rho_hat,
                       const InnerParams& params) {
  SsmConfig cfg;
  cfg.tau = params.tau;
  cfg.T = params.T;
  cfg.mu = rho_hat - problem.rho;
  cfg.L1 = 6.0 * rho_hat;
  return cfg;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::None:
      return "";
    case StopReason::Budget:
      return "budget";
    case StopReason::Infeasible:
      return "infeasible";
    case StopReason::NonDecrease:
      return "non_decrease";
  }
  return "";
}

const OuterRecord& Trajectory::last_feasible() const {
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->g <= 0.0) return *it;
  }
  throw PreconditionError("trajectory has no feasible record");
}

std::size_t Trajectory::pre_stop_count() const {
  return first_stop_k ? static_cast<std::size_t>(*first_stop_k)
                      : records.size();
}

std::int64_t Trajectory::completed_outer() const {
  return records.empty() ? 0 : records.back().k;
}

std::pair<StationarityCertificate, StationarityCertificate>
certify_from_tail(const ConstrainedProblem& problem, const Vector& center,
                  double rho_hat, const SsmResult& inner, const Vector& x,
                  double cap) {
  const TailAggregate& tail = inner.tail;
  Vector zeta_f;
  if (tail.objective_weight > 0.0) {
    zeta_f = tail.objective_subgradient -
             rho_hat * (tail.objective_point - center);
  } else {
    zeta_f = problem.f(x).subgradient;
  }
  Vector zeta_g;
  if (tail.constraint_weight > 0.0) {
    zeta_g = tail.constraint_subgradient -
             rho_hat * (tail.constraint_point - center);
  } else {
    zeta_g = tail.constraint_subgradient_all -
             rho_hat * (tail.constraint_point_all - center);
  }
  const double g_value = max_constraint_eval(problem, x).value;
  return {fj_certificate(problem.domain, x, zeta_f, zeta_g, g_value),
          kkt_certificate(problem.domain, x, zeta_f, zeta_g, g_value, cap)};
}

namespace {

double multiplier_cap(const ConstrainedProblem& problem,
                      const ProxConfig& config) {
  if (config.mode == Mode::KKT) {
    const double D = diameter_D(problem.g_lb, problem.rho, config.rho_hat);
    return lambda_cap(dual_bound_B(problem.M, config.rho_hat, D, *config.sigma));
  }
  return lambda_cap();
}

}  // namespace

Trajectory run(const ConstrainedProblem& problem, const ProxConfig& config,
               const Vector& x0) {
  problem.validate();
  config.validate(problem);
  if (x0.size() != problem.dim() || !problem.domain.contains(x0)) {
    throw InputError("run: x0 outside the domain");
  }
  const FunctionOracle g_oracle = problem.constraint();
  const double g0 = g_oracle.value(x0);
  if (!(g0 <= 0.0)) {
    throw PreconditionError("run: infeasible x0, g(x0) = " + std::to_string(g0));
  }

  Trajectory traj;
  traj.mode = config.mode;
  traj.rho_hat = config.rho_hat;
  traj.inner = resolve_inner_params(problem, config);
  const SsmConfig ssm_cfg = inner_config(problem, config.rho_hat, traj.inner);
  const double cap = multiplier_cap(problem, config);

  OuterRecord first;
  first.k = 0;
  first.x = x0;
  first.f = problem.f.value(x0);
  first.g = g0;
  first.fj = fj_residual(problem, x0);
  first.kkt = kkt_residual(problem, x0, cap);
  traj.records.push_back(std::move(first));

  for (std::int64_t k = 0; k < config.K_max; ++k) {
    OuterRecord& prev = traj.records.back();
    const auto [F, G] = build_subproblem(problem, prev.x, config.rho_hat);
    const SsmResult inner = ssm_solve(F, G, problem.domain, prev.x, ssm_cfg);
    traj.subgradient_evaluations += ssm_cfg.T;
    traj.oracle_calls += inner.branch_tests + inner.step_subgradients;

    OuterRecord next;
    next.k = k + 1;
    next.x = inner.z_bar;
    next.f = problem.f.value(next.x);
    next.g = g_oracle.value(next.x);
    next.inner_T = ssm_cfg.T;
    next.objective_steps = inner.objective_steps;
    next.constraint_steps = inner.constraint_steps;
    next.subproblem_infeasibility = G.value(next.x);
    std::tie(next.fj, next.kkt) =
        certify_from_tail(problem, prev.x, config.rho_hat, inner, next.x, cap);
    prev.step_norm = (next.x - prev.x).norm();

    const double f_prev = prev.f;
    traj.records.push_back(std::move(next));
    const OuterRecord& cur = traj.records.back();
    StopReason fired = StopReason::None;
    if (cur.g > 0.0) {
      fired = StopReason::Infeasible;
    } else if (cur.f >= f_prev) {
      fired = StopReason::NonDecrease;
    }
    if (fired != StopReason::None && !traj.first_stop_k) {
      traj.first_stop_k = cur.k;
      traj.first_stop_reason = fired;
    }
    if (fired == StopReason::Infeasible ||
        (fired == StopReason::NonDecrease && config.halt_on_non_decrease)) {
      traj.stop_reason = fired;
      return traj;
    }
  }
  traj.stop_reason = StopReason::Budget;
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const auto old_precision = out.precision();
  out << std::setprecision(17);
  out << "k,f,g,step_norm,fj_residual,kkt_residual,lambda_hat,gamma0_hat,"
         "comp_slack,inner_T,stop_reason\n";
  for (std::size_t i = 0; i < trajectory.records.size(); ++i) {
    const OuterRecord& r = trajectory.records[i];
    const bool last = i + 1 == trajectory.records.size();
    const double comp = trajectory.mode == Mode::KKT ? r.kkt.comp_slack
                                                     : r.fj.comp_slack;
    out << r.k << ',' << r.f << ',' << r.g << ',';
    if (r.step_norm) out << *r.step_norm;
    out << ',' << r.fj.residual << ',' << r.kkt.residual << ','
        << r.kkt.lambda << ',' << r.fj.gamma0 << ',' << comp << ','
        << r.inner_T << ',';
    if (last) out << to_string(trajectory.stop_reason);
    out << '\n';
  }
  out.precision(old_precision);
}

RefinedPoint refine(const ConstrainedProblem& problem, const ProxConfig& config,
                    const Vector& x_final) {
  problem.validate();
  InnerParams params = resolve_inner_params(problem, config);
  if (params.T > std::numeric_limits<std::int64_t>::max() / kRefineBudgetFactor) {
    throw InputError("refine: inner budget overflows");
  }
  params.T *= kRefineBudgetFactor;
  const SsmConfig cfg = inner_config(problem, config.rho_hat, params);
  const auto [F, G] = build_subproblem(problem, x_final, config.rho_hat);
  const SsmResult inner = ssm_solve(F, G, problem.domain, x_final, cfg);

  RefinedPoint out;
  out.x_lo = inner.z_bar;
  out.f = problem.f.value(out.x_lo);
  out.g = max_constraint_eval(problem, out.x_lo).value;
  std::tie(out.fj, out.kkt) =
      certify_from_tail(problem, x_final, config.rho_hat, inner, out.x_lo,
                        multiplier_cap(problem, config));
  return out;
}

Vector refine_x_lo(const ConstrainedProblem& problem, const ProxConfig& config,
                   const Vector& x_final) {
  return refine(problem, config, x_final).x_lo;
}

}  // namespace proxswitch
