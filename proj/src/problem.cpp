#include "proxswitch/problem.hpp"

#include <cmath>
#include <limits>

namespace proxswitch {

BoxDomain::BoxDomain(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw InputError("box: lower and upper bounds differ in dimension");
  }
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (std::isnan(lower_[i]) || std::isnan(upper_[i]) ||
        lower_[i] > upper_[i]) {
      throw InputError("box: lower > upper at coordinate " + std::to_string(i));
    }
  }
}

BoxDomain BoxDomain::free(Eigen::Index n) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return {Vector::Constant(n, -inf), Vector::Constant(n, inf)};
}

BoxDomain BoxDomain::uniform(Eigen::Index n, double lo, double hi) {
  return {Vector::Constant(n, lo), Vector::Constant(n, hi)};
}

bool BoxDomain::contains(const Vector& x, double tol) const {
  if (x.size() != dim()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower_[i] - tol && x[i] <= upper_[i] + tol)) return false;
  }
  return true;
}

bool BoxDomain::bounded() const {
  return lower_.allFinite() && upper_.allFinite();
}

Vector project(const BoxDomain& domain, const Vector& x) {
  if (x.size() != domain.dim()) {
    throw InputError("project: dimension mismatch");
  }
  return x.cwiseMax(domain.lower()).cwiseMin(domain.upper());
}

double dist_neg_normal_cone(const BoxDomain& domain, const Vector& x,
                            const Vector& v) {
  if (x.size() != domain.dim() || v.size() != domain.dim()) {
    throw InputError("dist_neg_normal_cone: dimension mismatch");
  }
  if (!domain.contains(x)) {
    throw InputError("dist_neg_normal_cone: point outside the domain");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const bool at_lower = std::abs(x[i] - domain.lower()[i]) <= kBoundTolerance;
    const bool at_upper = std::abs(x[i] - domain.upper()[i]) <= kBoundTolerance;
    double r = v[i];
    if (at_lower && at_upper) {
      r = 0.0;  // degenerate interval: the normal cone is the whole line
    } else if (at_upper) {
      r = std::max(r, 0.0);
    } else if (at_lower) {
      r = std::min(r, 0.0);
    }
    sum += r * r;
  }
  return std::sqrt(sum);
}

void ConstrainedProblem::validate() const {
  const auto n = domain.dim();
  if (n == 0) throw InputError("problem: empty domain");
  if (!f || f.dim() != n) throw InputError("problem: objective dimension");
  if (g_components.empty()) {
    throw InputError("problem: at least one constraint is required");
  }
  for (const auto& g : g_components) {
    if (!g || g.dim() != n) throw InputError("problem: constraint dimension");
  }
  if (!(rho >= 0.0)) throw InputError("problem: rho must be nonnegative");
  if (!(M > 0.0)) throw InputError("problem: M must be positive");
}

ConstraintEvaluation max_constraint_eval(const ConstrainedProblem& problem,
                                         const Vector& x) {
  if (problem.g_components.empty()) {
    throw InputError("max_constraint_eval: no constraints");
  }
  ConstraintEvaluation best;
  for (std::size_t i = 0; i < problem.g_components.size(); ++i) {
    Evaluation e = problem.g_components[i](x);
    if (i == 0 || e.value > best.value) {
      best.value = e.value;
      best.subgradient = std::move(e.subgradient);
      best.active_index = i;
    }
  }
  return best;
}

FunctionOracle ConstrainedProblem::constraint() const {
  if (g_components.size() == 1) return g_components.front();
  // Holds copies so the oracle outlives this problem object.
  ConstrainedProblem components;
  components.g_components = g_components;
  return FunctionOracle(dim(), [components](const Vector& x) {
    ConstraintEvaluation c = max_constraint_eval(components, x);
    return Evaluation{c.value, std::move(c.subgradient)};
  });
}

}  // namespace proxswitch
