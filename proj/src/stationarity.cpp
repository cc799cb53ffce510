#include "proxswitch/stationarity.hpp"

#include <cmath>
#include <limits>

namespace proxswitch {

namespace {

enum class Face { Interior, Lower, Upper, Fixed };

std::vector<Face> classify(const BoxDomain& domain, const Vector& x) {
  if (x.size() != domain.dim()) {
    throw InputError("stationarity: dimension mismatch");
  }
  if (!domain.contains(x)) {
    throw InputError("stationarity: point outside the domain");
  }
  std::vector<Face> faces(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const bool lo = std::abs(x[i] - domain.lower()[i]) <= kBoundTolerance;
    const bool hi = std::abs(x[i] - domain.upper()[i]) <= kBoundTolerance;
    faces[static_cast<std::size_t>(i)] =
        lo && hi ? Face::Fixed : hi ? Face::Upper : lo ? Face::Lower
                                                       : Face::Interior;
  }
  return faces;
}

// Component of v left over after removing its part in -N_X(x).
double clip(Face face, double v) {
  switch (face) {
    case Face::Interior:
      return v;
    case Face::Upper:
      return std::max(v, 0.0);
    case Face::Lower:
      return std::min(v, 0.0);
    case Face::Fixed:
      return 0.0;
  }
  return v;
}

// Minimizes s -> dist^2(base + s * dir) over [lo, hi]. Returns the minimizer
// and whether it is pinned to hi.
struct LineMin {
  double s = 0.0;
  double dist = 0.0;
};

LineMin minimize_on_segment(const std::vector<Face>& faces, const Vector& base,
                            const Vector& dir, double lo, double hi) {
  auto residual = [&](double s) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      const double r = clip(faces[static_cast<std::size_t>(i)], base[i] + s * dir[i]);
      sum += r * r;
    }
    return std::sqrt(sum);
  };
  // Half the derivative of the squared distance; nondecreasing in s.
  auto slope = [&](double s) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      sum += clip(faces[static_cast<std::size_t>(i)], base[i] + s * dir[i]) * dir[i];
    }
    return sum;
  };
  if (slope(lo) >= 0.0) return {lo, residual(lo)};
  if (slope(hi) <= 0.0) return {hi, residual(hi)};
  double a = lo;
  double b = hi;
  for (int iter = 0; iter < 400 && b - a > 1e-15 * std::max(1.0, std::abs(b));
       ++iter) {
    const double mid = 0.5 * (a + b);
    if (slope(mid) < 0.0) {
      a = mid;
    } else {
      b = mid;
    }
  }
  // Pick the better end; the objective is flat to rounding on [a, b].
  const double ra = residual(a);
  const double rb = residual(b);
  return ra <= rb ? LineMin{a, ra} : LineMin{b, rb};
}

void check_vectors(const Vector& x, const Vector& zeta_f, const Vector& zeta_g) {
  if (zeta_f.size() != x.size() || zeta_g.size() != x.size()) {
    throw InputError("stationarity: subgradient dimension mismatch");
  }
}

}  // namespace

double lambda_cap(std::optional<double> dual_bound) {
  return dual_bound ? std::max(*dual_bound, kLambdaCapFloor) : kLambdaCapFloor;
}

StationarityCertificate fj_certificate(const BoxDomain& domain,
                                       const Vector& x, const Vector& zeta_f,
                                       const Vector& zeta_g, double g_value) {
  check_vectors(x, zeta_f, zeta_g);
  const auto faces = classify(domain, x);
  const Vector dir = zeta_f - zeta_g;
  const LineMin best = minimize_on_segment(faces, zeta_g, dir, 0.0, 1.0);

  StationarityCertificate cert;
  cert.kind = StationarityKind::FJ;
  cert.residual = best.dist;
  cert.gamma0 = best.s;
  const double gamma = 1.0 - best.s;
  cert.lambda = best.s > 0.0 ? gamma / best.s
                             : std::numeric_limits<double>::infinity();
  cert.comp_slack = std::abs(gamma * g_value);
  cert.feasible = g_value <= 0.0;
  return cert;
}

StationarityCertificate kkt_certificate(const BoxDomain& domain,
                                        const Vector& x, const Vector& zeta_f,
                                        const Vector& zeta_g, double g_value,
                                        double cap) {
  check_vectors(x, zeta_f, zeta_g);
  if (!(cap > 0.0)) throw InputError("kkt_certificate: cap must be positive");
  const auto faces = classify(domain, x);
  const LineMin best = minimize_on_segment(faces, zeta_f, zeta_g, 0.0, cap);

  StationarityCertificate cert;
  cert.kind = StationarityKind::KKT;
  cert.residual = best.dist;
  cert.gamma0 = 1.0 / (1.0 + best.s);
  cert.lambda = best.s;
  cert.comp_slack = std::abs(best.s * g_value);
  cert.feasible = g_value <= 0.0;
  cert.lambda_at_cap = best.s >= cap;
  return cert;
}

StationarityCertificate fj_residual(const ConstrainedProblem& problem,
                                    const Vector& x) {
  const Evaluation f = problem.f(x);
  const ConstraintEvaluation g = max_constraint_eval(problem, x);
  return fj_certificate(problem.domain, x, f.subgradient, g.subgradient,
                        g.value);
}

StationarityCertificate kkt_residual(const ConstrainedProblem& problem,
                                     const Vector& x, double cap) {
  const Evaluation f = problem.f(x);
  const ConstraintEvaluation g = max_constraint_eval(problem, x);
  return kkt_certificate(problem.domain, x, f.subgradient, g.subgradient,
                         g.value, cap);
}

bool check_eps_point(const StationarityCertificate& cert, double g_value,
                     double epsilon) {
  return g_value <= 0.0 && cert.residual <= epsilon &&
         cert.comp_slack <= epsilon * epsilon;
}

}  // namespace proxswitch
