#pragma once

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace proxswitch {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when caller-supplied data violates an operation's contract.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an algorithm precondition (e.g. a feasible start) fails.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Function value together with one element of the Clarke subdifferential.
struct Evaluation {
  double value = 0.0;
  Vector subgradient;
};

/// First-order oracle: value and one deterministic subgradient at a point.
/// Implementations must be pure so that concurrent evaluation is safe.
class FunctionOracle {
 public:
  using Fn = std::function<Evaluation(const Vector&)>;

  FunctionOracle() = default;
  FunctionOracle(Eigen::Index dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}

  Evaluation operator()(const Vector& x) const {
    if (x.size() != dim_) {
      throw InputError("oracle: expected dimension " + std::to_string(dim_) +
                       ", got " + std::to_string(x.size()));
    }
    return fn_(x);
  }

  double value(const Vector& x) const { return (*this)(x).value; }
  Eigen::Index dim() const { return dim_; }
  explicit operator bool() const { return static_cast<bool>(fn_); }

 private:
  Eigen::Index dim_ = 0;
  Fn fn_;
};

/// Closed box {x : lower <= x <= upper}; infinite bounds are allowed.
class BoxDomain {
 public:
  BoxDomain() = default;
  BoxDomain(Vector lower, Vector upper);

  /// The whole of R^n.
  static BoxDomain free(Eigen::Index n);
  /// The cube [lo, hi]^n.
  static BoxDomain uniform(Eigen::Index n, double lo, double hi);

  Eigen::Index dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  bool contains(const Vector& x, double tol = 1e-12) const;
  bool bounded() const;

 private:
  Vector lower_;
  Vector upper_;
};

/// Absolute tolerance used to decide that a coordinate sits on a bound.
inline constexpr double kBoundTolerance = 1e-9;

/// Euclidean projection onto the box (coordinatewise clamp).
Vector project(const BoxDomain& domain, const Vector& x);

/// Distance from v to -N_X(x) for the box X. Closed form per coordinate.
double dist_neg_normal_cone(const BoxDomain& domain, const Vector& x,
                            const Vector& v);

struct ConstraintEvaluation {
  double value = 0.0;
  Vector subgradient;
  std::size_t active_index = 0;
};

/// min f(x) s.t. max_i g_i(x) <= 0, x in a box, with the constants that
/// drive step sizes and parameter selection.
struct ConstrainedProblem {
  FunctionOracle f;
  std::vector<FunctionOracle> g_components;
  BoxDomain domain;
  double rho = 0.0;   // weak-convexity modulus
  double M = 1.0;     // subgradient norm bound
  double f_lb = 0.0;
  double g_lb = 0.0;

  Eigen::Index dim() const { return domain.dim(); }
  void validate() const;

  /// The max-aggregated constraint as a single oracle.
  FunctionOracle constraint() const;
};

/// g(x) = max_i g_i(x); subgradient of the active component, ties to the
/// lowest index.
ConstraintEvaluation max_constraint_eval(const ConstrainedProblem& problem,
                                         const Vector& x);

}  // namespace proxswitch
