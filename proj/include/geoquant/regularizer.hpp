#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geoquant {

enum class RegKind { Geometric, Power, SmoothStep, Custom };

struct TailLimit {
  double value = 0.0;   // may be +infinity
  bool estimate = false;  // true for numeric (Custom) estimates
};

// A weight function r: [0,inf) -> [0,1], continuously differentiable, with
// r(s) > 0 and r'(s) >= 0 for s > 0 and r(s) -> 1 at infinity. The induced
// loss is R(x) = integral of r over [0, ||x||]; r == 1 recovers the plain
// Euclidean norm.
//
// Builtins:
//   geometric      r == 1
//   power(beta)    r(s) = 1 - (1+s)^(-beta), beta > 0
//   smoothstep(tau) r(s) = 3t^2 - 2t^3 with t = min(s/tau, 1); constant 1
//                  beyond tau, r(0) = r'(0) = 0
//   custom         user-supplied r and r'; the loss primitive falls back to
//                  cached adaptive quadrature when no closed form is given
//
// Instances are immutable after construction and safe to share across
// threads; the custom-loss quadrature cache is built once in the factory.
class Regularizer {
 public:
  using Fn = std::function<double(double)>;

  static Regularizer geometric();
  static Regularizer power(double beta);
  static Regularizer smoothstep(double tau);
  // r and rprime are required; loss (the primitive of r) is optional and
  // replaced by cached quadrature when absent. The factory runs a sampled
  // membership check of the regularizer class on a log grid and throws
  // HypothesisError on violation.
  static Regularizer custom(Fn r, Fn rprime, Fn loss = nullptr);

  RegKind kind() const { return kind_; }
  double param() const { return param_; }  // beta or tau; 0 otherwise
  double r0() const { return r0_; }
  double rprime0() const { return rprime0_; }
  bool strictly_increasing() const { return strictly_increasing_; }
  std::optional<double> lipschitz_constant() const { return lipschitz_; }
  // (beta, ell) with ell finite; drives extreme-quantile scaling. Absent for
  // Custom regularizers.
  std::optional<std::pair<double, double>> recorded_tail() const {
    return recorded_tail_;
  }

  // r(s). Throws std::domain_error for s < 0.
  double r(double s) const;

  // r'(s). Throws std::domain_error for s < 0.
  double rprime(double s) const;

  // Loss primitive at norm t, i.e. integral of r over [0, t].
  double loss(double t) const;

  // Gradient of the loss at x: r(||x||) x / ||x||. At x = 0 this is the
  // zero vector when r(0) = 0 (continuous extension) and a singularity
  // otherwise (throws std::domain_error).
  Eigen::VectorXd loss_gradient(const Eigen::VectorXd& x) const;

  // Hessian of the loss at x != 0:
  //   r'(||x||) xx^T/||x||^2 + (r(||x||)/||x||) (I - xx^T/||x||^2),
  // positive semi-definite with eigenvalues r'(||x||) and r(||x||)/||x||.
  // Throws std::domain_error at x = 0.
  Eigen::MatrixXd loss_hessian(const Eigen::VectorXd& x) const;

  // ell(beta) = lim s^beta (1 - r(s)). Analytic for builtins; a flagged
  // numeric estimate at s = 1e6 for Custom. Throws std::domain_error for
  // beta <= 0.
  TailLimit tail_limit(double beta) const;

  // Smallest documented S with r(S) >= 1 - eps.
  double tail_threshold(double eps) const;

  std::string spec_string() const;
  // Accepts "geometric", "power:<beta>", "smoothstep:<tau>". Throws
  // std::invalid_argument listing the valid forms.
  static Regularizer parse(std::string_view spec);

 private:
  Regularizer() = default;

  struct LossTable;  // frozen quadrature cache for Custom

  RegKind kind_ = RegKind::Geometric;
  double param_ = 0.0;
  double r0_ = 1.0;
  double rprime0_ = 0.0;
  bool strictly_increasing_ = false;
  std::optional<double> lipschitz_;
  std::optional<std::pair<double, double>> recorded_tail_;
  Fn custom_r_, custom_rprime_, custom_loss_;
  std::shared_ptr<const LossTable> loss_table_;
};

// L1 distance between regularizers: integral of |r1 - r2| over [0, inf).
// Adaptive quadrature on an initial segment plus analytic tails for
// Geometric/Power/SmoothStep pairs; +infinity when divergent.
double l1_distance(const Regularizer& a, const Regularizer& b);

}  // namespace geoquant
