#include "geoquant/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "geoquant/errors.hpp"
#include "geoquant/quadrature.hpp"

namespace geoquant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_nonneg(double s, const char* what) {
  if (!(s >= 0.0)) {
    throw std::domain_error(std::string(what) + " requires a nonnegative argument");
  }
}

double power_r(double beta, double s) { return -std::expm1(-beta * std::log1p(s)); }

double power_rprime(double beta, double s) {
  return beta * std::exp(-(beta + 1.0) * std::log1p(s));
}

// integral of 1 - (1+s)^(-beta) over [0, t]
double power_loss(double beta, double t) {
  if (beta == 1.0) return t - std::log1p(t);
  return t - std::expm1((1.0 - beta) * std::log1p(t)) / (1.0 - beta);
}

double smoothstep_r(double tau, double s) {
  if (s >= tau) return 1.0;
  const double t = s / tau;
  return t * t * (3.0 - 2.0 * t);
}

double smoothstep_rprime(double tau, double s) {
  if (s >= tau) return 0.0;
  const double t = s / tau;
  return 6.0 * t * (1.0 - t) / tau;
}

double smoothstep_loss(double tau, double t) {
  if (t >= tau) return t - 0.5 * tau;
  const double u = t / tau;
  return tau * u * u * u * (1.0 - 0.5 * u);
}

}  // namespace

// Cumulative quadrature table over fixed knots; built once, read-only after.
struct Regularizer::LossTable {
  std::vector<double> knots;       // increasing, starting at 0
  std::vector<double> cumulative;  // integral of r over [0, knot[k]]
};

Regularizer Regularizer::geometric() {
  Regularizer reg;
  reg.kind_ = RegKind::Geometric;
  reg.r0_ = 1.0;
  reg.rprime0_ = 0.0;
  reg.strictly_increasing_ = false;
  reg.lipschitz_ = 0.0;
  reg.recorded_tail_ = {{2.0, 0.0}};
  return reg;
}

Regularizer Regularizer::power(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("power regularizer requires beta > 0");
  Regularizer reg;
  reg.kind_ = RegKind::Power;
  reg.param_ = beta;
  reg.r0_ = 0.0;
  reg.rprime0_ = beta;
  reg.strictly_increasing_ = true;
  reg.lipschitz_ = beta;  // sup r' = r'(0)
  reg.recorded_tail_ = {{beta, 1.0}};
  return reg;
}

Regularizer Regularizer::smoothstep(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("smoothstep regularizer requires tau > 0");
  Regularizer reg;
  reg.kind_ = RegKind::SmoothStep;
  reg.param_ = tau;
  reg.r0_ = 0.0;
  reg.rprime0_ = 0.0;
  reg.strictly_increasing_ = false;  // constant 1 on [tau, inf)
  reg.lipschitz_ = 1.5 / tau;        // max of r' at s = tau/2
  reg.recorded_tail_ = {{2.0, 0.0}};
  return reg;
}

Regularizer Regularizer::custom(Fn r, Fn rprime, Fn loss) {
  if (!r || !rprime) {
    throw std::invalid_argument("custom regularizer requires r and rprime");
  }
  Regularizer reg;
  reg.kind_ = RegKind::Custom;
  reg.custom_r_ = std::move(r);
  reg.custom_rprime_ = std::move(rprime);
  reg.custom_loss_ = std::move(loss);
  reg.r0_ = reg.custom_r_(0.0);
  reg.rprime0_ = reg.custom_rprime_(0.0);

  // Sampled membership check on a log grid (continuous verification is
  // impossible): r in [0,1], r > 0 and r' >= 0 for s > 0, r(s) -> 1.
  bool strict = true;
  {
    const int n = 10000;
    const double lo = std::log(1e-8), hi = std::log(1e8);
    for (int i = 0; i < n; ++i) {
      const double s = std::exp(lo + (hi - lo) * i / (n - 1));
      const double v = reg.custom_r_(s);
      const double dv = reg.custom_rprime_(s);
      if (!(v > 0.0) || !(v <= 1.0 + 1e-12)) {
        throw HypothesisError("custom regularizer leaves [0,1] or is nonpositive at s=" +
                              std::to_string(s));
      }
      if (dv < 0.0) {
        throw HypothesisError("custom regularizer has negative derivative at s=" +
                              std::to_string(s));
      }
      if (!(dv > 0.0)) strict = false;
    }
    if (reg.custom_r_(1e8) < 1.0 - 1e-4) {
      throw HypothesisError("custom regularizer does not approach 1 at infinity");
    }
  }
  if (!(reg.r0_ >= 0.0) || reg.r0_ > 1.0) {
    throw HypothesisError("custom regularizer has r(0) outside [0,1]");
  }
  reg.strictly_increasing_ = strict;
  reg.lipschitz_ = std::nullopt;      // unverified for Custom
  reg.recorded_tail_ = std::nullopt;  // no analytic tail known

  if (!reg.custom_loss_) {
    // Frozen cumulative-quadrature cache: log-spaced knots up to 1e4.
    auto table = std::make_shared<LossTable>();
    table->knots.push_back(0.0);
    table->cumulative.push_back(0.0);
    const int per_decade = 8;
    for (int k = -4 * per_decade; k <= 4 * per_decade; ++k) {
      table->knots.push_back(std::pow(10.0, static_cast<double>(k) / per_decade));
    }
    const auto& f = reg.custom_r_;
    for (std::size_t i = 1; i < table->knots.size(); ++i) {
      const double a = table->knots[i - 1], b = table->knots[i];
      const double piece = adaptive_simpson(f, a, b, 1e-13 * std::max(1.0, b - a));
      table->cumulative.push_back(table->cumulative.back() + piece);
    }
    reg.loss_table_ = std::move(table);
  }
  return reg;
}

double Regularizer::r(double s) const {
  check_nonneg(s, "r");
  switch (kind_) {
    case RegKind::Geometric: return 1.0;
    case RegKind::Power: return power_r(param_, s);
    case RegKind::SmoothStep: return smoothstep_r(param_, s);
    case RegKind::Custom: return custom_r_(s);
  }
  return 1.0;
}

double Regularizer::rprime(double s) const {
  check_nonneg(s, "rprime");
  switch (kind_) {
    case RegKind::Geometric: return 0.0;
    case RegKind::Power: return power_rprime(param_, s);
    case RegKind::SmoothStep: return smoothstep_rprime(param_, s);
    case RegKind::Custom: return custom_rprime_(s);
  }
  return 0.0;
}

double Regularizer::loss(double t) const {
  check_nonneg(t, "loss");
  switch (kind_) {
    case RegKind::Geometric: return t;
    case RegKind::Power: return power_loss(param_, t);
    case RegKind::SmoothStep: return smoothstep_loss(param_, t);
    case RegKind::Custom: break;
  }
  if (custom_loss_) return custom_loss_(t);
  // Nearest cached knot below t, plus an adaptive remainder.
  const auto& knots = loss_table_->knots;
  const auto& cum = loss_table_->cumulative;
  auto it = std::upper_bound(knots.begin(), knots.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - knots.begin()) - 1;
  const double rest =
      adaptive_simpson(custom_r_, knots[k], t, 1e-13 * std::max(1.0, t - knots[k]));
  return cum[k] + rest;
}

Eigen::VectorXd Regularizer::loss_gradient(const Eigen::VectorXd& x) const {
  const double n = x.norm();
  if (n == 0.0) {
    if (r0_ > 0.0) {
      throw std::domain_error("loss gradient is singular at the origin when r(0) > 0");
    }
    return Eigen::VectorXd::Zero(x.size());
  }
  return (r(n) / n) * x;
}

Eigen::MatrixXd Regularizer::loss_hessian(const Eigen::VectorXd& x) const {
  const double n = x.norm();
  if (n == 0.0) {
    throw std::domain_error("loss Hessian is undefined at the origin");
  }
  const Eigen::VectorXd w = x / n;
  const Eigen::MatrixXd proj = w * w.transpose();
  const Eigen::Index d = x.size();
  return rprime(n) * proj + (r(n) / n) * (Eigen::MatrixXd::Identity(d, d) - proj);
}

TailLimit Regularizer::tail_limit(double beta) const {
  if (!(beta > 0.0)) throw std::domain_error("tail_limit requires beta > 0");
  switch (kind_) {
    case RegKind::Geometric:
    case RegKind::SmoothStep:
      return {0.0, false};
    case RegKind::Power: {
      const double b0 = param_;
      if (std::abs(beta - b0) <= 1e-12 * std::max(1.0, b0)) return {1.0, false};
      return {beta < b0 ? 0.0 : kInf, false};
    }
    case RegKind::Custom: {
      const double s = 1e6;
      return {std::pow(s, beta) * (1.0 - custom_r_(s)), true};
    }
  }
  return {0.0, false};
}

double Regularizer::tail_threshold(double eps) const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("tail_threshold requires eps in (0,1)");
  switch (kind_) {
    case RegKind::Geometric: return 0.0;
    case RegKind::Power: return std::pow(eps, -1.0 / param_) - 1.0;
    case RegKind::SmoothStep: return param_;
    case RegKind::Custom: {
      // Doubling search on the sampled values.
      double s = 1.0;
      for (int i = 0; i < 200 && custom_r_(s) < 1.0 - eps; ++i) s *= 2.0;
      return s;
    }
  }
  return 0.0;
}

std::string Regularizer::spec_string() const {
  std::ostringstream os;
  switch (kind_) {
    case RegKind::Geometric: return "geometric";
    case RegKind::Power: os << "power:" << param_; return os.str();
    case RegKind::SmoothStep: os << "smoothstep:" << param_; return os.str();
    case RegKind::Custom: return "custom";
  }
  return "geometric";
}

Regularizer Regularizer::parse(std::string_view spec) {
  const auto bad = [&] {
    return std::invalid_argument(
        "unknown regularizer '" + std::string(spec) +
        "'; valid forms: geometric, power:<beta>, smoothstep:<tau>");
  };
  if (spec == "geometric") return geometric();
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw bad();
  const std::string name(spec.substr(0, colon));
  double value = 0.0;
  try {
    std::size_t pos = 0;
    const std::string arg(spec.substr(colon + 1));
    value = std::stod(arg, &pos);
    if (pos != arg.size()) throw bad();
  } catch (const std::invalid_argument&) {
    throw bad();
  } catch (const std::out_of_range&) {
    throw bad();
  }
  if (name == "power") return power(value);
  if (name == "smoothstep") return smoothstep(value);
  throw bad();
}

namespace {

// integral of (1+s)^(-beta) over [S, inf)
double power_tail_mass(double beta, double S) {
  if (beta <= 1.0) return kInf;
  return std::exp((1.0 - beta) * std::log1p(S)) / (beta - 1.0);
}

// integral of 1 - r over [S, inf) for builtin kinds, assuming S is beyond
// any smoothstep plateau start.
double one_minus_r_tail(const Regularizer& reg, double S) {
  switch (reg.kind()) {
    case RegKind::Geometric: return 0.0;
    case RegKind::SmoothStep: return 0.0;  // S >= tau by construction
    case RegKind::Power: return power_tail_mass(reg.param(), S);
    case RegKind::Custom: break;
  }
  // Power-law extrapolation from two probes; infinity when the decay is
  // too slow to integrate.
  const double s1 = S, s2 = 10.0 * S;
  const double d1 = 1.0 - reg.r(s1), d2 = 1.0 - reg.r(s2);
  if (d1 <= 0.0) return 0.0;
  if (d2 <= 0.0) return d1 * s1;  // crude bound on a terminating tail
  const double gamma = std::log(d1 / d2) / std::log(s2 / s1);
  if (gamma <= 1.02) return kInf;
  return d1 * s1 / (gamma - 1.0);
}

}  // namespace

double l1_distance(const Regularizer& a, const Regularizer& b) {
  if (a.kind() == b.kind() && a.kind() != RegKind::Custom && a.param() == b.param()) {
    return 0.0;
  }
  double S = 1.0;
  if (a.kind() == RegKind::SmoothStep) S = std::max(S, a.param());
  if (b.kind() == RegKind::SmoothStep) S = std::max(S, b.param());

  // |r_a - r_b| = |(1 - r_b) - (1 - r_a)|; beyond S the builtin tails are
  // monotone in each other, so the tail integral splits exactly.
  double tail;
  if (a.kind() == RegKind::Power && b.kind() == RegKind::Power) {
    const double lo = std::min(a.param(), b.param());
    const double hi = std::max(a.param(), b.param());
    tail = power_tail_mass(lo, S);
    if (std::isfinite(tail)) tail -= power_tail_mass(hi, S);
  } else {
    const double ta = one_minus_r_tail(a, S);
    const double tb = one_minus_r_tail(b, S);
    if (std::isinf(ta) && std::isinf(tb)) {
      // Both tails diverge individually; their difference needs a joint
      // probe. Only Custom pairs can land here.
      const double s1 = S, s2 = 10.0 * S;
      const double d1 = std::abs(a.r(s1) - b.r(s1));
      const double d2 = std::abs(a.r(s2) - b.r(s2));
      if (d1 <= 1e-300) {
        tail = 0.0;
      } else {
        const double gamma = std::log(std::max(d1, 1e-300) / std::max(d2, 1e-300)) /
                             std::log(s2 / s1);
        tail = (gamma > 1.02) ? d1 * s1 / (gamma - 1.0) : kInf;
      }
    } else {
      tail = std::abs(ta - tb);  // one of them may be inf
      if (std::isinf(ta) || std::isinf(tb)) tail = kInf;
    }
  }
  if (std::isinf(tail)) return kInf;

  const auto integrand = [&](double s) { return std::abs(a.r(s) - b.r(s)); };
  const double head = adaptive_simpson(integrand, 0.0, S, 1e-13 * std::max(1.0, S));
  return head + tail;
}

}  // namespace geoquant
