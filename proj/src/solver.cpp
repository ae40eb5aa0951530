#include "geoquant/solver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "geoquant/errors.hpp"

namespace geoquant {

namespace {

constexpr double kPi = 3.14159265358979323846;

void validate(const SolverOptions& o) {
  if (!(o.grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be > 0");
  if (!(o.backtrack_factor > 0.0 && o.backtrack_factor < 1.0)) {
    throw std::invalid_argument("backtrack_factor must lie in (0,1)");
  }
  if (!(o.armijo_c > 0.0 && o.armijo_c < 1.0)) {
    throw std::invalid_argument("armijo_c must lie in (0,1)");
  }
  if (o.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

std::shared_ptr<const Eigen::MatrixXd> atom_ranks_table(const DiscreteMeasure& m,
                                                        const Regularizer& reg,
                                                        const SolverOptions& opts) {
  if (opts.atom_ranks) {
    if (opts.atom_ranks->rows() != m.dim() || opts.atom_ranks->cols() != m.size()) {
      throw std::invalid_argument("atom rank table does not match the measure");
    }
    return opts.atom_ranks;
  }
  auto table = std::make_shared<Eigen::MatrixXd>(m.dim(), m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    table->col(i) = dist_fn(m, reg, m.atom(i));
  }
  return table;
}

// Signed radial field on the line base + lambda dir:
//   psi(lambda) = sum w_i r(|lambda - t_i|) sign(lambda - t_i), t_i != lambda.
double line_field(const std::vector<double>& ts, const std::vector<double>& ws,
                  const Regularizer& reg, double lambda) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double delta = lambda - ts[i];
    if (delta == 0.0) continue;
    acc += ws[i] * reg.r(std::abs(delta)) * (delta > 0.0 ? 1.0 : -1.0);
  }
  return acc;
}

QuantileSolution solve_on_line(const DiscreteMeasure& m, const Regularizer& reg,
                               const QuantileIndex& idx, const LineSupport& line,
                               const SolverOptions& opts) {
  LineReduction red;
  red.base = line.base;
  red.direction = line.direction;
  const Eigen::Index n = m.size();
  red.projected_atoms.resize(static_cast<std::size_t>(n));
  red.weights.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    red.projected_atoms[static_cast<std::size_t>(i)] =
        line.direction.dot(m.atom(i) - line.base);
    red.weights[static_cast<std::size_t>(i)] = m.weight(i);
  }

  // psi is non-decreasing with limits -1 and +1, so the target
  // alpha <u, dir> is always bracketed for alpha < 1.
  const double target = idx.alpha * idx.u.dot(line.direction);
  const auto lohi =
      std::minmax_element(red.projected_atoms.begin(), red.projected_atoms.end());
  double pad = std::max(1.0, *lohi.second - *lohi.first);
  double lo = *lohi.first - pad, hi = *lohi.second + pad;
  for (int k = 0; k < 200 && line_field(red.projected_atoms, red.weights, reg, lo) >= target;
       ++k) {
    lo -= pad;
    pad *= 2.0;
  }
  pad = std::max(1.0, *lohi.second - *lohi.first);
  for (int k = 0; k < 200 && line_field(red.projected_atoms, red.weights, reg, hi) <= target;
       ++k) {
    hi += pad;
    pad *= 2.0;
  }
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  int iters = 0;
  while (hi - lo > 1e-12 * scale && iters < 200) {
    const double mid = 0.5 * (lo + hi);
    if (line_field(red.projected_atoms, red.weights, reg, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++iters;
  }
  const double lambda = 0.5 * (lo + hi);

  QuantileSolution sol;
  sol.point = line.base + lambda * line.direction;
  sol.status = SolveStatus::DegenerateLine;
  sol.iterations = iters;
  sol.line_reduction = std::move(red);
  const double fnorm = dist_fn(m, reg, sol.point).norm();
  sol.certificate =
      certify_quantile(m, reg, idx, sol.point, opts.grad_tol * (1.0 + fnorm));
  return sol;
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::AtAtom: return "at_atom";
    case SolveStatus::DegenerateLine: return "degenerate_line";
    case SolveStatus::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

QuantileSolution quantile(const DiscreteMeasure& m, const Regularizer& reg,
                          const QuantileIndex& idx, const SolverOptions& opts) {
  validate(opts);
  if (idx.u.size() != m.dim()) {
    throw std::invalid_argument("direction dimension does not match the measure");
  }
  const Eigen::Index d = m.dim();
  const Eigen::VectorXd target = idx.alpha * idx.u;

  // Atom screening: the first-order condition fully characterizes
  // minimizers, so a satisfied atom is the solution.
  if (reg.r0() > 0.0) {
    const auto ranks = atom_ranks_table(m, reg, opts);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double slack = reg.r0() * m.weight(i);
      const double residual = (ranks->col(i) - target).norm();
      const double tol = opts.grad_tol * (1.0 + ranks->col(i).norm());
      if (residual <= slack + tol) {
        QuantileSolution sol;
        sol.point = m.atom(i);
        sol.status = SolveStatus::AtAtom;
        sol.certificate =
            Certificate{residual, slack, tol, true, m.nearest_atom_within(sol.point, 1e-9)};
        return sol;
      }
    }
  }

  // Non-unique regime: measure on a line parallel to u, regularizer not
  // strictly increasing. Reduce to one dimension.
  const auto line = m.line_support(opts.line_support_tol);
  if (line && !reg.strictly_increasing() &&
      std::abs(std::abs(idx.u.dot(line->direction)) - 1.0) <= 1e-9) {
    return solve_on_line(m, reg, idx, *line, opts);
  }

  // Damped Newton on the stationarity equation F(x) = alpha u, with the
  // squared residual as line-search merit (the objective value cancels
  // catastrophically at extreme quantiles).
  Eigen::VectorXd x = opts.start ? *opts.start : m.componentwise_median();
  if (x.size() != d) throw std::invalid_argument("start point has wrong dimension");
  if (reg.r0() > 0.0) {
    // A start inside an atom's stiffness well (transverse curvature grows
    // like 1/distance) crawls for hundreds of iterations. The atom already
    // failed screening, so restart on its descent side at neighbor scale.
    const Eigen::Index near = m.nearest_atom_within(x, 1e-6 * (1.0 + x.norm()));
    if (near >= 0) {
      const Eigen::VectorXd z = m.atom(near);
      const Eigen::VectorXd resid = dist_fn(m, reg, z) - target;
      double gap = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        if (i == near) continue;
        gap = std::min(gap, (m.atom(i) - z).norm());
      }
      if (!std::isfinite(gap)) gap = 1.0 + z.norm();
      if (resid.norm() > 0.0) {
        x = z - (0.25 * gap / resid.norm()) * resid;
      } else {
        x = z + 0.25 * gap * idx.u;
      }
    }
  }

  QuantileSolution sol;
  sol.status = SolveStatus::MaxIterations;
  Eigen::VectorXd F(d), g(d), step(d), y(d);
  double ctol = opts.grad_tol;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    F = dist_fn(m, reg, x);
    g = F - target;
    const double res = g.norm();
    ctol = opts.grad_tol * (1.0 + F.norm());
    if (opts.keep_trace) sol.trace.push_back({x, objective(m, reg, idx, x), res});
    if (res <= ctol) {
      sol.status = SolveStatus::Converged;
      break;
    }

    Eigen::MatrixXd H = detail::hessian_sum(m, reg, x);
    const double tr = H.trace();
    if (tr > 0.0) {
      Eigen::MatrixXd damped = H;
      damped.diagonal().array() += opts.hessian_ridge * tr / static_cast<double>(d);
      step = -damped.ldlt().solve(g);
      if (!step.allFinite()) step = -g;
    } else {
      step = -g;  // curvature vanished (e.g. start at a lone atom)
    }
    double slope = 2.0 * g.dot(H * step);
    if (!(slope < 0.0)) {
      step = -g;
      slope = -2.0 * g.dot(H * g);
      if (!(slope < 0.0)) slope = -res * res;
    }

    const double merit0 = res * res;
    double t = 1.0;
    bool accepted = false;
    while (t >= 1e-14) {
      y = x + t * step;
      if (reg.r0() > 0.0) {
        const Eigen::Index near = m.nearest_atom_within(y, 1e-9);
        if (near >= 0) {
          // Re-screen the crossed atom, then sidestep it.
          const Certificate cert = certify_quantile(m, reg, idx, m.atom(near), ctol);
          if (cert.satisfied) {
            sol.point = m.atom(near);
            sol.status = SolveStatus::AtAtom;
            sol.certificate = cert;
            sol.iterations = it + 1;
            return sol;
          }
          y += (1e-8 / step.norm()) * step;
        }
      }
      const double merit = (dist_fn(m, reg, y) - target).squaredNorm();
      if (merit <= merit0 + opts.armijo_c * t * slope) {
        accepted = true;
        break;
      }
      t *= opts.backtrack_factor;
    }
    if (!accepted) break;  // stalled; certificate below reports the state
    x = y;
  }

  sol.point = x;
  sol.iterations = it;
  sol.certificate = certify_quantile(m, reg, idx, x, ctol);
  if (sol.certificate.satisfied && sol.status != SolveStatus::Converged) {
    sol.status = SolveStatus::Converged;
  }
  if (!sol.certificate.satisfied) sol.status = SolveStatus::MaxIterations;
  return sol;
}

Eigen::VectorXd brute_force_quantile(const DiscreteMeasure& m, const Regularizer& reg,
                                     const QuantileIndex& idx, const Box& bounds,
                                     int resolution) {
  const Eigen::Index d = m.dim();
  if (d > 3) throw std::invalid_argument("brute force refuses d > 3");
  if (resolution < 11) throw std::invalid_argument("brute force requires resolution >= 11");
  if (bounds.lo.size() != d || bounds.hi.size() != d) {
    throw std::invalid_argument("box dimension mismatch");
  }
  long total = 1;
  for (Eigen::Index i = 0; i < d; ++i) total *= resolution;
  Eigen::VectorXd best = bounds.lo;
  double best_value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd p(d);
  for (long k = 0; k < total; ++k) {
    long rem = k;
    for (Eigen::Index i = 0; i < d; ++i) {
      const long gi = rem % resolution;
      rem /= resolution;
      p[i] = bounds.lo[i] +
             (bounds.hi[i] - bounds.lo[i]) * static_cast<double>(gi) / (resolution - 1);
    }
    const double v = objective(m, reg, idx, p);
    if (v < best_value) {
      best_value = v;
      best = p;
    }
  }
  return best;
}

namespace {

void solve_arc(const DiscreteMeasure& m, const Regularizer& reg, double alpha,
               const std::vector<Eigen::VectorXd>& dirs, std::size_t begin,
               std::size_t end, const SolverOptions& base,
               std::vector<ContourEntry>* out) {
  SolverOptions opts = base;
  opts.start.reset();
  for (std::size_t k = begin; k < end; ++k) {
    ContourEntry& entry = (*out)[k];
    entry.u = dirs[k];
    try {
      const QuantileIndex idx(alpha, dirs[k]);
      entry.solution = quantile(m, reg, idx, opts);
      // Warm start along the arc; captured atoms make poor initializers
      // (the quantile map jumps at ball boundaries).
      if (entry.solution.status == SolveStatus::Converged) {
        opts.start = entry.solution.point;
      } else {
        opts.start.reset();
      }
    } catch (const std::exception& e) {
      entry.error = e.what();
      opts.start.reset();
    }
  }
}

}  // namespace

std::vector<ContourEntry> contour(const DiscreteMeasure& m, const Regularizer& reg,
                                  double alpha,
                                  const std::vector<Eigen::VectorXd>& directions,
                                  const SolverOptions& opts) {
  validate(opts);
  if (directions.empty()) throw std::invalid_argument("contour requires directions");
  SolverOptions shared = opts;
  if (reg.r0() > 0.0 && !shared.atom_ranks) {
    shared.atom_ranks = atom_ranks_table(m, reg, opts);
  }
  std::vector<ContourEntry> out(directions.size());
  const std::size_t n = directions.size();
  const std::size_t arcs =
      std::min<std::size_t>(std::max(1, shared.threads), n);
  if (arcs <= 1) {
    solve_arc(m, reg, alpha, directions, 0, n, shared, &out);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(arcs);
  for (std::size_t a = 0; a < arcs; ++a) {
    const std::size_t begin = a * n / arcs;
    const std::size_t end = (a + 1) * n / arcs;
    pool.emplace_back(solve_arc, std::cref(m), std::cref(reg), alpha,
                      std::cref(directions), begin, end, std::cref(shared), &out);
  }
  for (auto& t : pool) t.join();
  return out;
}

std::vector<ContourEntry> contour(const DiscreteMeasure& m, const Regularizer& reg,
                                  double alpha, int n_dirs, const SolverOptions& opts) {
  if (m.dim() != 2) {
    throw std::invalid_argument("angular contour grids require d = 2; pass directions");
  }
  if (n_dirs < 1) throw std::invalid_argument("contour requires n_dirs >= 1");
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(static_cast<std::size_t>(n_dirs));
  for (int k = 0; k < n_dirs; ++k) {
    const double theta = 2.0 * kPi * k / n_dirs;
    Eigen::VectorXd u(2);
    u << std::cos(theta), std::sin(theta);
    dirs.push_back(std::move(u));
  }
  return contour(m, reg, alpha, dirs, opts);
}

double inverse_roundtrip(const DiscreteMeasure& m, const Regularizer& reg,
                         const Eigen::VectorXd& x, const SolverOptions& opts) {
  if (reg.r0() > 0.0 && m.atom_mass(x) > 0.0) {
    throw HypothesisError("round trip is undefined at an atom when r(0) > 0");
  }
  const Eigen::VectorXd F = dist_fn(m, reg, x);
  if (!(F.norm() < 1.0)) {
    throw HypothesisError("distribution function has norm >= 1 at this point");
  }
  const QuantileIndex idx = QuantileIndex::from_point(F);
  const QuantileSolution sol = quantile(m, reg, idx, opts);
  return (sol.point - x).norm();
}

namespace {

void check_spherical_symmetry(const DiscreteMeasure& m, double tol) {
  const Eigen::Index n = m.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    bool found = false;
    for (Eigen::Index j = 0; j < n; ++j) {
      if ((m.atom(j) + m.atom(i)).norm() <= tol &&
          std::abs(m.weight(j) - m.weight(i)) <= 1e-12) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw HypothesisError("measure is not centrally symmetric at tolerance 1e-9");
    }
  }
  if (m.dim() != 2) return;  // rotation-grid check is two-dimensional

  // Each norm shell must be an equally spaced angular grid of equal weights.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return m.atom(a).norm() < m.atom(b).norm();
  });
  std::size_t s = 0;
  while (s < order.size()) {
    std::size_t e = s + 1;
    const double rad = m.atom(order[s]).norm();
    while (e < order.size() && m.atom(order[e]).norm() - rad <= tol) ++e;
    if (rad > tol && e - s >= 2) {
      std::vector<double> angles;
      const double w0 = m.weight(order[s]);
      for (std::size_t k = s; k < e; ++k) {
        if (std::abs(m.weight(order[k]) - w0) > 1e-12) {
          throw HypothesisError("norm shell has unequal weights");
        }
        angles.push_back(std::atan2(m.atom(order[k])[1], m.atom(order[k])[0]));
      }
      std::sort(angles.begin(), angles.end());
      const double spacing = 2.0 * kPi / static_cast<double>(angles.size());
      for (std::size_t k = 0; k < angles.size(); ++k) {
        const double next =
            k + 1 < angles.size() ? angles[k + 1] : angles[0] + 2.0 * kPi;
        if (std::abs(next - angles[k] - spacing) > 1e-9) {
          throw HypothesisError("norm shell is not an equally spaced angular grid");
        }
      }
    }
    s = e;
  }
}

}  // namespace

double radial_profile(const DiscreteMeasure& m, const Regularizer& reg, double alpha) {
  if (!(alpha >= 0.0) || alpha >= 1.0) {
    throw std::domain_error("radial profile requires alpha in [0, 1)");
  }
  check_spherical_symmetry(m, 1e-9);
  const Eigen::Index d = m.dim();
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(d);
  if (alpha <= reg.r0() * m.atom_mass(origin)) return 0.0;

  Eigen::VectorXd probe = Eigen::VectorXd::Zero(d);
  const auto phi = [&](double lambda) {
    probe[0] = lambda;
    return dist_fn(m, reg, probe)[0];
  };
  double hi = std::max(1.0, m.diameter());
  int guard = 0;
  while (phi(hi) <= alpha && guard++ < 200) hi *= 2.0;
  double lo = 0.0;
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) > alpha) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace geoquant
