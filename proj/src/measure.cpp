#include "geoquant/measure.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "geoquant/rng.hpp"

namespace geoquant {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Byte key for exact-coordinate equality, with -0 normalized to +0.
std::string coord_key(const Eigen::VectorXd& v) {
  std::string key(static_cast<std::size_t>(v.size()) * sizeof(double), '\0');
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double c = v[i] == 0.0 ? 0.0 : v[i];
    std::memcpy(key.data() + static_cast<std::size_t>(i) * sizeof(double), &c,
                sizeof(double));
  }
  return key;
}

}  // namespace

DiscreteMeasure DiscreteMeasure::from_points(const std::vector<Eigen::VectorXd>& points,
                                             const std::vector<double>& weights) {
  if (points.empty()) throw std::invalid_argument("measure requires at least one point");
  const Eigen::Index d = points.front().size();
  if (d < 1) throw std::invalid_argument("points must have dimension >= 1");
  if (!weights.empty() && weights.size() != points.size()) {
    throw std::invalid_argument("weights must match points in number");
  }

  std::unordered_map<std::string, Eigen::Index> index;
  index.reserve(points.size());
  std::vector<Eigen::Index> order;
  std::vector<double> mass;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::VectorXd& p = points[i];
    if (p.size() != d) throw std::invalid_argument("points have mismatched dimensions");
    if (!p.allFinite()) throw std::invalid_argument("points must be finite");
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");
    auto [it, inserted] = index.emplace(coord_key(p), static_cast<Eigen::Index>(order.size()));
    if (inserted) {
      order.push_back(static_cast<Eigen::Index>(i));
      mass.push_back(w);
    } else {
      mass[static_cast<std::size_t>(it->second)] += w;
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(order.size());
  Eigen::MatrixXd atoms(d, n);
  Eigen::VectorXd wv(n);
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    atoms.col(j) = points[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
    wv[j] = mass[static_cast<std::size_t>(j)];
    total += wv[j];
  }
  wv /= total;
  return DiscreteMeasure(std::move(atoms), std::move(wv));
}

DiscreteMeasure DiscreteMeasure::transform(const Eigen::MatrixXd& O,
                                           const Eigen::VectorXd& b) const {
  const Eigen::Index d = dim();
  if (O.rows() != d || O.cols() != d || b.size() != d) {
    throw std::invalid_argument("transform has mismatched dimensions");
  }
  const double defect =
      (O.transpose() * O - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  if (defect > 1e-10) {
    throw std::invalid_argument("transform matrix is not orthogonal (defect " +
                                std::to_string(defect) + ")");
  }
  Eigen::MatrixXd mapped = O * atoms_;
  mapped.colwise() += b;
  return DiscreteMeasure(std::move(mapped), weights_);
}

Eigen::Index DiscreteMeasure::find_atom(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) return -1;
  for (Eigen::Index j = 0; j < size(); ++j) {
    if ((atoms_.col(j).array() == x.array()).all()) return j;
  }
  return -1;
}

double DiscreteMeasure::atom_mass(const Eigen::VectorXd& x) const {
  const Eigen::Index j = find_atom(x);
  return j < 0 ? 0.0 : weights_[j];
}

Eigen::Index DiscreteMeasure::nearest_atom_within(const Eigen::VectorXd& x,
                                                  double radius) const {
  Eigen::Index best = -1;
  double best_dist = radius;
  for (Eigen::Index j = 0; j < size(); ++j) {
    const double dist = (atoms_.col(j) - x).norm();
    if (dist <= best_dist) {
      best_dist = dist;
      best = j;
    }
  }
  return best;
}

std::optional<LineSupport> DiscreteMeasure::line_support(double tol) const {
  const Eigen::Index d = dim();
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d);
  e1[0] = 1.0;
  if (size() == 1) return LineSupport{atom(0), e1};

  const Eigen::VectorXd centroid = atoms_.rowwise().mean();
  Eigen::MatrixXd centered = atoms_.colwise() - centroid;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv[0] == 0.0) return LineSupport{centroid, e1};  // all atoms coincide
  if (d >= 2 && sv.size() >= 2 && sv[1] > tol * sv[0]) return std::nullopt;

  Eigen::VectorXd dir = svd.matrixU().col(0);
  for (Eigen::Index i = 0; i < d; ++i) {  // deterministic sign
    if (dir[i] != 0.0) {
      if (dir[i] < 0.0) dir = -dir;
      break;
    }
  }
  return LineSupport{centroid, dir};
}

Eigen::VectorXd DiscreteMeasure::mean() const { return atoms_ * weights_; }

Eigen::MatrixXd DiscreteMeasure::covariance() const {
  const Eigen::VectorXd mu = mean();
  const Eigen::MatrixXd centered = atoms_.colwise() - mu;
  return centered * weights_.asDiagonal() * centered.transpose();
}

Eigen::VectorXd DiscreteMeasure::componentwise_median() const {
  const Eigen::Index d = dim(), n = size();
  Eigen::VectorXd med(d);
  std::vector<std::pair<double, double>> vals(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      vals[static_cast<std::size_t>(j)] = {atoms_(i, j), weights_[j]};
    }
    std::sort(vals.begin(), vals.end());
    double acc = 0.0;
    double m = vals.back().first;
    for (const auto& [v, w] : vals) {
      acc += w;
      if (acc >= 0.5) {
        m = v;
        break;
      }
    }
    med[i] = m;
  }
  return med;
}

double DiscreteMeasure::diameter() const {
  const Eigen::VectorXd lo = atoms_.rowwise().minCoeff();
  const Eigen::VectorXd hi = atoms_.rowwise().maxCoeff();
  return (hi - lo).norm();
}

// ---------------------------------------------------------------------------
// Generator

Generator Generator::uniform_disk(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("disk radius must be positive");
  return Generator(Disk{radius});
}

Generator Generator::uniform_segment(Eigen::VectorXd a, Eigen::VectorXd b) {
  if (a.size() != b.size()) throw std::invalid_argument("segment endpoints mismatch");
  return Generator(Segment{std::move(a), std::move(b)});
}

Generator Generator::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw std::invalid_argument("gaussian covariance has wrong shape");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("gaussian covariance is not positive definite");
  }
  Eigen::MatrixXd chol = llt.matrixL();
  return Generator(Gauss{std::move(mean), std::move(cov), std::move(chol)});
}

Generator Generator::mixture(std::vector<std::pair<double, Generator>> parts) {
  if (parts.empty()) throw std::invalid_argument("mixture requires components");
  Mix mix;
  double total = 0.0;
  const Eigen::Index d = parts.front().second.dim();
  for (auto& [w, g] : parts) {
    if (!(w > 0.0)) throw std::invalid_argument("mixture weights must be positive");
    if (g.dim() != d) throw std::invalid_argument("mixture components have mixed dimensions");
    total += w;
    mix.weights.push_back(w);
    mix.parts.push_back(std::make_shared<Generator>(std::move(g)));
  }
  for (double& w : mix.weights) w /= total;
  return Generator(std::move(mix));
}

Generator Generator::point_mass(Eigen::VectorXd x) { return Generator(Point{std::move(x)}); }

Generator Generator::circle_grid(double radius, int n_points) {
  if (!(radius > 0.0) || n_points < 1) {
    throw std::invalid_argument("circle grid requires radius > 0 and n >= 1");
  }
  return Generator(CircleGrid{radius, n_points});
}

Generator Generator::triangle(Eigen::VectorXd a, Eigen::VectorXd b, Eigen::VectorXd c) {
  if (a.size() != 2 || b.size() != 2 || c.size() != 2) {
    throw std::invalid_argument("triangle generator is two-dimensional");
  }
  return Generator(Tri{std::move(a), std::move(b), std::move(c)});
}

Eigen::Index Generator::dim() const {
  return std::visit(
      [](const auto& g) -> Eigen::Index {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Disk>) return 2;
        else if constexpr (std::is_same_v<T, Segment>) return g.a.size();
        else if constexpr (std::is_same_v<T, Gauss>) return g.mean.size();
        else if constexpr (std::is_same_v<T, Point>) return g.x.size();
        else if constexpr (std::is_same_v<T, CircleGrid>) return 2;
        else if constexpr (std::is_same_v<T, Tri>) return 2;
        else return g.parts.front()->dim();
      },
      v_);
}

namespace {

// Circle grid with exact closure under negation (even n) and quarter-turn
// rotation (n divisible by 4).
std::vector<Eigen::VectorXd> circle_points(double radius, int n) {
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(static_cast<std::size_t>(n));
  auto push = [&](double x, double y) {
    Eigen::VectorXd p(2);
    p << x, y;
    pts.push_back(std::move(p));
  };
  if (n % 4 == 0) {
    for (int k = 0; k < n / 4; ++k) {
      const double t = 2.0 * kPi * k / n;
      const double c = radius * std::cos(t), s = radius * std::sin(t);
      push(c, s);
      push(-s, c);
      push(-c, -s);
      push(s, -c);
    }
  } else if (n % 2 == 0) {
    for (int k = 0; k < n / 2; ++k) {
      const double t = 2.0 * kPi * k / n;
      const double c = radius * std::cos(t), s = radius * std::sin(t);
      push(c, s);
      push(-c, -s);
    }
  } else {
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * kPi * k / n;
      push(radius * std::cos(t), radius * std::sin(t));
    }
  }
  return pts;
}

}  // namespace

Eigen::VectorXd Generator::draw(Rng& rng) const {
  return std::visit(
      [&rng](const auto& g) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Disk>) {
          const double r = g.radius * std::sqrt(rng.uniform());
          const double t = 2.0 * kPi * rng.uniform();
          Eigen::VectorXd p(2);
          p << r * std::cos(t), r * std::sin(t);
          return p;
        } else if constexpr (std::is_same_v<T, Segment>) {
          return g.a + rng.uniform() * (g.b - g.a);
        } else if constexpr (std::is_same_v<T, Gauss>) {
          Eigen::VectorXd z(g.mean.size());
          for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
          return g.mean + g.chol * z;
        } else if constexpr (std::is_same_v<T, Point>) {
          return g.x;
        } else if constexpr (std::is_same_v<T, CircleGrid>) {
          const auto pts = circle_points(g.radius, g.n);
          return pts[rng.uniform_index(pts.size())];
        } else if constexpr (std::is_same_v<T, Tri>) {
          double u = rng.uniform(), v = rng.uniform();
          if (u + v > 1.0) {  // fold onto the triangle
            u = 1.0 - u;
            v = 1.0 - v;
          }
          return g.a + u * (g.b - g.a) + v * (g.c - g.a);
        } else {
          double u = rng.uniform();
          for (std::size_t i = 0; i < g.weights.size(); ++i) {
            u -= g.weights[i];
            if (u < 0.0) return g.parts[i]->draw(rng);
          }
          return g.parts.back()->draw(rng);
        }
      },
      v_);
}

DiscreteMeasure Generator::sample(std::size_t n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("sample requires n >= 1");
  if (const auto* grid = std::get_if<CircleGrid>(&v_)) {
    return DiscreteMeasure::from_points(circle_points(grid->radius, grid->n));
  }
  Rng rng(seed);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(draw(rng));
  return DiscreteMeasure::from_points(pts);
}

namespace {

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  std::string buf(text);
  std::stringstream ss(buf);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    out.push_back(std::stod(item, &pos));
    if (pos != item.size()) throw std::invalid_argument("bad number '" + item + "'");
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v, std::size_t from, std::size_t count) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) out[static_cast<Eigen::Index>(i)] = v[from + i];
  return out;
}

}  // namespace

Generator Generator::parse(std::string_view spec) {
  const auto bad = [&](const std::string& why) {
    return std::invalid_argument(
        "bad generator '" + std::string(spec) + "' (" + why +
        "); valid forms: disk:r, segment:x1,y1,x2,y2, gauss:mean...,cov-upper-tri..., "
        "point:x,..., circle:r,n, tri:ax,ay,bx,by,cx,cy, mix:w1*spec1+w2*spec2");
  };
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw bad("missing ':'");
  const std::string name(spec.substr(0, colon));
  const std::string_view rest = spec.substr(colon + 1);
  try {
    if (name == "disk") {
      const auto v = parse_numbers(rest);
      if (v.size() != 1) throw bad("disk takes one number");
      return uniform_disk(v[0]);
    }
    if (name == "segment") {
      const auto v = parse_numbers(rest);
      if (v.size() % 2 != 0 || v.empty()) throw bad("segment takes 2d numbers");
      const std::size_t d = v.size() / 2;
      return uniform_segment(to_vector(v, 0, d), to_vector(v, d, d));
    }
    if (name == "gauss") {
      const auto v = parse_numbers(rest);
      // d + d(d+1)/2 values: mean then upper triangle of the covariance.
      std::size_t d = 0;
      while (d + 1 <= v.size() && (d + 1) + (d + 1) * (d + 2) / 2 <= v.size()) ++d;
      if (d == 0 || d + d * (d + 1) / 2 != v.size()) throw bad("gauss value count");
      Eigen::VectorXd mean = to_vector(v, 0, d);
      Eigen::MatrixXd cov(d, d);
      std::size_t k = d;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
          cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[k];
          cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v[k];
          ++k;
        }
      }
      return gaussian(std::move(mean), std::move(cov));
    }
    if (name == "point") {
      const auto v = parse_numbers(rest);
      if (v.empty()) throw bad("point takes coordinates");
      return point_mass(to_vector(v, 0, v.size()));
    }
    if (name == "tri") {
      const auto v = parse_numbers(rest);
      if (v.size() != 6) throw bad("tri takes six numbers");
      return triangle(to_vector(v, 0, 2), to_vector(v, 2, 2), to_vector(v, 4, 2));
    }
    if (name == "circle") {
      const auto v = parse_numbers(rest);
      if (v.size() != 2) throw bad("circle takes radius,n");
      return circle_grid(v[0], static_cast<int>(v[1]));
    }
    if (name == "mix") {
      std::vector<std::pair<double, Generator>> parts;
      std::string buf(rest);
      std::stringstream ss(buf);
      std::string term;
      while (std::getline(ss, term, '+')) {
        const auto star = term.find('*');
        if (star == std::string::npos) throw bad("mix terms are w*spec");
        std::size_t pos = 0;
        const double w = std::stod(term.substr(0, star), &pos);
        parts.emplace_back(w, Generator::parse(term.substr(star + 1)));
      }
      if (parts.empty()) throw bad("mix requires terms");
      return mixture(std::move(parts));
    }
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw bad(e.what());
  }
  throw bad("unknown kind '" + name + "'");
}

std::string Generator::spec_string() const {
  std::ostringstream os;
  std::visit(
      [&os](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Disk>) {
          os << "disk:" << g.radius;
        } else if constexpr (std::is_same_v<T, Segment>) {
          os << "segment:";
          for (Eigen::Index i = 0; i < g.a.size(); ++i) os << g.a[i] << ",";
          for (Eigen::Index i = 0; i < g.b.size(); ++i) {
            os << g.b[i] << (i + 1 < g.b.size() ? "," : "");
          }
        } else if constexpr (std::is_same_v<T, Gauss>) {
          os << "gauss:";
          for (Eigen::Index i = 0; i < g.mean.size(); ++i) os << g.mean[i] << ",";
          const Eigen::Index d = g.mean.size();
          for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = i; j < d; ++j) {
              os << g.cov(i, j) << ((i == d - 1 && j == d - 1) ? "" : ",");
            }
          }
        } else if constexpr (std::is_same_v<T, Point>) {
          os << "point:";
          for (Eigen::Index i = 0; i < g.x.size(); ++i) {
            os << g.x[i] << (i + 1 < g.x.size() ? "," : "");
          }
        } else if constexpr (std::is_same_v<T, CircleGrid>) {
          os << "circle:" << g.radius << "," << g.n;
        } else if constexpr (std::is_same_v<T, Tri>) {
          os << "tri:" << g.a[0] << "," << g.a[1] << "," << g.b[0] << "," << g.b[1]
             << "," << g.c[0] << "," << g.c[1];
        } else {
          os << "mix:";
          for (std::size_t i = 0; i < g.parts.size(); ++i) {
            os << g.weights[i] << "*" << g.parts[i]->spec_string()
               << (i + 1 < g.parts.size() ? "+" : "");
          }
        }
      },
      v_);
  return os.str();
}

}  // namespace geoquant
