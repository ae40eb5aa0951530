#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace geoquant {

class Rng;

struct LineSupport {
  Eigen::VectorXd base;       // a point on the line
  Eigen::VectorXd direction;  // unit vector, sign-normalized
};

// Finite discrete probability measure on R^d: deduplicated atoms with
// positive weights summing to one. Immutable after construction.
class DiscreteMeasure {
 public:
  // Exact-coordinate duplicates are merged with summed weights; uniform
  // weights when omitted; weights renormalized to total one.
  static DiscreteMeasure from_points(const std::vector<Eigen::VectorXd>& points,
                                     const std::vector<double>& weights = {});

  Eigen::Index dim() const { return atoms_.rows(); }
  Eigen::Index size() const { return atoms_.cols(); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }  // d x n
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::VectorXd atom(Eigen::Index i) const { return atoms_.col(i); }
  double weight(Eigen::Index i) const { return weights_[i]; }

  // Pushforward under z -> Oz + b for orthogonal O (checked to 1e-10).
  DiscreteMeasure transform(const Eigen::MatrixXd& O, const Eigen::VectorXd& b) const;

  // Weight of the atom exactly equal to x, else 0.
  double atom_mass(const Eigen::VectorXd& x) const;
  // Index of the atom exactly equal to x, or -1.
  Eigen::Index find_atom(const Eigen::VectorXd& x) const;
  // Index of the nearest atom within radius, or -1.
  Eigen::Index nearest_atom_within(const Eigen::VectorXd& x, double radius) const;

  // The supporting line when all atoms are collinear (rank test of the
  // centered atom matrix at the given relative tolerance); single-atom
  // measures report the line through the atom with direction e1.
  std::optional<LineSupport> line_support(double tol = 1e-12) const;

  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;  // weighted, about the mean
  Eigen::VectorXd componentwise_median() const;
  double diameter() const;  // diagonal of the bounding box

 private:
  DiscreteMeasure(Eigen::MatrixXd atoms, Eigen::VectorXd weights)
      : atoms_(std::move(atoms)), weights_(std::move(weights)) {}

  Eigen::MatrixXd atoms_;
  Eigen::VectorXd weights_;
};

// Synthetic distribution from which empirical measures are drawn. A single
// Generator instance is not shared across threads; derive per-thread
// streams from the seed instead.
class Generator {
 public:
  static Generator uniform_disk(double radius);
  static Generator uniform_segment(Eigen::VectorXd a, Eigen::VectorXd b);
  static Generator gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);
  static Generator mixture(std::vector<std::pair<double, Generator>> parts);
  static Generator point_mass(Eigen::VectorXd x);
  // Exact angular grid on the circle of the given radius; sample() returns
  // the grid itself (uniform weights), so the dihedral symmetries used by
  // sphericity tests hold exactly.
  static Generator circle_grid(double radius, int n_points);
  // Uniform on the interior of the triangle abc (two-dimensional).
  static Generator triangle(Eigen::VectorXd a, Eigen::VectorXd b, Eigen::VectorXd c);

  Eigen::Index dim() const;
  Eigen::VectorXd draw(Rng& rng) const;
  // Empirical measure of n iid draws, deterministic in (generator, n, seed).
  DiscreteMeasure sample(std::size_t n, std::uint64_t seed) const;

  // Mini-language: disk:r | segment:x1,y1,x2,y2 | gauss:<mean...,upper-tri cov...>
  // | point:x,y,... | circle:r,n | tri:ax,ay,bx,by,cx,cy
  // | mix:w1*spec1+w2*spec2 (not nested).
  static Generator parse(std::string_view spec);
  std::string spec_string() const;

 private:
  struct Disk { double radius; };
  struct Segment { Eigen::VectorXd a, b; };
  struct Gauss { Eigen::VectorXd mean; Eigen::MatrixXd cov; Eigen::MatrixXd chol; };
  struct Point { Eigen::VectorXd x; };
  struct CircleGrid { double radius; int n; };
  struct Tri { Eigen::VectorXd a, b, c; };
  struct Mix {
    std::vector<double> weights;  // cumulative-normalized at build
    std::vector<std::shared_ptr<const Generator>> parts;
  };
  using Variant = std::variant<Disk, Segment, Gauss, Point, CircleGrid, Tri, Mix>;

  explicit Generator(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

}  // namespace geoquant
