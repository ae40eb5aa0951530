#pragma once

#include <Eigen/Core>

namespace geoquant {

// Compensated (Kahan-Neumaier) accumulators. Sums over atoms are taken in
// input order with compensation so results are bit-stable across runs.
class KahanScalar {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class KahanVector {
 public:
  explicit KahanVector(Eigen::Index d)
      : sum_(Eigen::VectorXd::Zero(d)), comp_(Eigen::VectorXd::Zero(d)) {}

  void add(const Eigen::VectorXd& x) { add_scaled(x, 1.0); }

  // Accumulate c * x without forming a temporary.
  void add_scaled(const Eigen::VectorXd& x, double c) {
    for (Eigen::Index i = 0; i < sum_.size(); ++i) {
      const double xi = c * x[i];
      const double t = sum_[i] + xi;
      if (std::abs(sum_[i]) >= std::abs(xi)) {
        comp_[i] += (sum_[i] - t) + xi;
      } else {
        comp_[i] += (xi - t) + sum_[i];
      }
      sum_[i] = t;
    }
  }
  Eigen::VectorXd value() const { return sum_ + comp_; }

 private:
  Eigen::VectorXd sum_, comp_;
};

class KahanMatrix {
 public:
  KahanMatrix(Eigen::Index r, Eigen::Index c)
      : sum_(Eigen::MatrixXd::Zero(r, c)), comp_(Eigen::MatrixXd::Zero(r, c)) {}

  void add(const Eigen::MatrixXd& x) {
    for (Eigen::Index j = 0; j < sum_.cols(); ++j) {
      for (Eigen::Index i = 0; i < sum_.rows(); ++i) {
        const double t = sum_(i, j) + x(i, j);
        if (std::abs(sum_(i, j)) >= std::abs(x(i, j))) {
          comp_(i, j) += (sum_(i, j) - t) + x(i, j);
        } else {
          comp_(i, j) += (x(i, j) - t) + sum_(i, j);
        }
        sum_(i, j) = t;
      }
    }
  }
  Eigen::MatrixXd value() const { return sum_ + comp_; }

 private:
  Eigen::MatrixXd sum_, comp_;
};

}  // namespace geoquant
