#pragma once

#include <random>

#include <Eigen/Dense>

namespace sdpclik::testing {

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Seeded so failures reproduce.
class Rng {
 public:
  explicit Rng(unsigned seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }

  Eigen::MatrixXd matrix(int rows, int cols, double lo = -1.0, double hi = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = uniform(lo, hi);
    return m;
  }

  Eigen::VectorXd vector(int n, double lo = -1.0, double hi = 1.0) { return matrix(n, 1, lo, hi); }

 private:
  std::mt19937 gen_;
};

inline double min_eig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

}  // namespace sdpclik::testing
