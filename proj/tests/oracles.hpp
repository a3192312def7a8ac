#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "jlsketch/numerics.hpp"

namespace oracle {

inline Eigen::MatrixXd to_eigen(const jlsketch::Matrix& a) {
  Eigen::MatrixXd out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
  return out;
}

inline jlsketch::Matrix from_eigen(const Eigen::MatrixXd& a) {
  jlsketch::Matrix out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
  return out;
}

inline Eigen::VectorXd eigenvalues(const jlsketch::Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(to_eigen(a), Eigen::EigenvaluesOnly).eigenvalues();
}

inline double spectral_norm(const jlsketch::Matrix& a) { return eigenvalues(a).cwiseAbs().maxCoeff(); }

inline double relative_frobenius(const jlsketch::Matrix& got, const jlsketch::Matrix& want) {
  return (to_eigen(got) - to_eigen(want)).norm() / std::max(1e-300, to_eigen(want).norm());
}

// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    worst = std::max({worst, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return worst;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace oracle
