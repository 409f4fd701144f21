#include "deepgraph/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepgraph/errors.hpp"

namespace deepgraph {

double spectral_norm(const Eigen::MatrixXd& m, const PowerIterationOptions& opts) {
  if (m.size() == 0) return 0.0;
  const Eigen::MatrixXd gram = m.transpose() * m;
  const Eigen::Index k = gram.rows();
  const Eigen::Index block = std::min<Eigen::Index>(k, 8);
  // fixed start block; a block keeps convergence fast when the top singular values nearly tie
  Eigen::MatrixXd x(k, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) {
      x(i, j) = (i == j ? 1.0 : 0.0) + 0.1 * std::sin(1.0 + 3.7 * static_cast<double>(i) * static_cast<double>(j + 1));
    }
  }
  x = Eigen::HouseholderQR<Eigen::MatrixXd>(x).householderQ() * Eigen::MatrixXd::Identity(k, block);
  double estimate = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Eigen::MatrixXd y = gram * x;
    if (y.norm() == 0.0) return 0.0;
    x = Eigen::HouseholderQR<Eigen::MatrixXd>(y).householderQ() * Eigen::MatrixXd::Identity(k, block);
    const Eigen::MatrixXd ritz = x.transpose() * gram * x;
    const double next = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ritz, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (it > 0 && std::abs(next - estimate) <= opts.tolerance * std::max(1.0, std::abs(next))) {
      return std::sqrt(std::max(0.0, next));
    }
    estimate = next;
  }
  throw NumericError("power iteration did not converge within " + std::to_string(opts.max_iterations) +
                     " iterations (last estimate " + std::to_string(std::sqrt(std::max(0.0, estimate))) + ")");
}

Eigen::MatrixXd centering(int n) {
  return Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
}

}  // namespace deepgraph
