#pragma once

#include <Eigen/Dense>

namespace deepgraph {

struct PowerIterationOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
};

/// Largest singular value by block power (subspace) iteration on M^T M. Throws NumericError when
/// the relative change of the estimate does not fall below the tolerance.
double spectral_norm(const Eigen::MatrixXd& m, const PowerIterationOptions& opts = {});

/// Centering projector I - (1/n) 1 1^T.
Eigen::MatrixXd centering(int n);

}  // namespace deepgraph
