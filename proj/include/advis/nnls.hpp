#pragma once

#include <Eigen/Core>

namespace advis {

struct NnlsOptions {
  double tolerance = 1e-10;
  /// Outer (constraint-release) iterations allowed per problem, times m.
  int iteration_factor = 3;
};

struct NnlsResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
};

/// Lawson-Hanson active set in normal-equation form:
/// min 0.5 x'Gx - b'x subject to x >= 0, with G symmetric positive definite.
NnlsResult nnls_gram(const Eigen::MatrixXd& G, const Eigen::VectorXd& b, const NnlsOptions& opts = {});

/// min ||A x - y||_2 subject to x >= 0.
NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const NnlsOptions& opts = {});

} // namespace advis
