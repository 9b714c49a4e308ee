#include "advis/nnls.hpp"

#include "advis/errors.hpp"

#include <Eigen/Cholesky>

#include <vector>

namespace advis {
namespace {

Eigen::VectorXd solve_passive(const Eigen::MatrixXd& G, const Eigen::VectorXd& b,
                              const std::vector<char>& passive) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < G.rows(); ++j)
    if (passive[static_cast<std::size_t>(j)])
      idx.push_back(j);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(G.rows());
  if (idx.empty())
    return z;
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(k, k);
  Eigen::VectorXd rhs(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    rhs(r) = b(idx[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < k; ++c)
      sub(r, c) = G(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]);
  }
  Eigen::VectorXd sol = sub.ldlt().solve(rhs);
  for (Eigen::Index r = 0; r < k; ++r)
    z(idx[static_cast<std::size_t>(r)]) = sol(r);
  return z;
}

} // namespace

NnlsResult nnls_gram(const Eigen::MatrixXd& G, const Eigen::VectorXd& b, const NnlsOptions& opts) {
  const Eigen::Index m = G.rows();
  if (G.cols() != m || b.size() != m)
    throw InvalidArgument("nnls: dimension mismatch");

  NnlsResult result;
  result.x = Eigen::VectorXd::Zero(m);
  std::vector<char> passive(static_cast<std::size_t>(m), 0);
  Eigen::VectorXd w = b;
  const int max_outer = std::max(1, opts.iteration_factor * static_cast<int>(m));

  while (true) {
    Eigen::Index best = -1;
    double best_w = opts.tolerance;
    for (Eigen::Index j = 0; j < m; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) {
      result.converged = true;
      break;
    }
    if (result.iterations >= max_outer)
      break;
    ++result.iterations;
    passive[static_cast<std::size_t>(best)] = 1;

    Eigen::VectorXd z = solve_passive(G, b, passive);
    // Step back toward feasibility while the passive solution has nonpositive entries.
    for (int guard = 0; guard <= m; ++guard) {
      bool feasible = true;
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < m; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          feasible = false;
          const double denom = result.x(j) - z(j);
          const double a = denom > 0.0 ? result.x(j) / denom : 0.0;
          alpha = std::min(alpha, a);
        }
      if (feasible)
        break;
      result.x += alpha * (z - result.x);
      for (Eigen::Index j = 0; j < m; ++j)
        if (passive[static_cast<std::size_t>(j)] && result.x(j) <= opts.tolerance) {
          passive[static_cast<std::size_t>(j)] = 0;
          result.x(j) = 0.0;
        }
      z = solve_passive(G, b, passive);
    }
    result.x = z;
    for (Eigen::Index j = 0; j < m; ++j)
      if (result.x(j) < 0.0)
        result.x(j) = 0.0;
    w = b - G * result.x;
  }
  return result;
}

NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const NnlsOptions& opts) {
  if (A.rows() != y.size())
    throw InvalidArgument("nnls: dimension mismatch");
  return nnls_gram(A.transpose() * A, A.transpose() * y, opts);
}

} // namespace advis
