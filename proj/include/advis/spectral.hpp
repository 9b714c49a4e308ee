#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>

namespace advis {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct SymmetricEigenpairs {
  Eigen::VectorXd values;  // sorted by |value| descending, ties by value descending
  Eigen::MatrixXd vectors; // orthonormal columns
};

/// The `count` eigenpairs of largest magnitude of a symmetric matrix, computed
/// densely.
SymmetricEigenpairs dense_top_magnitude(const Eigen::MatrixXd& S, std::size_t count);

/// Same contract via Lanczos with full reorthogonalization. The Krylov basis is
/// grown until every requested Ritz pair has residual norm <= tol.
SymmetricEigenpairs lanczos_top_magnitude(const SparseMatrix& S, std::size_t count,
                                          double tol = 1e-10);

/// Sign convention: the largest-magnitude entry of each vector (lowest index on
/// ties) is made positive.
void canonicalize_signs(Eigen::MatrixXd& vectors);

} // namespace advis
