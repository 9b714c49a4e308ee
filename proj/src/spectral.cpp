#include "advis/spectral.hpp"

#include "advis/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace advis {
namespace {

std::vector<Eigen::Index> magnitude_order(const Eigen::VectorXd& values) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(values(a)), mb = std::abs(values(b));
    if (ma != mb)
      return ma > mb;
    return values(a) > values(b);
  });
  return order;
}

SymmetricEigenpairs select(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors,
                           std::size_t count) {
  auto order = magnitude_order(values);
  count = std::min(count, order.size());
  SymmetricEigenpairs out;
  out.values.resize(static_cast<Eigen::Index>(count));
  out.vectors.resize(vectors.rows(), static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) {
    out.values(static_cast<Eigen::Index>(k)) = values(order[k]);
    out.vectors.col(static_cast<Eigen::Index>(k)) = vectors.col(order[k]);
  }
  return out;
}

} // namespace

void canonicalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      // 1e-12 slack keeps near-equal magnitudes from flipping on rounding noise
      const double m = std::abs(vectors(i, k));
      if (m > best * (1.0 + 1e-12)) {
        best = m;
        arg = i;
      }
    }
    if (vectors(arg, k) < 0.0)
      vectors.col(k) *= -1.0;
  }
}

SymmetricEigenpairs dense_top_magnitude(const Eigen::MatrixXd& S, std::size_t count) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
  if (solver.info() != Eigen::Success)
    throw Error("dense symmetric eigensolver failed to converge");
  return select(solver.eigenvalues(), solver.eigenvectors(), count);
}

SymmetricEigenpairs lanczos_top_magnitude(const SparseMatrix& S, std::size_t count, double tol) {
  const auto n = static_cast<std::size_t>(S.rows());
  if (S.rows() != S.cols())
    throw InvalidArgument("lanczos: matrix must be square");
  count = std::min(count, n);
  if (count == 0)
    return {};

  std::mt19937_64 rng(0x5eed1a2c20ULL);
  std::normal_distribution<double> gauss;
  auto random_unit = [&](const Eigen::MatrixXd& basis, Eigen::Index used) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v(i) = gauss(rng);
    for (int pass = 0; pass < 2; ++pass)
      v -= basis.leftCols(used) * (basis.leftCols(used).transpose() * v);
    return Eigen::VectorXd(v / v.norm());
  };

  const double scale = [&] {
    double s = 0.0;
    for (Eigen::Index r = 0; r < S.outerSize(); ++r) {
      double row = 0.0;
      for (SparseMatrix::InnerIterator it(S, r); it; ++it)
        row += std::abs(it.value());
      s = std::max(s, row);
    }
    return std::max(s, 1.0);
  }();

  std::size_t capacity = std::min(n, std::max<std::size_t>(2 * count + 40, 80));
  Eigen::MatrixXd Q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(capacity));
  std::vector<double> alpha, beta; // beta[j] couples q_j and q_{j+1}
  Q.col(0) = random_unit(Q, 0);
  Eigen::Index steps = 0;
  Eigen::VectorXd residual_vec;

  while (true) {
    const auto target = static_cast<Eigen::Index>(capacity);
    while (steps < target) {
      Eigen::VectorXd w = S * Q.col(steps);
      const double a = Q.col(steps).dot(w);
      alpha.push_back(a);
      for (int pass = 0; pass < 2; ++pass)
        w -= Q.leftCols(steps + 1) * (Q.leftCols(steps + 1).transpose() * w);
      const double b = w.norm();
      ++steps;
      if (static_cast<std::size_t>(steps) == n) {
        residual_vec = w;
        beta.push_back(b);
        break;
      }
      if (steps == target) {
        residual_vec = w;
        beta.push_back(b);
        break;
      }
      if (b <= 1e-12 * scale) {
        // invariant subspace found; continue from a fresh orthogonal direction
        beta.push_back(0.0);
        Q.col(steps) = random_unit(Q, steps);
      } else {
        beta.push_back(b);
        Q.col(steps) = w / b;
      }
    }

    const auto k = steps;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      T(j, j) = alpha[static_cast<std::size_t>(j)];
      if (j + 1 < k) {
        T(j, j + 1) = beta[static_cast<std::size_t>(j)];
        T(j + 1, j) = beta[static_cast<std::size_t>(j)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(T);
    auto order = magnitude_order(tri.eigenvalues());
    const double last_beta = beta.back();
    bool converged = static_cast<std::size_t>(k) == n;
    if (!converged && order.size() >= count) {
      converged = true;
      for (std::size_t r = 0; r < count; ++r) {
        const double res = std::abs(last_beta * tri.eigenvectors()(k - 1, order[r]));
        if (res > tol * scale) {
          converged = false;
          break;
        }
      }
    }
    if (converged) {
      Eigen::MatrixXd ritz = Q.leftCols(k) * tri.eigenvectors();
      auto out = select(tri.eigenvalues(), ritz, count);
      for (Eigen::Index c = 0; c < out.vectors.cols(); ++c)
        out.vectors.col(c).normalize();
      return out;
    }

    const std::size_t grown = std::min(n, capacity + std::max<std::size_t>(capacity / 2, 40));
    Q.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(grown));
    capacity = grown;
    const double b = last_beta;
    if (b <= 1e-12 * scale) {
      beta.back() = 0.0;
      Q.col(steps) = random_unit(Q, steps);
    } else {
      Q.col(steps) = residual_vec / b;
    }
  }
}

} // namespace advis
