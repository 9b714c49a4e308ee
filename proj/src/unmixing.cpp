#include "advis/unmixing.hpp"

#include "advis/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace advis {
namespace {

// Eigenvectors of a symmetric matrix, columns sorted by eigenvalue descending.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> sorted_eigen(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
  if (solver.info() != Eigen::Success)
    throw Error("symmetric eigensolver failed");
  Eigen::VectorXd vals = solver.eigenvalues().reverse();
  Eigen::MatrixXd vecs = solver.eigenvectors().rowwise().reverse();
  return {vals, vecs};
}

std::size_t numerical_rank(const Eigen::VectorXd& descending_eigs) {
  if (descending_eigs.size() == 0 || !(descending_eigs(0) > 0.0))
    return 0;
  // eigenvalues of a Gram matrix: round-off sits near size * eps * largest
  const double cutoff = descending_eigs(0) * static_cast<double>(descending_eigs.size()) *
                        std::numeric_limits<double>::epsilon();
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < descending_eigs.size(); ++i)
    if (descending_eigs(i) > cutoff)
      ++r;
  return r;
}

} // namespace

std::size_t hysime(const RowMatrix& points) {
  const Eigen::Index N = points.rows();
  const Eigen::Index L = points.cols();
  if (N == 0 || L == 0)
    throw InvalidArgument("hysime: empty data");
  for (Eigen::Index i = 0; i < points.size(); ++i)
    if (!std::isfinite(points.data()[i]))
      throw InvalidArgument("hysime: non-finite data");

  const Eigen::MatrixXd Y = points.transpose(); // L x N
  const Eigen::MatrixXd RR = Y * Y.transpose();
  if (!(RR.trace() > 0.0))
    throw RankDeficientError("hysime: data has rank 0");

  // additive noise by regressing each band on all others
  const Eigen::MatrixXd RRi =
      (RR + 1e-6 * Eigen::MatrixXd::Identity(L, L)).ldlt().solve(Eigen::MatrixXd::Identity(L, L));
  Eigen::MatrixXd noise(L, N);
  for (Eigen::Index i = 0; i < L; ++i) {
    Eigen::MatrixXd XX = RRi - RRi.col(i) * RRi.row(i) / RRi(i, i);
    Eigen::VectorXd RRa = RR.col(i);
    RRa(i) = 0.0;
    Eigen::VectorXd beta = XX * RRa;
    beta(i) = 0.0;
    noise.row(i) = Y.row(i) - beta.transpose() * Y;
  }
  const Eigen::VectorXd noise_power = (noise.array().square().rowwise().sum() / static_cast<double>(N)).matrix();

  const Eigen::MatrixXd X = Y - noise;
  const Eigen::MatrixXd Ry = Y * Y.transpose() / static_cast<double>(N);
  const Eigen::MatrixXd Rx = X * X.transpose() / static_cast<double>(N);
  auto [eigs, E] = sorted_eigen(Rx);
  Eigen::MatrixXd Rn = noise_power.asDiagonal();
  Rn += (Rx.trace() / static_cast<double>(L) / 1e5) * Eigen::MatrixXd::Identity(L, L);

  std::size_t k = 0;
  for (Eigen::Index c = 0; c < L; ++c) {
    const double py = E.col(c).dot(Ry * E.col(c));
    const double pn = E.col(c).dot(Rn * E.col(c));
    if (-py + 2.0 * pn < 0.0)
      ++k;
  }
  return std::max<std::size_t>(k, 1);
}

VcaModel::VcaModel(const RowMatrix& points, std::size_t m) : points_(points), m_(m) {
  const Eigen::Index N = points.rows();
  const Eigen::Index L = points.cols();
  if (m < 1)
    throw InvalidArgument("vca: need at least one endmember");
  if (m > static_cast<std::size_t>(std::min(N, L)))
    throw InvalidArgument("vca: m=" + std::to_string(m) + " exceeds min(n, D)");

  const Eigen::MatrixXd R = points.transpose(); // L x N
  const auto p = static_cast<Eigen::Index>(m);
  const Eigen::MatrixXd corr = R * R.transpose() / static_cast<double>(N);
  auto [corr_eigs, corr_vecs] = sorted_eigen(corr);
  const std::size_t rank = numerical_rank(corr_eigs);
  if (m > rank)
    throw RankDeficientError("vca: m=" + std::to_string(m) + " exceeds data rank " + std::to_string(rank));

  if (p == 1) {
    // single endmember: projection onto the dominant direction
    projected_ = corr_vecs.leftCols(1).transpose() * R;
    low_snr_ = false;
    snr_ = std::numeric_limits<double>::infinity();
    return;
  }

  const Eigen::VectorXd mean = R.rowwise().mean();
  const Eigen::MatrixXd centered = R.colwise() - mean;
  auto [cov_eigs, cov_vecs] = sorted_eigen(centered * centered.transpose() / static_cast<double>(N));
  const Eigen::MatrixXd Ud = cov_vecs.leftCols(p);
  const Eigen::MatrixXd xp = Ud.transpose() * centered; // p x N

  const double Py = R.squaredNorm() / static_cast<double>(N);
  const double Px = xp.squaredNorm() / static_cast<double>(N) + mean.squaredNorm();
  const double num = Px - static_cast<double>(p) / static_cast<double>(L) * Py;
  const double den = Py - Px;
  if (den <= 0.0)
    snr_ = std::numeric_limits<double>::infinity();
  else if (num <= 0.0)
    snr_ = -std::numeric_limits<double>::infinity();
  else
    snr_ = 10.0 * std::log10(num / den);
  const double threshold = 15.0 + 10.0 * std::log10(static_cast<double>(p));
  low_snr_ = snr_ < threshold;

  if (low_snr_) {
    const Eigen::MatrixXd x = xp.topRows(p - 1);
    const double c = std::sqrt(x.colwise().squaredNorm().maxCoeff());
    projected_.resize(p, N);
    projected_.topRows(p - 1) = x;
    projected_.row(p - 1).setConstant(c);
  } else {
    const Eigen::MatrixXd x = corr_vecs.leftCols(p).transpose() * R; // p x N
    const Eigen::VectorXd u = x.rowwise().mean();
    const Eigen::RowVectorXd scale = u.transpose() * x;
    projected_ = x.array().rowwise() / scale.array();
  }
}

EndmemberSet VcaModel::extract(std::uint64_t seed) const {
  const auto p = static_cast<Eigen::Index>(m_);
  const Eigen::Index N = projected_.cols();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  EndmemberSet out;
  out.pixels.reserve(m_);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  A(p - 1, 0) = 1.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    Eigen::VectorXd w(p);
    for (Eigen::Index r = 0; r < p; ++r)
      w(r) = uniform(rng);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    Eigen::VectorXd f = w - A * cod.solve(w);
    const double norm = f.norm();
    if (norm > 0.0)
      f /= norm;
    const Eigen::RowVectorXd v = f.transpose() * projected_;
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index j = 0; j < N; ++j)
      if (std::abs(v(j)) > best_abs) {
        best_abs = std::abs(v(j));
        best = j;
      }
    A.col(i) = projected_.col(best);
    out.pixels.push_back(static_cast<std::size_t>(best));
  }
  out.U.resize(p, points_.cols());
  for (Eigen::Index i = 0; i < p; ++i)
    out.U.row(i) = points_.row(static_cast<Eigen::Index>(out.pixels[static_cast<std::size_t>(i)]));
  return out;
}

EndmemberSet vca(const RowMatrix& points, std::size_t m, std::uint64_t seed) {
  return VcaModel(points, m).extract(seed);
}

RowMatrix abundances(const RowMatrix& points, const EndmemberSet& endmembers, const NnlsOptions& opts) {
  const Eigen::Index m = endmembers.U.rows();
  if (m == 0 || endmembers.U.cols() != points.cols())
    throw InvalidArgument("abundances: endmember dimension mismatch");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(endmembers.U.transpose());
  qr.setThreshold(1e-12);
  if (qr.rank() < m)
    throw RankDeficientError("abundances: endmember matrix has rank " + std::to_string(qr.rank()) +
                             " < m=" + std::to_string(m));

  const Eigen::MatrixXd G = endmembers.U * endmembers.U.transpose();
  const Eigen::MatrixXd B = endmembers.U * points.transpose(); // m x n
  RowMatrix A(points.rows(), m);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    auto sol = nnls_gram(G, B.col(i), opts);
    A.row(i) = sol.x.transpose().cwiseMax(0.0);
  }
  return A;
}

Eigen::VectorXd purity(const RowMatrix& abundance, bool normalize) {
  Eigen::VectorXd eta(abundance.rows());
  for (Eigen::Index i = 0; i < abundance.rows(); ++i) {
    const double total = abundance.row(i).sum();
    const double peak = abundance.row(i).maxCoeff();
    if (abundance.row(i).minCoeff() < 0.0)
      throw InvalidArgument("purity: negative abundance in row " + std::to_string(i));
    if (!(total > 0.0))
      throw InvalidArgument("purity: pixel " + std::to_string(i) + " has an all-zero abundance row");
    eta(i) = normalize ? peak / total : peak;
  }
  return eta;
}

Eigen::VectorXd averaged_purity(const RowMatrix& points, std::size_t m, std::size_t runs,
                                std::uint64_t base_seed, bool normalize) {
  if (runs < 1)
    throw InvalidArgument("averaged_purity: runs must be >= 1");
  const VcaModel model(points, m);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(points.rows());
  for (std::size_t r = 0; r < runs; ++r) {
    const auto endmembers = model.extract(base_seed + r);
    sum += purity(abundances(points, endmembers), normalize);
  }
  return sum / static_cast<double>(runs);
}

} // namespace advis
