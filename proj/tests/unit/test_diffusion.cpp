#include "advis/diffusion.hpp"
#include "advis/errors.hpp"
#include "advis/knn.hpp"
#include "advis/spectral.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace advis;
namespace t_ = advis::testing;

namespace {

SparseMatrix from_dense(const Eigen::MatrixXd& W) { return W.sparseView(); }

TruncationPolicy keep_all() {
  TruncationPolicy p;
  p.time = 0;
  p.threshold = 0.0;
  return p;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

} // namespace

TEST_CASE("three-node path: stationary law and spectrum by hand") {
  Eigen::MatrixXd W(3, 3);
  W << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  auto op = build_operator_from_adjacency(from_dense(W), Symmetrization::mutual_or, keep_all());
  CHECK(op.stationary()(0) == doctest::Approx(0.25));
  CHECK(op.stationary()(1) == doctest::Approx(0.5));
  CHECK(op.stationary()(2) == doctest::Approx(0.25));
  REQUIRE(op.eigenvalues().size() == 3);
  CHECK(op.eigenvalues()(0) == doctest::Approx(1.0));
  CHECK(op.eigenvalues()(1) == doctest::Approx(-1.0));
  CHECK(std::abs(op.eigenvalues()(2)) < 1e-12);
  // t = 1: rows of P are (0,1,0), (1/2,0,1/2), (0,1,0); endpoints coincide
  CHECK(op.distance(1, 0, 2) < 1e-12);
  // D_1(0,1)^2 = 1/4/pi0 + 1/pi1 + 1/4/pi2 = 1 + 2 + 1
  CHECK(op.distance(1, 0, 1) == doctest::Approx(2.0));
}

TEST_CASE("complete graph: every pair equidistant") {
  const int n = 6;
  Eigen::MatrixXd W = Eigen::MatrixXd::Ones(n, n) - Eigen::MatrixXd::Identity(n, n);
  auto op = build_operator_from_adjacency(from_dense(W), Symmetrization::mutual_or, keep_all());
  // P = (J - I)/(n-1): nontrivial eigenvalue -1/(n-1)
  CHECK(op.eigenvalues()(1) == doctest::Approx(-1.0 / (n - 1)));
  const double d01 = op.distance(2, 0, 1);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      CHECK(op.distance(2, i, j) == doctest::Approx(d01));
  // t = 0: sqrt(1/pi_i + 1/pi_j) = sqrt(2n)
  CHECK(op.distance(0, 2, 4) == doctest::Approx(std::sqrt(2.0 * n)));
}

TEST_CASE("transition is row-stochastic and pi is stationary") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto W = t_::random_connected_graph(40, 0.08, seed);
    auto op = build_operator_from_adjacency(W, Symmetrization::mutual_or);
    Eigen::MatrixXd P(op.transition());
    CHECK((P.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    Eigen::RowVectorXd pi = op.stationary().transpose();
    CHECK((pi * P - pi).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((op.stationary() - t_::dense_stationary(P)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("spectral distance equals the matrix-power definition") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto X = t_::random_points(30, 3, seed);
    auto g = build_knn(X, 5);
    auto op = build_operator(g, Symmetrization::mutual_or, keep_all());
    t_::PreciseDiffusion oracle(Eigen::MatrixXd(knn_adjacency(g, Symmetrization::mutual_or)));
    Eigen::MatrixXd P(op.transition());
    for (int t : {0, 1, 2, 4, 8, 16}) {
      oracle.advance_to(t);
      auto Pt = t_::matrix_power(P, t);
      for (std::size_t i = 0; i < 30; i += 3)
        for (std::size_t j = i + 1; j < 30; j += 4) {
          CHECK(rel_err(op.distance(t, i, j), oracle.distance(i, j)) < 1e-8);
          // the double-precision definition agrees wherever it is well conditioned
          const double coarse = t_::defining_distance(Pt, op.stationary(), i, j);
          CHECK(std::abs(op.distance(t, i, j) - coarse) < 1e-12);
        }
    }
  }
}

TEST_CASE("embed rows reproduce distance") {
  auto X = t_::random_points(50, 4, 7);
  auto op = build_operator(build_knn(X, 6), Symmetrization::mutual_or);
  for (int t : {1, 4, 32}) {
    auto E = op.embed(t);
    for (std::size_t i = 0; i < 50; i += 7)
      for (std::size_t j = 0; j < 50; j += 5)
        CHECK((E.row(i) - E.row(j)).norm() == doctest::Approx(op.distance(t, i, j)).epsilon(1e-12));
  }
}

TEST_CASE("truncation drops exactly the negligible pairs") {
  auto X = t_::random_points(80, 3, 3);
  auto g = build_knn(X, 8);
  auto full = build_operator(g, Symmetrization::mutual_or, keep_all());
  TruncationPolicy pol;
  pol.time = 8;
  pol.threshold = 1e-6;
  auto cut = build_operator(g, Symmetrization::mutual_or, pol);
  const auto kept = cut.eigenvalues().size();
  REQUIRE(kept >= 1);
  REQUIRE(kept < full.eigenvalues().size());
  for (Eigen::Index k = 0; k < kept; ++k)
    CHECK(std::pow(std::abs(cut.eigenvalues()(k)), 8) >= 1e-6);
  CHECK(std::pow(std::abs(full.eigenvalues()(kept)), 8) < 1e-6);

  // the dropped tail bounds the squared error at t = 8
  for (std::size_t i = 0; i < 80; i += 11)
    for (std::size_t j = 1; j < 80; j += 13) {
      const double a = full.distance(8, i, j), b = cut.distance(8, i, j);
      CHECK(b <= a + 1e-12);
      CHECK(a * a - b * b <= 1e-12 * (1.0 / full.stationary()(i) + 1.0 / full.stationary()(j)) + 1e-12);
    }

  pol.max_pairs = 3;
  CHECK(build_operator(g, Symmetrization::mutual_or, pol).eigenvalues().size() == 3);
  pol.threshold = 2.0; // nothing qualifies, but one pair is always kept
  CHECK(build_operator(g, Symmetrization::mutual_or, pol).eigenvalues().size() == 1);
}

TEST_CASE("mutual-or adjacency collapses duplicates") {
  RowMatrix X(3, 1);
  X << 0.0, 1.0, 3.0;
  auto g = build_knn(X, 1); // 0<->1 mutual, 2->1
  Eigen::MatrixXd W(knn_adjacency(g, Symmetrization::mutual_or));
  Eigen::MatrixXd want(3, 3);
  want << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  CHECK(W == want);
  Eigen::MatrixXd D(knn_adjacency(g, Symmetrization::directed));
  CHECK(D.sum() == 3.0);
  CHECK(D(2, 1) == 1.0);
  CHECK(D(1, 2) == 0.0);
}

TEST_CASE("disconnected graphs are rejected with a component count") {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(5, 5);
  W(0, 1) = W(1, 0) = W(2, 3) = W(3, 2) = W(3, 4) = W(4, 3) = 1;
  try {
    build_operator_from_adjacency(from_dense(W), Symmetrization::mutual_or);
    FAIL("expected DisconnectedGraphError");
  } catch (const DisconnectedGraphError& e) {
    CHECK(e.components() == 2);
  }
  Eigen::MatrixXd A = W;
  A(0, 2) = 1; // not symmetric
  CHECK_THROWS_AS(build_operator_from_adjacency(from_dense(A), Symmetrization::mutual_or), InvalidArgument);
}

TEST_CASE("Lanczos agrees with the dense solver") {
  auto X = t_::random_points(300, 3, 11);
  auto W = knn_adjacency(build_knn(X, 7), Symmetrization::mutual_or);
  Eigen::VectorXd d = Eigen::VectorXd(Eigen::MatrixXd(W).rowwise().sum()).cwiseSqrt().cwiseInverse();
  SparseMatrix S = d.asDiagonal() * W * d.asDiagonal();
  auto dense = dense_top_magnitude(Eigen::MatrixXd(S), 20);
  auto lz = lanczos_top_magnitude(S, 20);
  REQUIRE(lz.values.size() == 20);
  CHECK((dense.values - lz.values).cwiseAbs().maxCoeff() < 1e-9);
  // projectors agree even where signs differ
  for (Eigen::Index k = 0; k < 20; ++k)
    CHECK(std::abs(std::abs(dense.vectors.col(k).dot(lz.vectors.col(k))) - 1.0) < 1e-6);

  TruncationPolicy a, b;
  a.time = b.time = 4;
  b.dense_limit = 10;
  auto g = build_knn(X, 7);
  auto opa = build_operator(g, Symmetrization::mutual_or, a);
  auto opb = build_operator(g, Symmetrization::mutual_or, b);
  for (std::size_t i = 0; i < 300; i += 37)
    CHECK(opb.distance(4, i, 5) == doctest::Approx(opa.distance(4, i, 5)).epsilon(1e-6));
}

TEST_CASE("directed mode: stationary law and exact distances") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto X = t_::random_points(40, 2, seed + 100);
    auto g = build_knn(X, 6);
    auto W = knn_adjacency(g, Symmetrization::directed);
    if (count_components(W, Symmetrization::directed) != 1) {
      CHECK_THROWS_AS(build_operator(g, Symmetrization::directed), DisconnectedGraphError);
      continue;
    }
    auto op = build_operator(g, Symmetrization::directed);
    Eigen::MatrixXd P(op.transition());
    Eigen::RowVectorXd pi = op.stationary().transpose();
    CHECK((pi * P - pi).cwiseAbs().maxCoeff() < 1e-10);
    auto P3 = t_::matrix_power(P, 3);
    auto E = op.embed(3);
    for (std::size_t i = 0; i < 40; i += 9) {
      const double want = t_::defining_distance(P3, op.stationary(), i, 1);
      CHECK(rel_err(op.distance(3, i, 1), want) < 1e-8);
      CHECK(rel_err((E.row(i) - E.row(1)).norm(), want) < 1e-8);
    }
  }
}

TEST_CASE("operator cache round trip") {
  t_::TempDir dir;
  auto X = t_::random_points(40, 3, 5);
  auto g = build_knn(X, 5);
  TruncationPolicy pol;
  auto a = build_operator_cached(X, g, Symmetrization::mutual_or, pol, dir.path());
  std::size_t files = 0;
  for (auto& e : std::filesystem::directory_iterator(dir.path()))
    files += e.is_regular_file();
  CHECK(files == 1);
  auto b = build_operator_cached(X, g, Symmetrization::mutual_or, pol, dir.path());
  CHECK(a.eigenvalues() == b.eigenvalues());
  CHECK(a.eigenvectors() == b.eigenvectors());
  CHECK(a.distance(32, 1, 2) == b.distance(32, 1, 2));
  pol.time = 4;
  CHECK(operator_cache_key(X, 5, Symmetrization::mutual_or, pol) !=
        operator_cache_key(X, 5, Symmetrization::mutual_or, TruncationPolicy{}));
  std::ofstream(dir / "junk.bin") << "nope";
  CHECK_THROWS_AS(load_operator(dir / "junk.bin"), FormatError);
}
