#include "advis/diffusion.hpp"
#include "advis/errors.hpp"
#include "advis/knn.hpp"
#include "advis/modes.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

using namespace advis;
namespace t_ = advis::testing;

TEST_CASE("density by hand") {
  RowMatrix X(3, 1);
  X << 0.0, 1.0, 3.0;
  auto g = build_knn(X, 2);
  auto p = empirical_density(g, 1.0);
  CHECK(p(0) == doctest::Approx(std::exp(-1.0) + std::exp(-9.0)));
  CHECK(p(1) == doctest::Approx(std::exp(-1.0) + std::exp(-4.0)));
  CHECK(p(2) == doctest::Approx(std::exp(-4.0) + std::exp(-9.0)));
  CHECK_THROWS_AS(empirical_density(g, 0.0), InvalidArgument);
  CHECK_THROWS_AS(empirical_density(g, 1e-300), InvalidArgument);
}

TEST_CASE("zeta is the harmonic mean of normalized inputs") {
  Eigen::VectorXd p(3), e(3);
  p << 2.0, 1.0, 0.0;
  e << 0.5, 1.0, 1.0;
  auto z = zeta(p, e);
  CHECK(z(0) == doctest::Approx(2.0 * 1.0 * 0.5 / 1.5));
  CHECK(z(1) == doctest::Approx(2.0 * 0.5 * 1.0 / 1.5));
  CHECK(z(2) == 0.0);
  CHECK_THROWS_AS(zeta(p, e.head(2)), InvalidArgument);
}

TEST_CASE("descending order breaks ties by index") {
  Eigen::VectorXd v(5);
  v << 1.0, 3.0, 1.0, 3.0, 2.0;
  CHECK(descending_order(v) == std::vector<std::size_t>{1, 3, 4, 0, 2});
}

TEST_CASE("dt, ranking and ordering match brute force") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto X = t_::random_points(80, 3, seed);
    auto op = build_operator(build_knn(X, 8), Symmetrization::mutual_or);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coarse(0, 9); // many exact ties
    Eigen::VectorXd z(80);
    for (auto& v : z)
      v = coarse(rng) / 10.0;
    const int t = 1 << (seed % 6);
    auto dt = dt_values(op, t, z);
    auto E = op.embed(t);
    t_::DistanceFn dist = [&](std::size_t i, std::size_t j) { return std::sqrt(squared_row_distance(E, i, j)); };
    CHECK(dt == t_::brute_dt(dist, z));
    auto r = rank_modes(z, dt);
    CHECK(r.ordering == t_::brute_ordering(z.cwiseProduct(dt)));
  }
}

TEST_CASE("dt of the zeta maximizer is its farthest distance") {
  RowMatrix C(3, 1);
  C << 0.0, 1.0, 5.0;
  Eigen::VectorXd z(3);
  z << 0.2, 0.9, 0.1;
  auto dt = dt_values(C, z);
  CHECK(dt(1) == 4.0);
  CHECK(dt(0) == 1.0);
  CHECK(dt(2) == 4.0);
}

TEST_CASE("diagnostics CSV") {
  t_::TempDir dir;
  PointCloud cloud;
  cloud.points = RowMatrix::Zero(2, 1);
  cloud.pixel_index = {{0, 0}, {3, 4}};
  Eigen::VectorXd p(2), e(2), z(2), d(2);
  p << 1, 2;
  e << 1, 1;
  z << 0.5, 1;
  d << 1, 2;
  auto r = rank_modes(z, d);
  write_diagnostics(dir / "d.csv", cloud, p, e, r);
  std::ifstream in(dir / "d.csv");
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "index,row,col,density,purity,zeta,dt,score,rank");
  CHECK(second == "1,3,4,2,1,1,2,2,0");
  CHECK(first == "0,0,0,1,1,0.5,1,0.5,1");
}
