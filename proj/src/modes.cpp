#include "advis/modes.hpp"

#include "advis/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

namespace advis {

Eigen::VectorXd empirical_density(const KnnGraph& graph, double sigma0) {
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
    throw InvalidArgument("density scale sigma0 must be positive");
  const double inv = 1.0 / (sigma0 * sigma0);
  Eigen::VectorXd p(static_cast<Eigen::Index>(graph.n));
  bool any_positive = false;
  for (std::size_t i = 0; i < graph.n; ++i) {
    double sum = 0.0;
    for (std::size_t r = 0; r < graph.k; ++r) {
      const double d = graph.distance(i, r);
      sum += std::exp(-d * d * inv);
    }
    p(static_cast<Eigen::Index>(i)) = sum;
    any_positive = any_positive || sum > 0.0;
  }
  if (!any_positive)
    throw InvalidArgument("every density underflowed to 0 at sigma0=" + std::to_string(sigma0) +
                          "; use a larger sigma0 (or check the data normalization)");
  return p;
}

Eigen::VectorXd zeta(const Eigen::VectorXd& density, const Eigen::VectorXd& purity) {
  if (density.size() != purity.size())
    throw InvalidArgument("zeta: density and purity lengths differ");
  const double pmax = density.size() ? density.maxCoeff() : 0.0;
  const double emax = purity.size() ? purity.maxCoeff() : 0.0;
  if (!(pmax > 0.0) || !(emax > 0.0))
    throw InvalidArgument("zeta: density and purity maxima must be positive");
  Eigen::VectorXd z(density.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double a = density(i) / pmax;
    const double b = purity(i) / emax;
    z(i) = a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
  }
  return z;
}

std::vector<std::size_t> descending_order(const Eigen::VectorXd& values) {
  std::vector<std::size_t> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values(static_cast<Eigen::Index>(a)) > values(static_cast<Eigen::Index>(b));
  });
  return order;
}

double squared_row_distance(const RowMatrix& coords, std::size_t i, std::size_t j) {
  const double* a = coords.data() + i * static_cast<std::size_t>(coords.cols());
  const double* b = coords.data() + j * static_cast<std::size_t>(coords.cols());
  double sq = 0.0;
  for (Eigen::Index k = 0; k < coords.cols(); ++k) {
    const double d = a[k] - b[k];
    sq += d * d;
  }
  return sq;
}

Eigen::VectorXd dt_values(const RowMatrix& coords, const Eigen::VectorXd& zeta) {
  const auto n = static_cast<std::size_t>(zeta.size());
  if (static_cast<std::size_t>(coords.rows()) != n)
    throw InvalidArgument("dt_values: coordinate and zeta lengths differ");
  for (Eigen::Index i = 0; i < zeta.size(); ++i)
    if (!std::isfinite(zeta(i)))
      throw InvalidArgument("dt_values: non-finite zeta");
  Eigen::VectorXd dt = Eigen::VectorXd::Zero(zeta.size());
  if (n == 0)
    return dt;

  const auto order = descending_order(zeta);
  const std::size_t top = order.front();
  double far = 0.0;
  for (std::size_t y = 0; y < n; ++y)
    far = std::max(far, squared_row_distance(coords, top, y));
  dt(static_cast<Eigen::Index>(top)) = std::sqrt(far);

  for (std::size_t r = 1; r < n; ++r) {
    const std::size_t x = order[r];
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < r; ++q)
      best = std::min(best, squared_row_distance(coords, x, order[q]));
    dt(static_cast<Eigen::Index>(x)) = std::sqrt(best);
  }
  return dt;
}

Eigen::VectorXd dt_values(const DiffusionOperator& op, int t, const Eigen::VectorXd& zeta) {
  if (op.size() != static_cast<std::size_t>(zeta.size()))
    throw InvalidArgument("dt_values: operator and zeta sizes differ");
  return dt_values(op.embed(t), zeta);
}

ModeRanking rank_modes(const Eigen::VectorXd& zeta, const Eigen::VectorXd& dt) {
  if (zeta.size() != dt.size())
    throw InvalidArgument("rank_modes: zeta and dt lengths differ");
  ModeRanking ranking;
  ranking.zeta = zeta;
  ranking.dt = dt;
  ranking.score = zeta.cwiseProduct(dt);
  ranking.ordering = descending_order(ranking.score);
  return ranking;
}

void write_diagnostics(const std::filesystem::path& path, const PointCloud& cloud,
                       const Eigen::VectorXd& density, const Eigen::VectorXd& purity,
                       const ModeRanking& ranking) {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  if (density.size() != n || purity.size() != n || ranking.zeta.size() != n)
    throw InvalidArgument("write_diagnostics: length mismatch");
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write " + path.string());
  out << "index,row,col,density,purity,zeta,dt,score,rank\n";
  std::vector<std::size_t> rank(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < ranking.ordering.size(); ++r)
    rank[ranking.ordering[r]] = r;
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& px = cloud.pixel_index[static_cast<std::size_t>(i)];
    out << i << ',' << px.row << ',' << px.col << ',' << density(i) << ',' << purity(i) << ','
        << ranking.zeta(i) << ',' << ranking.dt(i) << ',' << ranking.score(i) << ','
        << rank[static_cast<std::size_t>(i)] << '\n';
  }
}

} // namespace advis
