#pragma once

#include "advis/diffusion.hpp"
#include "advis/knn.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <vector>

namespace advis {

/// p(x) = sum over the N nearest neighbors y of exp(-|x - y|^2 / sigma0^2).
Eigen::VectorXd empirical_density(const KnnGraph& graph, double sigma0);

/// Harmonic mean of max-normalized density and purity.
Eigen::VectorXd zeta(const Eigen::VectorXd& density, const Eigen::VectorXd& purity);

/// Indices sorted by value descending, ascending index on ties. This is the
/// global tie order used by every stage.
std::vector<std::size_t> descending_order(const Eigen::VectorXd& values);

/// Distance to the D_t-nearest point ranked earlier in zeta order; the
/// zeta-maximizer instead gets its distance to the farthest point.
Eigen::VectorXd dt_values(const DiffusionOperator& op, int t, const Eigen::VectorXd& zeta);

/// Same computation from precomputed diffusion coordinates (rows of embed(t)).
Eigen::VectorXd dt_values(const RowMatrix& coords, const Eigen::VectorXd& zeta);

struct ModeRanking {
  Eigen::VectorXd zeta;
  Eigen::VectorXd dt;
  Eigen::VectorXd score;             // zeta * dt
  std::vector<std::size_t> ordering; // score descending, index tie-break
};

ModeRanking rank_modes(const Eigen::VectorXd& zeta, const Eigen::VectorXd& dt);

/// Squared Euclidean distance between two coordinate rows, summed in column
/// order so pointwise and bulk queries agree bit for bit.
double squared_row_distance(const RowMatrix& coords, std::size_t i, std::size_t j);

/// CSV with one row per point: index,row,col,density,purity,zeta,dt,score,rank.
void write_diagnostics(const std::filesystem::path& path, const PointCloud& cloud,
                       const Eigen::VectorXd& density, const Eigen::VectorXd& purity,
                       const ModeRanking& ranking);

} // namespace advis
