#pragma once

#include "advis/diffusion.hpp"
#include "advis/hsi_io.hpp"
#include "advis/knn.hpp"
#include "advis/modes.hpp"
#include "advis/segmentation.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>

namespace advis {

struct PipelineConfig {
  std::size_t neighbors = 320;
  int classes = 6;
  double sigma0 = 1.14e-3;
  int time = 32;
  std::size_t purity_runs = 100;
  std::optional<std::size_t> num_materials; // bypasses HySime when set
  std::uint64_t seed = 0;
  Symmetrization symmetrization = Symmetrization::mutual_or;
  std::size_t max_eigenpairs = 100;
  bool normalize_abundances = true;
  std::filesystem::path cache_dir; // empty disables the operator cache
};

/// Seed-independent stages: kNN graph, diffusion operator, coordinates at the
/// configured time, and density.
struct Geometry {
  KnnGraph graph;
  DiffusionOperator op;
  RowMatrix coords;
  Eigen::VectorXd density;
};

/// Seed-dependent stages: averaged purity and the mode ranking.
struct Ranked {
  std::size_t materials = 0;
  Eigen::VectorXd purity;
  ModeRanking ranking;
};

Geometry prepare_geometry(const RowMatrix& points, const PipelineConfig& config);
Ranked rank_pixels(const RowMatrix& points, const Geometry& geometry, const PipelineConfig& config);

Segmentation dvis(const Geometry& geometry, const Ranked& ranked, int classes);
Segmentation advis(const Geometry& geometry, const Ranked& ranked, int classes, std::size_t budget,
                   LabelOracle& oracle);

Segmentation run_dvis(const RowMatrix& points, const PipelineConfig& config);
Segmentation run_advis(const RowMatrix& points, const PipelineConfig& config, std::size_t budget,
                       LabelOracle& oracle);

} // namespace advis
