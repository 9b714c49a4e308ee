#include "advis/pipeline.hpp"

#include "advis/unmixing.hpp"

namespace advis {

Geometry prepare_geometry(const RowMatrix& points, const PipelineConfig& config) {
  Geometry g;
  g.graph = build_knn(points, config.neighbors);
  TruncationPolicy policy;
  policy.time = config.time;
  policy.max_pairs = config.max_eigenpairs;
  g.op = build_operator_cached(points, g.graph, config.symmetrization, policy, config.cache_dir);
  g.coords = g.op.embed(config.time);
  g.density = empirical_density(g.graph, config.sigma0);
  return g;
}

Ranked rank_pixels(const RowMatrix& points, const Geometry& geometry, const PipelineConfig& config) {
  Ranked r;
  r.materials = config.num_materials ? *config.num_materials : hysime(points);
  r.purity = averaged_purity(points, r.materials, config.purity_runs, config.seed,
                             config.normalize_abundances);
  const Eigen::VectorXd z = zeta(geometry.density, r.purity);
  r.ranking = rank_modes(z, dt_values(geometry.coords, z));
  return r;
}

Segmentation dvis(const Geometry& geometry, const Ranked& ranked, int classes) {
  return propagate(dvis_label_modes(ranked.ranking, classes), ranked.ranking.zeta, geometry.coords);
}

Segmentation advis(const Geometry& geometry, const Ranked& ranked, int classes, std::size_t budget,
                   LabelOracle& oracle) {
  return propagate(advis_label_modes(ranked.ranking, classes, budget, oracle), ranked.ranking.zeta,
                   geometry.coords);
}

Segmentation run_dvis(const RowMatrix& points, const PipelineConfig& config) {
  const auto geometry = prepare_geometry(points, config);
  return dvis(geometry, rank_pixels(points, geometry, config), config.classes);
}

Segmentation run_advis(const RowMatrix& points, const PipelineConfig& config, std::size_t budget,
                       LabelOracle& oracle) {
  const auto geometry = prepare_geometry(points, config);
  return advis(geometry, rank_pixels(points, geometry, config), config.classes, budget, oracle);
}

} // namespace advis
