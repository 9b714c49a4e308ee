#pragma once

#include "advis/metrics.hpp"
#include "advis/pipeline.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace advis {

struct SweepResult {
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  double nmi_advis = 0.0;
  double nmi_dvis = 0.0;
  double runtime_seconds = 0.0;

  bool operator==(const SweepResult&) const = default;
};

struct SweepOptions {
  NmiNormalizer normalizer = NmiNormalizer::arithmetic;
  /// Reuse the graph, operator and per-seed purity across budgets. Off only to
  /// check that reuse does not change results.
  bool reuse_upstream = true;
};

/// One ADVIS run per (budget, seed) against the ground-truth oracle, plus one
/// D-VIS run per seed. Only points with gt >= 1 are scored.
std::vector<SweepResult> budget_sweep(const PointCloud& cloud, const std::vector<std::size_t>& budgets,
                                      const PipelineConfig& config,
                                      const std::vector<std::uint64_t>& seeds,
                                      const SweepOptions& options = {});

struct BudgetSummary {
  std::size_t budget = 0;
  std::size_t runs = 0;
  double advis_mean = 0.0;
  double advis_std = 0.0;
  double dvis_mean = 0.0;
  double dvis_std = 0.0;
};

/// Mean and sample standard deviation per budget, budgets ascending.
std::vector<BudgetSummary> summarize(const std::vector<SweepResult>& results);

/// NMI restricted to points whose ground truth is >= 1.
double score_labeled(const std::vector<int>& predicted, const std::vector<int>& truth,
                     NmiNormalizer normalizer = NmiNormalizer::arithmetic);

/// Parses "a..b..step" (inclusive) or a comma list.
std::vector<std::size_t> parse_budgets(const std::string& spec);

} // namespace advis
