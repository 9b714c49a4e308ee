#include "advis/sweep.hpp"

#include "advis/errors.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

namespace advis {

double score_labeled(const std::vector<int>& predicted, const std::vector<int>& truth,
                     NmiNormalizer normalizer) {
  if (predicted.size() != truth.size())
    throw InvalidArgument("score: prediction and ground truth differ in length");
  std::vector<int> a, b;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (truth[i] >= 1) {
      a.push_back(predicted[i]);
      b.push_back(truth[i]);
    }
  return nmi(a, b, normalizer);
}

std::vector<SweepResult> budget_sweep(const PointCloud& cloud, const std::vector<std::size_t>& budgets,
                                      const PipelineConfig& config,
                                      const std::vector<std::uint64_t>& seeds,
                                      const SweepOptions& options) {
  if (budgets.empty())
    throw InvalidArgument("budget_sweep: no budgets given");
  if (!cloud.has_gt())
    throw InvalidArgument("budget_sweep: the point cloud carries no ground truth");
  using clock = std::chrono::steady_clock;

  std::optional<Geometry> shared;
  if (options.reuse_upstream)
    shared = prepare_geometry(cloud.points, config);

  std::vector<SweepResult> rows;
  rows.reserve(budgets.size() * seeds.size());
  for (const auto seed : seeds) {
    PipelineConfig cfg = config;
    cfg.seed = seed;
    std::optional<Ranked> ranked;
    if (options.reuse_upstream)
      ranked = rank_pixels(cloud.points, *shared, cfg);

    double nmi_dvis = 0.0;
    {
      const Geometry geometry = shared ? Geometry{} : prepare_geometry(cloud.points, cfg);
      const Geometry& g = shared ? *shared : geometry;
      const Ranked r = ranked ? *ranked : rank_pixels(cloud.points, g, cfg);
      nmi_dvis = score_labeled(dvis(g, r, cfg.classes).labels, cloud.gt, options.normalizer);
    }

    for (const auto budget : budgets) {
      const auto start = clock::now();
      GroundTruthOracle oracle(cloud.gt);
      Segmentation seg;
      if (options.reuse_upstream) {
        seg = advis(*shared, *ranked, cfg.classes, budget, oracle);
      } else {
        const auto geometry = prepare_geometry(cloud.points, cfg);
        seg = advis(geometry, rank_pixels(cloud.points, geometry, cfg), cfg.classes, budget, oracle);
      }
      SweepResult row;
      row.budget = budget;
      row.seed = seed;
      row.nmi_advis = score_labeled(seg.labels, cloud.gt, options.normalizer);
      row.nmi_dvis = nmi_dvis;
      row.runtime_seconds = std::chrono::duration<double>(clock::now() - start).count();
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<BudgetSummary> summarize(const std::vector<SweepResult>& results) {
  std::map<std::size_t, std::vector<const SweepResult*>> by_budget;
  for (const auto& r : results)
    by_budget[r.budget].push_back(&r);
  std::vector<BudgetSummary> out;
  for (const auto& [budget, rows] : by_budget) {
    BudgetSummary s;
    s.budget = budget;
    s.runs = rows.size();
    for (const auto* r : rows) {
      s.advis_mean += r->nmi_advis;
      s.dvis_mean += r->nmi_dvis;
    }
    s.advis_mean /= static_cast<double>(s.runs);
    s.dvis_mean /= static_cast<double>(s.runs);
    if (s.runs > 1) {
      for (const auto* r : rows) {
        s.advis_std += (r->nmi_advis - s.advis_mean) * (r->nmi_advis - s.advis_mean);
        s.dvis_std += (r->nmi_dvis - s.dvis_mean) * (r->nmi_dvis - s.dvis_mean);
      }
      s.advis_std = std::sqrt(s.advis_std / static_cast<double>(s.runs - 1));
      s.dvis_std = std::sqrt(s.dvis_std / static_cast<double>(s.runs - 1));
    }
    out.push_back(s);
  }
  return out;
}

std::vector<std::size_t> parse_budgets(const std::string& spec) {
  std::vector<std::size_t> out;
  auto to_count = [&](const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || v < 0)
      throw InvalidArgument("bad budget value '" + s + "' in '" + spec + "'");
    return static_cast<std::size_t>(v);
  };
  if (auto dots = spec.find(".."); dots != std::string::npos) {
    auto second = spec.find("..", dots + 2);
    const auto lo = to_count(spec.substr(0, dots));
    const auto hi = to_count(spec.substr(dots + 2, second == std::string::npos ? std::string::npos
                                                                                : second - dots - 2));
    const auto step = second == std::string::npos ? 1 : to_count(spec.substr(second + 2));
    if (step == 0 || hi < lo)
      throw InvalidArgument("bad budget range '" + spec + "'");
    for (auto b = lo; b <= hi; b += step)
      out.push_back(b);
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(to_count(item));
  if (out.empty())
    throw InvalidArgument("empty budget list");
  return out;
}

} // namespace advis
