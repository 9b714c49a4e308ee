#pragma once

#include "advis/diffusion.hpp"
#include "advis/modes.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace advis {

enum class Provenance : std::uint8_t { unlabeled, mode_assigned, queried, fallback, propagated };

std::string to_string(Provenance p);

struct QueryRecord {
  std::size_t pixel = 0;
  int label = 0;
};

/// Per-point labels in {0..K}, 0 meaning not yet labeled.
struct Segmentation {
  int classes = 0;
  std::vector<int> labels;
  std::vector<Provenance> provenance;
  /// For propagated points, the point whose label was copied; -1 otherwise.
  std::vector<std::ptrdiff_t> source;
  std::vector<QueryRecord> queries;

  std::size_t size() const { return labels.size(); }
  std::size_t count(Provenance p) const;
  bool complete() const;
};

/// Source of ground-truth answers.
class LabelOracle {
public:
  virtual ~LabelOracle() = default;
  virtual int label(std::size_t pixel) = 0;
};

/// Answers from a known label vector (1-based classes).
class GroundTruthOracle final : public LabelOracle {
public:
  explicit GroundTruthOracle(std::vector<int> truth) : truth_(std::move(truth)) {}
  int label(std::size_t pixel) override;

private:
  std::vector<int> truth_;
};

/// Answers from a fixed pixel -> class table, e.g. a replayed query log.
class TableOracle final : public LabelOracle {
public:
  explicit TableOracle(std::map<std::size_t, int> answers) : answers_(std::move(answers)) {}
  int label(std::size_t pixel) override;

private:
  std::map<std::size_t, int> answers_;
};

/// Wraps an oracle with memoization, a budget, and range checking.
class BudgetedOracle {
public:
  BudgetedOracle(LabelOracle& inner, std::size_t budget, int classes)
      : inner_(inner), budget_(budget), classes_(classes) {}

  int query(std::size_t pixel);
  std::size_t used() const { return memo_.size(); }
  std::size_t budget() const { return budget_; }
  const std::vector<QueryRecord>& log() const { return log_; }

private:
  LabelOracle& inner_;
  std::size_t budget_;
  int classes_;
  std::map<std::size_t, int> memo_;
  std::vector<QueryRecord> log_;
};

/// Unsupervised mode labeling: the top-K ranked points get labels 1..K.
Segmentation dvis_label_modes(const ModeRanking& ranking, int classes);

/// Active mode labeling: query the top-B ranked points, then give each class
/// still missing a label (ascending id) to the next ranked points.
Segmentation advis_label_modes(const ModeRanking& ranking, int classes, std::size_t budget,
                               LabelOracle& oracle);

/// Fills every unlabeled point, visiting in non-increasing zeta order, with the
/// label of its D_t-nearest labeled point of zeta at least its own.
Segmentation propagate(const Segmentation& partial, const Eigen::VectorXd& zeta,
                       const RowMatrix& coords);
Segmentation propagate(const Segmentation& partial, const Eigen::VectorXd& zeta,
                       const DiffusionOperator& op, int t);

} // namespace advis
