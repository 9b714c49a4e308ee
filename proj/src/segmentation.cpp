#include "advis/segmentation.hpp"

#include "advis/errors.hpp"

#include <algorithm>
#include <limits>

namespace advis {
namespace {

Segmentation empty_segmentation(std::size_t n, int classes) {
  Segmentation seg;
  seg.classes = classes;
  seg.labels.assign(n, 0);
  seg.provenance.assign(n, Provenance::unlabeled);
  seg.source.assign(n, -1);
  return seg;
}

} // namespace

std::string to_string(Provenance p) {
  switch (p) {
  case Provenance::unlabeled: return "unlabeled";
  case Provenance::mode_assigned: return "mode-assigned";
  case Provenance::queried: return "queried";
  case Provenance::fallback: return "fallback";
  case Provenance::propagated: return "propagated";
  }
  return "unknown";
}

std::size_t Segmentation::count(Provenance p) const {
  return static_cast<std::size_t>(std::count(provenance.begin(), provenance.end(), p));
}

bool Segmentation::complete() const {
  return std::none_of(labels.begin(), labels.end(), [](int l) { return l == 0; });
}

int GroundTruthOracle::label(std::size_t pixel) {
  if (pixel >= truth_.size())
    throw InvalidArgument("oracle: pixel " + std::to_string(pixel) + " out of range");
  return truth_[pixel];
}

int TableOracle::label(std::size_t pixel) {
  auto it = answers_.find(pixel);
  if (it == answers_.end())
    throw InvalidArgument("oracle: no recorded answer for pixel " + std::to_string(pixel));
  return it->second;
}

int BudgetedOracle::query(std::size_t pixel) {
  if (auto it = memo_.find(pixel); it != memo_.end())
    return it->second;
  if (memo_.size() >= budget_)
    throw InvalidArgument("oracle budget of " + std::to_string(budget_) + " queries exhausted");
  const int answer = inner_.label(pixel);
  if (answer < 1 || answer > classes_)
    throw InvalidArgument("oracle answered class " + std::to_string(answer) + " for pixel " +
                          std::to_string(pixel) + "; expected 1.." + std::to_string(classes_));
  memo_.emplace(pixel, answer);
  log_.push_back({pixel, answer});
  return answer;
}

Segmentation dvis_label_modes(const ModeRanking& ranking, int classes) {
  const std::size_t n = ranking.ordering.size();
  if (classes < 1)
    throw InvalidArgument("class count K must be >= 1");
  if (static_cast<std::size_t>(classes) > n)
    throw InvalidArgument("class count K exceeds the number of points");
  auto seg = empty_segmentation(n, classes);
  for (int k = 0; k < classes; ++k) {
    const auto x = ranking.ordering[static_cast<std::size_t>(k)];
    seg.labels[x] = k + 1;
    seg.provenance[x] = Provenance::mode_assigned;
  }
  return seg;
}

Segmentation advis_label_modes(const ModeRanking& ranking, int classes, std::size_t budget,
                               LabelOracle& oracle) {
  const std::size_t n = ranking.ordering.size();
  if (classes < 1)
    throw InvalidArgument("class count K must be >= 1");
  auto seg = empty_segmentation(n, classes);

  const std::size_t asked = std::min(budget, n);
  BudgetedOracle budgeted(oracle, asked, classes);
  std::vector<char> seen(static_cast<std::size_t>(classes) + 1, 0);
  for (std::size_t k = 0; k < asked; ++k) {
    const auto x = ranking.ordering[k];
    const int label = budgeted.query(x);
    seg.labels[x] = label;
    seg.provenance[x] = Provenance::queried;
    seen[static_cast<std::size_t>(label)] = 1;
  }
  seg.queries = budgeted.log();

  std::vector<int> missing;
  for (int c = 1; c <= classes; ++c)
    if (!seen[static_cast<std::size_t>(c)])
      missing.push_back(c);
  if (asked + missing.size() > n)
    throw InvalidArgument("budget plus unlabeled classes (" + std::to_string(asked + missing.size()) +
                          ") exceeds the number of points (" + std::to_string(n) + ")");
  for (std::size_t k = 0; k < missing.size(); ++k) {
    const auto x = ranking.ordering[asked + k];
    seg.labels[x] = missing[k];
    seg.provenance[x] = Provenance::fallback;
  }
  return seg;
}

Segmentation propagate(const Segmentation& partial, const Eigen::VectorXd& zeta,
                       const RowMatrix& coords) {
  const std::size_t n = partial.size();
  if (static_cast<std::size_t>(zeta.size()) != n || static_cast<std::size_t>(coords.rows()) != n)
    throw InvalidArgument("propagate: length mismatch");
  Segmentation seg = partial;
  if (seg.source.size() != n)
    seg.source.assign(n, -1);

  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < n; ++i)
    if (seg.labels[i] > 0)
      labeled.push_back(i);
  if (labeled.empty())
    throw InvalidArgument("propagate: no labeled point to propagate from");

  for (const std::size_t x : descending_order(zeta)) {
    if (seg.labels[x] > 0)
      continue;
    const double zx = zeta(static_cast<Eigen::Index>(x));
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = n;
    for (const std::size_t y : labeled) {
      if (zeta(static_cast<Eigen::Index>(y)) < zx)
        continue;
      const double d = squared_row_distance(coords, x, y);
      if (d < best || (d == best && y < arg)) {
        best = d;
        arg = y;
      }
    }
    if (arg == n)
      throw std::logic_error("propagate: point " + std::to_string(x) +
                             " has no labeled point of higher or equal zeta");
    seg.labels[x] = seg.labels[arg];
    seg.provenance[x] = Provenance::propagated;
    seg.source[x] = static_cast<std::ptrdiff_t>(arg);
    labeled.push_back(x);
  }
  return seg;
}

Segmentation propagate(const Segmentation& partial, const Eigen::VectorXd& zeta,
                       const DiffusionOperator& op, int t) {
  return propagate(partial, zeta, op.embed(t));
}

} // namespace advis
