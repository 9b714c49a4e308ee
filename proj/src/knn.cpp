#include "advis/knn.hpp"

#include "advis/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace advis {

KnnGraph build_knn(const RowMatrix& points, std::size_t k) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto dim = static_cast<std::size_t>(points.cols());
  if (k < 1 || k >= n)
    throw InvalidArgument("neighbor count must satisfy 1 <= N < n (N=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");

  KnnGraph graph;
  graph.n = n;
  graph.k = k;
  graph.neighbors.resize(n * k);
  graph.distances.resize(n * k);

  std::vector<std::pair<double, std::size_t>> candidates(n - 1);
  const double* base = points.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = base + i * dim;
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i)
        continue;
      const double* xj = base + j * dim;
      double sq = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = xi[d] - xj[d];
        sq += diff * diff;
      }
      candidates[c++] = {sq, j};
    }
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end());
    for (std::size_t r = 0; r < k; ++r) {
      graph.neighbors[i * k + r] = candidates[r].second;
      graph.distances[i * k + r] = std::sqrt(candidates[r].first);
    }
  }
  return graph;
}

} // namespace advis
