#pragma once

#include "advis/hsi_io.hpp"

#include <cstddef>
#include <vector>

namespace advis {

/// Exact Euclidean k-nearest-neighbor lists, self excluded. Row i occupies
/// [i*k, (i+1)*k) of both arrays, sorted by (distance, index).
struct KnnGraph {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::size_t> neighbors;
  std::vector<double> distances;

  std::size_t neighbor(std::size_t i, std::size_t r) const { return neighbors[i * k + r]; }
  double distance(std::size_t i, std::size_t r) const { return distances[i * k + r]; }
};

KnnGraph build_knn(const RowMatrix& points, std::size_t k);
inline KnnGraph build_knn(const PointCloud& cloud, std::size_t k) { return build_knn(cloud.points, k); }

} // namespace advis
