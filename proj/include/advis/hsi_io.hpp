#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace advis {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A hyperspectral cube held in pixel-interleaved order:
/// data[(row * cols + col) * bands + band].
struct HsiCube {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t bands = 0;
  std::vector<float> data;

  std::size_t pixels() const { return rows * cols; }
  float at(std::size_t row, std::size_t col, std::size_t band) const {
    return data[(row * cols + col) * bands + band];
  }
};

/// Per-pixel ground truth, 0 meaning background.
struct LabelMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> labels;
  int num_classes = 0;
};

struct PixelCoord {
  std::size_t row = 0;
  std::size_t col = 0;
};

struct PointCloud {
  RowMatrix points;                     // n x D
  std::vector<PixelCoord> pixel_index;  // point row -> cube position
  std::vector<int> gt;                  // empty when no labels were supplied

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
  bool has_gt() const { return !gt.empty(); }
};

enum class CubeFormat { flat_binary, envi };
enum class Scope { all, labeled_only };
enum class Normalization { none, global_max };

CubeFormat parse_cube_format(const std::string& s);
Scope parse_scope(const std::string& s);

/// Sidecar header path for a flat-binary payload.
std::filesystem::path flat_header_path(const std::filesystem::path& payload);

HsiCube load_cube(const std::filesystem::path& path, CubeFormat format = CubeFormat::flat_binary);
LabelMap load_labels(const std::filesystem::path& path);

void save_cube(const std::filesystem::path& path, const HsiCube& cube);
void save_labels(const std::filesystem::path& path, const LabelMap& labels);

/// Flattens a cube to a point cloud. `labels` may be null only for Scope::all.
PointCloud flatten(const HsiCube& cube, const LabelMap* labels, Scope scope,
                   Normalization normalization = Normalization::global_max);

/// Scatters per-point values back into a rows*cols raster; pixels not in the
/// cloud receive `fill`.
std::vector<std::int32_t> to_raster(const PointCloud& cloud, const std::vector<int>& values,
                                    std::size_t rows, std::size_t cols, std::int32_t fill = 0);

} // namespace advis
