#pragma once

#include "advis/hsi_io.hpp"
#include "advis/sweep.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace advis {

enum class EmitFormat { csv, json };

struct EmitOptions {
  /// Wall-clock runtimes differ run to run; leave them out for byte-stable output.
  bool include_runtime = true;
};

std::string format_results(const std::vector<SweepResult>& results, EmitFormat format,
                           const EmitOptions& options = {});
std::vector<SweepResult> parse_results(const std::string& text, EmitFormat format);

void emit(const std::filesystem::path& path, const std::vector<SweepResult>& results,
          EmitFormat format, const EmitOptions& options = {});

std::string format_summary_csv(const std::vector<BudgetSummary>& summary);

using Rgb = std::array<std::uint8_t, 3>;

/// Entry 0 is background; entries 1..classes are well-separated hues.
std::vector<Rgb> default_palette(int classes);

/// 8-bit palettized BMP of a rows x cols raster of palette indices.
std::vector<std::uint8_t> encode_indexed_bmp(const std::vector<std::int32_t>& raster, std::size_t rows,
                                             std::size_t cols, const std::vector<Rgb>& palette);
/// 24-bit BMP, pixels row-major.
std::vector<std::uint8_t> encode_rgb_bmp(const std::vector<Rgb>& pixels, std::size_t rows, std::size_t cols);

void render_labels(const std::filesystem::path& path, const std::vector<std::int32_t>& raster,
                   std::size_t rows, std::size_t cols, const std::vector<Rgb>& palette);

/// Three-band false-color composite, each band stretched between its 2nd and
/// 98th percentile.
std::vector<Rgb> false_color(const HsiCube& cube, std::array<std::size_t, 3> bands);
std::array<std::size_t, 3> default_false_color_bands(std::size_t bands);

} // namespace advis
