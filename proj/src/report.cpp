#include "advis/report.hpp"

#include "advis/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace advis {
namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8)
    out.push_back(static_cast<std::uint8_t>((v >> s) & 0xff));
}

std::vector<std::uint8_t> bmp_header(std::size_t rows, std::size_t cols, std::uint16_t bits,
                                     std::uint32_t palette_entries) {
  const std::size_t row_bytes = (cols * bits / 8 + 3) / 4 * 4;
  const std::uint32_t data_offset = 14 + 40 + palette_entries * 4;
  const auto image_size = static_cast<std::uint32_t>(row_bytes * rows);
  std::vector<std::uint8_t> out;
  out.reserve(data_offset + image_size);
  out.push_back('B');
  out.push_back('M');
  put_u32(out, data_offset + image_size);
  put_u32(out, 0);
  put_u32(out, data_offset);
  put_u32(out, 40);
  put_u32(out, static_cast<std::uint32_t>(cols));
  put_u32(out, static_cast<std::uint32_t>(rows)); // positive height: bottom-up rows
  put_u16(out, 1);
  put_u16(out, bits);
  put_u32(out, 0);
  put_u32(out, image_size);
  put_u32(out, 2835);
  put_u32(out, 2835);
  put_u32(out, palette_entries);
  put_u32(out, 0);
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path.string());
  out << text;
}

} // namespace

std::string format_results(const std::vector<SweepResult>& results, EmitFormat format,
                           const EmitOptions& options) {
  if (format == EmitFormat::json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : results) {
      nlohmann::json row = {{"budget", r.budget}, {"seed", r.seed}, {"nmi_advis", r.nmi_advis},
                            {"nmi_dvis", r.nmi_dvis}};
      if (options.include_runtime)
        row["runtime_seconds"] = r.runtime_seconds;
      rows.push_back(row);
    }
    return rows.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "budget,seed,nmi_advis,nmi_dvis";
  if (options.include_runtime)
    out << ",runtime_seconds";
  out << "\n";
  for (const auto& r : results) {
    out << r.budget << ',' << r.seed << ',' << fmt_double(r.nmi_advis) << ',' << fmt_double(r.nmi_dvis);
    if (options.include_runtime)
      out << ',' << fmt_double(r.runtime_seconds);
    out << "\n";
  }
  return out.str();
}

std::vector<SweepResult> parse_results(const std::string& text, EmitFormat format) {
  std::vector<SweepResult> out;
  if (format == EmitFormat::json) {
    const auto rows = nlohmann::json::parse(text);
    for (const auto& row : rows) {
      SweepResult r;
      r.budget = row.at("budget").get<std::size_t>();
      r.seed = row.at("seed").get<std::uint64_t>();
      r.nmi_advis = row.at("nmi_advis").get<double>();
      r.nmi_dvis = row.at("nmi_dvis").get<double>();
      r.runtime_seconds = row.value("runtime_seconds", 0.0);
      out.push_back(r);
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("budget,seed,nmi_advis,nmi_dvis", 0) != 0)
    throw FormatError("sweep CSV: missing header");
  const bool with_runtime = line.find("runtime_seconds") != std::string::npos;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::istringstream fields(line);
    std::string f;
    std::vector<std::string> cells;
    while (std::getline(fields, f, ','))
      cells.push_back(f);
    if (cells.size() != (with_runtime ? 5u : 4u))
      throw FormatError("sweep CSV: bad row '" + line + "'");
    SweepResult r;
    r.budget = std::stoull(cells[0]);
    r.seed = std::stoull(cells[1]);
    r.nmi_advis = std::strtod(cells[2].c_str(), nullptr);
    r.nmi_dvis = std::strtod(cells[3].c_str(), nullptr);
    if (with_runtime)
      r.runtime_seconds = std::strtod(cells[4].c_str(), nullptr);
    out.push_back(r);
  }
  return out;
}

void emit(const std::filesystem::path& path, const std::vector<SweepResult>& results,
          EmitFormat format, const EmitOptions& options) {
  write_file(path, format_results(results, format, options));
}

std::string format_summary_csv(const std::vector<BudgetSummary>& summary) {
  std::ostringstream out;
  out << "budget,runs,advis_mean,advis_std,dvis_mean,dvis_std\n";
  for (const auto& s : summary)
    out << s.budget << ',' << s.runs << ',' << fmt_double(s.advis_mean) << ',' << fmt_double(s.advis_std)
        << ',' << fmt_double(s.dvis_mean) << ',' << fmt_double(s.dvis_std) << "\n";
  return out.str();
}

std::vector<Rgb> default_palette(int classes) {
  std::vector<Rgb> palette;
  palette.push_back({0, 0, 0});
  for (int c = 0; c < classes; ++c) {
    // golden-angle hue steps, full saturation
    const double h = std::fmod(c * 137.508, 360.0) / 60.0;
    const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
    case 0: r = 1; g = x; break;
    case 1: r = x; g = 1; break;
    case 2: g = 1; b = x; break;
    case 3: g = x; b = 1; break;
    case 4: r = x; b = 1; break;
    default: r = 1; b = x; break;
    }
    palette.push_back({static_cast<std::uint8_t>(std::lround(r * 230 + 25)),
                       static_cast<std::uint8_t>(std::lround(g * 230 + 25)),
                       static_cast<std::uint8_t>(std::lround(b * 230 + 25))});
  }
  return palette;
}

std::vector<std::uint8_t> encode_indexed_bmp(const std::vector<std::int32_t>& raster, std::size_t rows,
                                             std::size_t cols, const std::vector<Rgb>& palette) {
  if (raster.size() != rows * cols)
    throw SizeMismatchError("raster size does not match dimensions");
  if (palette.empty() || palette.size() > 256)
    throw InvalidArgument("indexed BMP palette must have 1..256 entries");
  auto out = bmp_header(rows, cols, 8, static_cast<std::uint32_t>(palette.size()));
  for (const auto& c : palette) {
    out.push_back(c[2]);
    out.push_back(c[1]);
    out.push_back(c[0]);
    out.push_back(0);
  }
  const std::size_t pad = (4 - cols % 4) % 4;
  for (std::size_t r = rows; r-- > 0;) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = raster[r * cols + c];
      if (v < 0 || static_cast<std::size_t>(v) >= palette.size())
        throw InvalidArgument("raster value " + std::to_string(v) + " outside the palette");
      out.push_back(static_cast<std::uint8_t>(v));
    }
    out.insert(out.end(), pad, 0);
  }
  return out;
}

std::vector<std::uint8_t> encode_rgb_bmp(const std::vector<Rgb>& pixels, std::size_t rows, std::size_t cols) {
  if (pixels.size() != rows * cols)
    throw SizeMismatchError("pixel count does not match dimensions");
  auto out = bmp_header(rows, cols, 24, 0);
  const std::size_t pad = (4 - (cols * 3) % 4) % 4;
  for (std::size_t r = rows; r-- > 0;) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& p = pixels[r * cols + c];
      out.push_back(p[2]);
      out.push_back(p[1]);
      out.push_back(p[0]);
    }
    out.insert(out.end(), pad, 0);
  }
  return out;
}

void render_labels(const std::filesystem::path& path, const std::vector<std::int32_t>& raster,
                   std::size_t rows, std::size_t cols, const std::vector<Rgb>& palette) {
  const auto bytes = encode_indexed_bmp(raster, rows, cols, palette);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::array<std::size_t, 3> default_false_color_bands(std::size_t bands) {
  if (bands == 0)
    throw InvalidArgument("cube has no bands");
  return {bands * 3 / 4, bands / 2, bands / 4};
}

std::vector<Rgb> false_color(const HsiCube& cube, std::array<std::size_t, 3> bands) {
  const std::size_t px = cube.pixels();
  std::vector<Rgb> out(px, Rgb{0, 0, 0});
  if (px == 0)
    return out;
  for (std::size_t ch = 0; ch < 3; ++ch) {
    const std::size_t b = bands[ch];
    if (b >= cube.bands)
      throw InvalidArgument("false-color band " + std::to_string(b) + " out of range");
    std::vector<float> values(px);
    for (std::size_t p = 0; p < px; ++p)
      values[p] = cube.data[p * cube.bands + b];
    std::vector<float> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const float lo = sorted[static_cast<std::size_t>(0.02 * static_cast<double>(px - 1))];
    const float hi = sorted[static_cast<std::size_t>(0.98 * static_cast<double>(px - 1))];
    const float span = hi > lo ? hi - lo : 1.0f;
    for (std::size_t p = 0; p < px; ++p) {
      const float v = std::clamp((values[p] - lo) / span, 0.0f, 1.0f);
      out[p][ch] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
  }
  return out;
}

} // namespace advis
