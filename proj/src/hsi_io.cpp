#include "advis/hsi_io.hpp"

#include "advis/errors.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace advis {
namespace {

namespace fs = std::filesystem;

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t parse_count(const std::map<std::string, std::string>& kv, const std::string& key,
                        const fs::path& where) {
  auto it = kv.find(key);
  if (it == kv.end())
    throw FormatError(where.string() + ": missing header key '" + key + "'");
  std::size_t value = 0;
  try {
    std::size_t used = 0;
    long long v = std::stoll(it->second, &used);
    if (used != it->second.size() || v <= 0)
      throw std::invalid_argument(it->second);
    value = static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw FormatError(where.string() + ": header key '" + key + "' is not a positive integer: '" +
                      it->second + "'");
  }
  return value;
}

// key: value per line; '#' starts a comment.
std::map<std::string, std::string> read_flat_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw FormatError("missing header sidecar " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    line = trim(line);
    if (line.empty())
      continue;
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw FormatError(path.string() + ": malformed header line '" + line + "'");
    kv[lower(trim(line.substr(0, colon)))] = trim(line.substr(colon + 1));
  }
  return kv;
}

template <typename T> T load_le(const char* p, bool swap) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if (swap) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

template <typename T> void store_le(std::ostream& out, T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

constexpr bool host_is_little = std::endian::native == std::endian::little;

void check_finite(const std::vector<float>& data, const fs::path& where) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i]))
      throw NonFiniteError(i, where.string() + ": non-finite value at index " + std::to_string(i));
  }
}

HsiCube load_flat_cube(const fs::path& path) {
  auto kv = read_flat_header(flat_header_path(path));
  HsiCube cube;
  cube.rows = parse_count(kv, "rows", path);
  cube.cols = parse_count(kv, "cols", path);
  cube.bands = parse_count(kv, "bands", path);
  if (auto it = kv.find("dtype"); it != kv.end() && lower(it->second) != "float32")
    throw FormatError(path.string() + ": unsupported cube dtype '" + it->second + "'");

  auto bytes = read_bytes(path);
  const std::size_t count = cube.rows * cube.cols * cube.bands;
  if (bytes.size() != count * sizeof(float))
    throw SizeMismatchError(path.string() + ": payload has " + std::to_string(bytes.size()) +
                            " bytes, header implies " + std::to_string(count * sizeof(float)));

  // band-sequential on disk
  const std::size_t px = cube.pixels();
  cube.data.resize(count);
  for (std::size_t b = 0; b < cube.bands; ++b)
    for (std::size_t p = 0; p < px; ++p)
      cube.data[p * cube.bands + b] =
          load_le<float>(bytes.data() + (b * px + p) * sizeof(float), !host_is_little);
  check_finite(cube.data, path);
  return cube;
}

// ENVI headers: "key = value" lines, values may be brace-delimited across lines.
std::map<std::string, std::string> read_envi_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw FormatError("missing ENVI header " + path.string());
  std::string first;
  std::getline(in, first);
  if (trim(first) != "ENVI")
    throw FormatError(path.string() + ": not an ENVI header");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos)
      continue;
    std::string key = lower(trim(line.substr(0, eq)));
    std::string value = trim(line.substr(eq + 1));
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string::npos && std::getline(in, line))
        value += " " + trim(line);
    }
    kv[key] = value;
  }
  return kv;
}

fs::path envi_header_for(const fs::path& path) {
  if (path.extension() == ".hdr")
    return path;
  fs::path with = path;
  with += ".hdr";
  if (fs::exists(with))
    return with;
  fs::path replaced = path;
  replaced.replace_extension(".hdr");
  return replaced;
}

fs::path envi_payload_for(const fs::path& path) {
  if (path.extension() != ".hdr")
    return path;
  fs::path base = path;
  base.replace_extension();
  for (const char* ext : {"", ".img", ".bsq", ".bil", ".bip", ".raw", ".dat"}) {
    fs::path candidate = base;
    candidate += ext;
    if (fs::exists(candidate))
      return candidate;
  }
  throw FormatError("no ENVI payload found next to " + path.string());
}

HsiCube load_envi_cube(const fs::path& path) {
  const fs::path header = envi_header_for(path);
  const fs::path payload = envi_payload_for(path);
  auto kv = read_envi_header(header);

  HsiCube cube;
  cube.cols = parse_count(kv, "samples", header);
  cube.rows = parse_count(kv, "lines", header);
  cube.bands = parse_count(kv, "bands", header);
  const std::size_t dtype = parse_count(kv, "data type", header);
  std::size_t offset = 0;
  if (auto it = kv.find("header offset"); it != kv.end())
    offset = static_cast<std::size_t>(std::stoull(it->second));
  std::string interleave = "bsq";
  if (auto it = kv.find("interleave"); it != kv.end())
    interleave = lower(it->second);
  bool big = false;
  if (auto it = kv.find("byte order"); it != kv.end())
    big = trim(it->second) == "1";
  const bool swap = big == host_is_little;

  std::size_t width = 0;
  switch (dtype) {
  case 1: width = 1; break;
  case 2: case 12: width = 2; break;
  case 3: case 4: case 13: width = 4; break;
  case 5: width = 8; break;
  default: throw FormatError(header.string() + ": unsupported ENVI data type " + std::to_string(dtype));
  }

  auto bytes = read_bytes(payload);
  const std::size_t count = cube.rows * cube.cols * cube.bands;
  if (bytes.size() < offset || bytes.size() - offset != count * width)
    throw SizeMismatchError(payload.string() + ": payload size " + std::to_string(bytes.size()) +
                            " does not match header (" + std::to_string(offset + count * width) + ")");

  auto value_at = [&](std::size_t k) -> float {
    const char* p = bytes.data() + offset + k * width;
    switch (dtype) {
    case 1: return static_cast<float>(static_cast<unsigned char>(*p));
    case 2: return static_cast<float>(load_le<std::int16_t>(p, swap));
    case 12: return static_cast<float>(load_le<std::uint16_t>(p, swap));
    case 3: return static_cast<float>(load_le<std::int32_t>(p, swap));
    case 13: return static_cast<float>(load_le<std::uint32_t>(p, swap));
    case 4: return load_le<float>(p, swap);
    default: return static_cast<float>(load_le<double>(p, swap));
    }
  };

  const std::size_t R = cube.rows, C = cube.cols, B = cube.bands;
  cube.data.resize(count);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t b = 0; b < B; ++b) {
        std::size_t k;
        if (interleave == "bsq")
          k = (b * R + r) * C + c;
        else if (interleave == "bil")
          k = (r * B + b) * C + c;
        else if (interleave == "bip")
          k = (r * C + c) * B + b;
        else
          throw FormatError(header.string() + ": unknown interleave '" + interleave + "'");
        cube.data[(r * C + c) * B + b] = value_at(k);
      }
  check_finite(cube.data, payload);
  return cube;
}

} // namespace

CubeFormat parse_cube_format(const std::string& s) {
  if (s == "flat-binary" || s == "flat")
    return CubeFormat::flat_binary;
  if (s == "envi")
    return CubeFormat::envi;
  throw InvalidArgument("unknown cube format '" + s + "'");
}

Scope parse_scope(const std::string& s) {
  if (s == "labeled-only")
    return Scope::labeled_only;
  if (s == "all")
    return Scope::all;
  throw InvalidArgument("unknown scope '" + s + "'");
}

fs::path flat_header_path(const fs::path& payload) {
  fs::path p = payload;
  p += ".meta";
  return p;
}

HsiCube load_cube(const fs::path& path, CubeFormat format) {
  return format == CubeFormat::envi ? load_envi_cube(path) : load_flat_cube(path);
}

LabelMap load_labels(const fs::path& path) {
  auto kv = read_flat_header(flat_header_path(path));
  LabelMap map;
  map.rows = parse_count(kv, "rows", path);
  map.cols = parse_count(kv, "cols", path);
  if (auto it = kv.find("dtype"); it != kv.end() && lower(it->second) != "int32")
    throw FormatError(path.string() + ": unsupported label dtype '" + it->second + "'");

  auto bytes = read_bytes(path);
  const std::size_t count = map.rows * map.cols;
  if (bytes.size() != count * sizeof(std::int32_t))
    throw SizeMismatchError(path.string() + ": label payload has " + std::to_string(bytes.size()) +
                            " bytes, header implies " + std::to_string(count * sizeof(std::int32_t)));
  map.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    map.labels[i] = load_le<std::int32_t>(bytes.data() + i * sizeof(std::int32_t), !host_is_little);
    if (map.labels[i] < 0)
      throw FormatError(path.string() + ": negative label at index " + std::to_string(i));
    map.num_classes = std::max(map.num_classes, static_cast<int>(map.labels[i]));
  }
  if (auto it = kv.find("classes"); it != kv.end()) {
    const int declared = std::stoi(it->second);
    if (declared < map.num_classes)
      throw FormatError(path.string() + ": label exceeds declared class count");
    map.num_classes = declared;
  }
  return map;
}

void save_cube(const fs::path& path, const HsiCube& cube) {
  if (cube.data.size() != cube.rows * cube.cols * cube.bands)
    throw SizeMismatchError("cube data length does not match its dimensions");
  {
    std::ofstream hdr(flat_header_path(path));
    hdr << "rows: " << cube.rows << "\ncols: " << cube.cols << "\nbands: " << cube.bands
        << "\ndtype: float32\n";
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path.string());
  const std::size_t px = cube.pixels();
  for (std::size_t b = 0; b < cube.bands; ++b)
    for (std::size_t p = 0; p < px; ++p)
      store_le(out, cube.data[p * cube.bands + b]);
}

void save_labels(const fs::path& path, const LabelMap& labels) {
  if (labels.labels.size() != labels.rows * labels.cols)
    throw SizeMismatchError("label map length does not match its dimensions");
  {
    std::ofstream hdr(flat_header_path(path));
    hdr << "rows: " << labels.rows << "\ncols: " << labels.cols << "\nbands: 1\ndtype: int32\n";
    if (labels.num_classes > 0)
      hdr << "classes: " << labels.num_classes << "\n";
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path.string());
  for (auto v : labels.labels)
    store_le(out, v);
}

PointCloud flatten(const HsiCube& cube, const LabelMap* labels, Scope scope,
                   Normalization normalization) {
  if (labels && (labels->rows != cube.rows || labels->cols != cube.cols))
    throw SizeMismatchError("label map is " + std::to_string(labels->rows) + "x" +
                            std::to_string(labels->cols) + ", cube is " +
                            std::to_string(cube.rows) + "x" + std::to_string(cube.cols));
  if (scope == Scope::labeled_only && !labels)
    throw InvalidArgument("labeled-only scope requires a label map");

  double peak = 1.0;
  if (normalization == Normalization::global_max) {
    const float m = cube.data.empty() ? 0.0f : *std::max_element(cube.data.begin(), cube.data.end());
    if (!(m > 0.0f))
      throw InvalidArgument("global-max normalization undefined: cube maximum is " +
                            std::to_string(m));
    peak = static_cast<double>(m);
  }

  std::vector<std::size_t> kept;
  kept.reserve(cube.pixels());
  for (std::size_t p = 0; p < cube.pixels(); ++p)
    if (scope == Scope::all || labels->labels[p] != 0)
      kept.push_back(p);

  PointCloud cloud;
  cloud.points.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(cube.bands));
  cloud.pixel_index.reserve(kept.size());
  if (labels)
    cloud.gt.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const std::size_t p = kept[i];
    for (std::size_t b = 0; b < cube.bands; ++b)
      cloud.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) =
          static_cast<double>(cube.data[p * cube.bands + b]) / peak;
    cloud.pixel_index.push_back({p / cube.cols, p % cube.cols});
    if (labels)
      cloud.gt.push_back(labels->labels[p]);
  }
  return cloud;
}

std::vector<std::int32_t> to_raster(const PointCloud& cloud, const std::vector<int>& values,
                                    std::size_t rows, std::size_t cols, std::int32_t fill) {
  if (values.size() != cloud.size())
    throw SizeMismatchError("value vector length does not match point count");
  std::vector<std::int32_t> raster(rows * cols, fill);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& px = cloud.pixel_index[i];
    if (px.row >= rows || px.col >= cols)
      throw SizeMismatchError("pixel index outside raster");
    raster[px.row * cols + px.col] = values[i];
  }
  return raster;
}

} // namespace advis
