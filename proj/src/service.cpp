#include "advis/service.hpp"

#include "advis/errors.hpp"
#include "advis/sweep.hpp"

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

namespace advis {

namespace fs = std::filesystem;

struct OracleService::Session {
  std::string id;
  SessionSettings settings;
  std::size_t effective_budget = 0;
  SessionState state = SessionState::preparing;
  std::shared_ptr<const Geometry> geometry;
  Ranked ranked;
  std::vector<LoggedLabel> log;
  std::optional<Segmentation> result;
  mutable std::mutex mutex;
};

namespace {

constexpr std::size_t kTileSize = 15;

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string new_session_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  std::ostringstream out;
  out << std::hex << rng();
  return out.str();
}

std::string geometry_key(const PipelineConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << c.neighbors << '|' << c.time << '|' << c.sigma0 << '|' << to_string(c.symmetrization) << '|'
      << c.max_eigenpairs;
  return out.str();
}

Segmentation partial_from_log(std::size_t n, int classes, const std::vector<LoggedLabel>& log) {
  Segmentation seg;
  seg.classes = classes;
  seg.labels.assign(n, 0);
  seg.provenance.assign(n, Provenance::unlabeled);
  seg.source.assign(n, -1);
  for (const auto& entry : log) {
    seg.labels[entry.pixel] = entry.label;
    seg.provenance[entry.pixel] = Provenance::queried;
    seg.queries.push_back({entry.pixel, entry.label});
  }
  return seg;
}

} // namespace

Dataset make_dataset(std::string name, HsiCube cube, std::optional<LabelMap> labels, Scope scope,
                     Normalization normalization) {
  Dataset d;
  d.name = std::move(name);
  d.cloud = flatten(cube, labels ? &*labels : nullptr, scope, normalization);
  d.cube = std::move(cube);
  d.labels = std::move(labels);
  return d;
}

std::string to_string(SessionState s) {
  switch (s) {
  case SessionState::preparing: return "preparing";
  case SessionState::awaiting_label: return "awaiting-label";
  case SessionState::complete: return "complete";
  }
  return "unknown";
}

OracleService::OracleService(std::shared_ptr<const Dataset> dataset, fs::path state_dir)
    : dataset_(std::move(dataset)), state_dir_(std::move(state_dir)) {
  if (!dataset_)
    throw InvalidArgument("oracle service needs a dataset");
  if (!state_dir_.empty())
    fs::create_directories(state_dir_);
}

OracleService::~OracleService() = default;

std::shared_ptr<OracleService::Session> OracleService::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end())
    throw UnknownSession("unknown session '" + id + "'");
  return it->second;
}

std::shared_ptr<const Geometry> OracleService::geometry_for(const PipelineConfig& config) {
  const auto key = geometry_key(config);
  {
    std::lock_guard lock(mutex_);
    if (auto it = geometries_.find(key); it != geometries_.end())
      return it->second;
  }
  auto g = std::make_shared<const Geometry>(prepare_geometry(dataset_->cloud.points, config));
  std::lock_guard lock(mutex_);
  return geometries_.emplace(key, g).first->second;
}

std::shared_ptr<OracleService::Session> OracleService::start(std::string id, const SessionSettings& settings) {
  const auto& cloud = dataset_->cloud;
  if (settings.pipeline.classes < 1)
    throw InvalidArgument("classes must be >= 1");
  auto s = std::make_shared<Session>();
  s->id = std::move(id);
  s->settings = settings;
  s->effective_budget = std::min(settings.budget, cloud.size());
  s->geometry = geometry_for(settings.pipeline);
  s->ranked = rank_pixels(cloud.points, *s->geometry, settings.pipeline);
  s->state = SessionState::awaiting_label;
  if (s->effective_budget == 0) {
    TableOracle none({});
    s->result = advis(*s->geometry, s->ranked, settings.pipeline.classes, 0, none);
    s->state = SessionState::complete;
  }
  return s;
}

SessionStatus OracleService::create_session(const SessionSettings& settings) {
  auto s = start(new_session_id(), settings);
  {
    std::lock_guard lock(mutex_);
    sessions_[s->id] = s;
  }
  std::lock_guard lock(s->mutex);
  persist(*s);
  return {s->id, s->state, s->settings.budget, s->log.size()};
}

SessionStatus OracleService::status(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  return {s->id, s->state, s->settings.budget, s->log.size()};
}

std::vector<SessionStatus> OracleService::list() const {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [_, s] : sessions_)
      all.push_back(s);
  }
  std::vector<SessionStatus> out;
  for (const auto& s : all) {
    std::lock_guard lock(s->mutex);
    out.push_back({s->id, s->state, s->settings.budget, s->log.size()});
  }
  return out;
}

QueryView OracleService::next_query(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (s->state != SessionState::awaiting_label)
    throw OutOfOrderSubmission("session '" + id + "' has no outstanding query (state " +
                               to_string(s->state) + ")");
  const auto& cloud = dataset_->cloud;
  const auto& cube = dataset_->cube;
  QueryView q;
  q.rank = s->log.size() + 1;
  q.pixel = s->ranked.ranking.ordering[s->log.size()];
  q.coord = cloud.pixel_index[q.pixel];
  const std::size_t flat = q.coord.row * cube.cols + q.coord.col;
  q.spectrum.assign(cube.data.begin() + static_cast<std::ptrdiff_t>(flat * cube.bands),
                    cube.data.begin() + static_cast<std::ptrdiff_t>((flat + 1) * cube.bands));

  const auto composite = false_color(cube, default_false_color_bands(cube.bands));
  q.tile_size = kTileSize;
  q.tile.assign(kTileSize * kTileSize, Rgb{0, 0, 0});
  const auto half = static_cast<std::ptrdiff_t>(kTileSize / 2);
  for (std::ptrdiff_t dr = -half; dr <= half; ++dr)
    for (std::ptrdiff_t dc = -half; dc <= half; ++dc) {
      const auto r = static_cast<std::ptrdiff_t>(q.coord.row) + dr;
      const auto c = static_cast<std::ptrdiff_t>(q.coord.col) + dc;
      if (r < 0 || c < 0 || r >= static_cast<std::ptrdiff_t>(cube.rows) ||
          c >= static_cast<std::ptrdiff_t>(cube.cols))
        continue;
      q.tile[static_cast<std::size_t>((dr + half) * static_cast<std::ptrdiff_t>(kTileSize) + dc + half)] =
          composite[static_cast<std::size_t>(r) * cube.cols + static_cast<std::size_t>(c)];
    }
  return q;
}

void OracleService::apply_label(Session& s, std::size_t pixel, int label, std::int64_t timestamp_ms) {
  if (s.state != SessionState::awaiting_label)
    throw OutOfOrderSubmission("session '" + s.id + "' is not awaiting a label");
  const std::size_t expected = s.ranked.ranking.ordering[s.log.size()];
  if (pixel != expected)
    throw OutOfOrderSubmission("pixel " + std::to_string(pixel) + " is not the outstanding query (" +
                               std::to_string(expected) + ")");
  const int classes = s.settings.pipeline.classes;
  if (label < 1 || label > classes)
    throw InvalidArgument("class " + std::to_string(label) + " outside 1.." + std::to_string(classes));

  s.log.push_back({pixel, label, timestamp_ms});
  if (s.log.size() == s.effective_budget) {
    std::map<std::size_t, int> answers;
    for (const auto& e : s.log)
      answers[e.pixel] = e.label;
    TableOracle replay(std::move(answers));
    s.result = advis(*s.geometry, s.ranked, classes, s.effective_budget, replay);
    s.state = SessionState::complete;
  }
}

SessionStatus OracleService::submit_label(const std::string& id, std::size_t pixel, int label) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (!s->log.empty() && s->log.back().pixel == pixel && s->log.back().label == label)
    return {s->id, s->state, s->settings.budget, s->log.size()};
  apply_label(*s, pixel, label, now_ms());
  persist(*s);
  return {s->id, s->state, s->settings.budget, s->log.size()};
}

std::vector<int> OracleService::point_labels(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (!s->result)
    throw OutOfOrderSubmission("session '" + id + "' is not complete");
  return s->result->labels;
}

SegmentationView OracleService::segmentation(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  const auto& cloud = dataset_->cloud;
  const auto& cube = dataset_->cube;
  const Segmentation seg = s->result ? *s->result
                                     : partial_from_log(cloud.size(), s->settings.pipeline.classes, s->log);
  SegmentationView v;
  v.status = {s->id, s->state, s->settings.budget, s->log.size()};
  v.rows = cube.rows;
  v.cols = cube.cols;
  v.labels = to_raster(cloud, seg.labels, cube.rows, cube.cols, 0);
  v.provenance.assign(cube.rows * cube.cols, "");
  for (std::size_t i = 0; i < seg.size(); ++i) {
    const auto& px = cloud.pixel_index[i];
    const auto name = to_string(seg.provenance[i]);
    v.provenance[px.row * cube.cols + px.col] = name;
    ++v.counts[name];
  }
  if (s->result && cloud.has_gt())
    v.nmi = score_labeled(seg.labels, cloud.gt);
  return v;
}

std::vector<std::uint8_t> OracleService::label_image(const std::string& id) const {
  const auto v = segmentation(id);
  int classes = 0;
  {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    classes = s->settings.pipeline.classes;
  }
  return encode_indexed_bmp(v.labels, v.rows, v.cols, default_palette(classes));
}

std::vector<std::uint8_t> OracleService::context_image() const {
  const auto& cube = dataset_->cube;
  return encode_rgb_bmp(false_color(cube, default_false_color_bands(cube.bands)), cube.rows, cube.cols);
}

void OracleService::persist(const Session& s) const {
  if (state_dir_.empty())
    return;
  nlohmann::json manifest;
  manifest["id"] = s.id;
  manifest["dataset"] = dataset_->name;
  manifest["settings"] = settings_to_json(s.settings);
  manifest["state"] = to_string(s.state);
  manifest["query_log"] = nlohmann::json::array();
  for (const auto& e : s.log)
    manifest["query_log"].push_back({{"pixel", e.pixel}, {"class", e.label}, {"timestamp_ms", e.timestamp_ms}});
  const auto path = state_dir_ / (s.id + ".json");
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out)
      throw Error("cannot write session manifest " + tmp.string());
    out << manifest.dump(2) << "\n";
  }
  fs::rename(tmp, path);
}

std::size_t OracleService::restore() {
  if (state_dir_.empty() || !fs::exists(state_dir_))
    return 0;
  std::vector<fs::path> manifests;
  for (const auto& entry : fs::directory_iterator(state_dir_))
    if (entry.path().extension() == ".json")
      manifests.push_back(entry.path());
  std::sort(manifests.begin(), manifests.end());

  std::size_t restored = 0;
  for (const auto& path : manifests) {
    std::ifstream in(path);
    const auto manifest = nlohmann::json::parse(in);
    const auto id = manifest.at("id").get<std::string>();
    {
      std::lock_guard lock(mutex_);
      if (sessions_.count(id))
        continue;
    }
    if (manifest.value("dataset", dataset_->name) != dataset_->name)
      throw FormatError(path.string() + ": manifest belongs to dataset '" +
                        manifest.value("dataset", std::string{}) + "'");
    auto s = start(id, settings_from_json(manifest.at("settings")));
    for (const auto& e : manifest.at("query_log"))
      apply_label(*s, e.at("pixel").get<std::size_t>(), e.at("class").get<int>(),
                  e.value("timestamp_ms", std::int64_t{0}));
    std::lock_guard lock(mutex_);
    sessions_[id] = s;
    ++restored;
  }
  return restored;
}

nlohmann::json settings_to_json(const SessionSettings& settings) {
  const auto& p = settings.pipeline;
  nlohmann::json j = {{"neighbors", p.neighbors},
                      {"classes", p.classes},
                      {"sigma0", p.sigma0},
                      {"time", p.time},
                      {"budget", settings.budget},
                      {"seed", p.seed},
                      {"purity_runs", p.purity_runs},
                      {"symmetrization", to_string(p.symmetrization)},
                      {"max_eigenpairs", p.max_eigenpairs},
                      {"normalize_abundances", p.normalize_abundances}};
  j["num_materials"] = p.num_materials ? nlohmann::json(*p.num_materials) : nlohmann::json(nullptr);
  return j;
}

SessionSettings settings_from_json(const nlohmann::json& j, const SessionSettings& defaults) {
  if (!j.is_object())
    throw InvalidArgument("session settings must be a JSON object");
  SessionSettings s = defaults;
  auto& p = s.pipeline;
  p.neighbors = j.value("neighbors", p.neighbors);
  p.classes = j.value("classes", p.classes);
  p.sigma0 = j.value("sigma0", p.sigma0);
  p.time = j.value("time", p.time);
  s.budget = j.value("budget", s.budget);
  p.seed = j.value("seed", p.seed);
  p.purity_runs = j.value("purity_runs", p.purity_runs);
  p.max_eigenpairs = j.value("max_eigenpairs", p.max_eigenpairs);
  p.normalize_abundances = j.value("normalize_abundances", p.normalize_abundances);
  if (j.contains("symmetrization"))
    p.symmetrization = parse_symmetrization(j.at("symmetrization").get<std::string>());
  if (j.contains("num_materials"))
    p.num_materials = j.at("num_materials").is_null()
                          ? std::nullopt
                          : std::optional<std::size_t>(j.at("num_materials").get<std::size_t>());
  return s;
}

nlohmann::json to_json(const SessionStatus& s) {
  return {{"id", s.id}, {"state", to_string(s.state)}, {"budget", s.budget}, {"cursor", s.cursor}};
}

nlohmann::json to_json(const QueryView& q) {
  nlohmann::json tile = nlohmann::json::array();
  for (const auto& px : q.tile)
    tile.push_back({px[0], px[1], px[2]});
  return {{"pixel", q.pixel},
          {"row", q.coord.row},
          {"col", q.coord.col},
          {"rank", q.rank},
          {"spectrum", q.spectrum},
          {"context", {{"size", q.tile_size}, {"rgb", tile}}}};
}

nlohmann::json to_json(const SegmentationView& v) {
  nlohmann::json j = to_json(v.status);
  j["rows"] = v.rows;
  j["cols"] = v.cols;
  j["labels"] = v.labels;
  j["provenance"] = v.provenance;
  j["counts"] = v.counts;
  j["nmi"] = v.nmi ? nlohmann::json(*v.nmi) : nlohmann::json(nullptr);
  return j;
}

} // namespace advis
