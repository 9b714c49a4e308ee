#pragma once

#include "advis/errors.hpp"
#include "advis/hsi_io.hpp"
#include "advis/pipeline.hpp"
#include "advis/report.hpp"
#include "advis/segmentation.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace advis {

/// The scene a service answers queries about.
struct Dataset {
  std::string name;
  HsiCube cube; // raw values, used for spectra and false-color context
  std::optional<LabelMap> labels;
  PointCloud cloud;
};

Dataset make_dataset(std::string name, HsiCube cube, std::optional<LabelMap> labels, Scope scope,
                     Normalization normalization = Normalization::global_max);

class UnknownSession : public Error {
public:
  using Error::Error;
};

/// Submission that does not answer the outstanding query.
class OutOfOrderSubmission : public Error {
public:
  using Error::Error;
};

enum class SessionState { preparing, awaiting_label, complete };
std::string to_string(SessionState s);

struct SessionSettings {
  PipelineConfig pipeline;
  std::size_t budget = 0;
};

struct LoggedLabel {
  std::size_t pixel = 0;
  int label = 0;
  std::int64_t timestamp_ms = 0;
};

struct QueryView {
  std::size_t pixel = 0;
  PixelCoord coord;
  std::size_t rank = 0; // 1-based position in the mode ranking
  std::vector<float> spectrum;
  std::size_t tile_size = 0;
  std::vector<Rgb> tile; // tile_size x tile_size false-color window centered on the pixel
};

struct SessionStatus {
  std::string id;
  SessionState state = SessionState::preparing;
  std::size_t budget = 0;
  std::size_t cursor = 0;
};

struct SegmentationView {
  SessionStatus status;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> labels;          // raster, 0 outside scope or not yet labeled
  std::vector<std::string> provenance;       // raster, "" outside scope
  std::map<std::string, std::size_t> counts; // provenance histogram over the point cloud
  std::optional<double> nmi;
};

/// ADVIS query loop with a human (or scripted) oracle. Each session is
/// lock-step: one outstanding query, answered in ranking order.
class OracleService {
public:
  /// `state_dir` holds one JSON manifest per session; empty disables persistence.
  explicit OracleService(std::shared_ptr<const Dataset> dataset, std::filesystem::path state_dir = {});
  ~OracleService();

  OracleService(const OracleService&) = delete;
  OracleService& operator=(const OracleService&) = delete;

  SessionStatus create_session(const SessionSettings& settings);
  SessionStatus status(const std::string& id) const;
  std::vector<SessionStatus> list() const;
  QueryView next_query(const std::string& id) const;
  SessionStatus submit_label(const std::string& id, std::size_t pixel, int label);
  SegmentationView segmentation(const std::string& id) const;
  /// Labels per point of the point cloud (complete sessions only).
  std::vector<int> point_labels(const std::string& id) const;
  std::vector<std::uint8_t> label_image(const std::string& id) const;
  std::vector<std::uint8_t> context_image() const;

  /// Reloads every manifest in the state directory and replays its query log.
  std::size_t restore();

  const Dataset& dataset() const { return *dataset_; }

private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<const Geometry> geometry_for(const PipelineConfig& config);
  std::shared_ptr<Session> start(std::string id, const SessionSettings& settings);
  void apply_label(Session& s, std::size_t pixel, int label, std::int64_t timestamp_ms);
  void persist(const Session& s) const;

  std::shared_ptr<const Dataset> dataset_;
  std::filesystem::path state_dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::shared_ptr<const Geometry>> geometries_;
};

nlohmann::json settings_to_json(const SessionSettings& settings);
SessionSettings settings_from_json(const nlohmann::json& j, const SessionSettings& defaults = {});
nlohmann::json to_json(const SessionStatus& s);
nlohmann::json to_json(const QueryView& q);
nlohmann::json to_json(const SegmentationView& v);

} // namespace advis
