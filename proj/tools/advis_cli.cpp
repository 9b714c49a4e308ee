#include "advis/errors.hpp"
#include "advis/hsi_io.hpp"
#include "advis/http_api.hpp"
#include "advis/metrics.hpp"
#include "advis/modes.hpp"
#include "advis/pipeline.hpp"
#include "advis/report.hpp"
#include "advis/service.hpp"
#include "advis/sweep.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

using namespace advis;
namespace fs = std::filesystem;

namespace {

struct DataArgs {
  std::string dataset;
  std::string labels;
  std::string format = "flat-binary";
  std::string scope = "labeled-only";
  bool no_normalize = false;
};

struct PipelineArgs {
  PipelineConfig config;
  std::size_t num_materials = 0;
  std::string symmetrization = "mutual-or";
  bool raw_purity = false;
  std::string cache_dir;

  PipelineConfig resolve() const {
    PipelineConfig c = config;
    if (num_materials > 0)
      c.num_materials = num_materials;
    c.symmetrization = parse_symmetrization(symmetrization);
    c.normalize_abundances = !raw_purity;
    c.cache_dir = cache_dir;
    return c;
  }
};

void add_data_options(CLI::App* app, DataArgs& a, bool labels_required) {
  app->add_option("--dataset", a.dataset, "Cube payload (flat-binary) or ENVI header")->required();
  auto* l = app->add_option("--labels", a.labels, "Ground-truth label map (int32 flat-binary)");
  if (labels_required)
    l->required();
  app->add_option("--format", a.format, "flat-binary | envi")->capture_default_str();
  app->add_option("--scope", a.scope, "labeled-only | all")->capture_default_str();
  app->add_flag("--no-normalize", a.no_normalize, "Skip global-max normalization");
}

void add_pipeline_options(CLI::App* app, PipelineArgs& a) {
  auto& c = a.config;
  app->add_option("--neighbors,-N", c.neighbors, "kNN graph size")->capture_default_str();
  app->add_option("--classes,-K", c.classes, "Number of classes")->capture_default_str();
  app->add_option("--sigma0", c.sigma0, "Density kernel scale")->capture_default_str();
  app->add_option("--time,-t", c.time, "Diffusion time")->capture_default_str();
  app->add_option("--purity-runs", c.purity_runs, "VCA+NNLS repetitions averaged for purity")->capture_default_str();
  app->add_option("--num-materials", a.num_materials, "Endmember count (0 = estimate with HySime)");
  app->add_option("--seed", c.seed, "Base seed for VCA")->capture_default_str();
  app->add_option("--max-eigenpairs", c.max_eigenpairs, "Eigenpair cap")->capture_default_str();
  app->add_option("--symmetrization", a.symmetrization, "mutual-or | directed")->capture_default_str();
  app->add_flag("--no-normalize-abundances", a.raw_purity, "Purity from raw (not sum-to-one) abundances");
  app->add_option("--cache-dir", a.cache_dir, "Directory for cached diffusion operators");
}

struct Loaded {
  HsiCube cube;
  std::optional<LabelMap> labels;
  PointCloud cloud;
};

Loaded load(const DataArgs& a) {
  Loaded d;
  d.cube = load_cube(a.dataset, parse_cube_format(a.format));
  if (!a.labels.empty())
    d.labels = load_labels(a.labels);
  const Scope scope = parse_scope(a.scope);
  d.cloud = flatten(d.cube, d.labels ? &*d.labels : nullptr, scope,
                    a.no_normalize ? Normalization::none : Normalization::global_max);
  return d;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path.string());
  out << text;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  // "10" means seeds 0..9; anything with separators is an explicit list/range
  if (spec.find_first_of(",.") == std::string::npos) {
    std::vector<std::uint64_t> out(std::stoull(spec));
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = i;
    return out;
  }
  std::vector<std::uint64_t> out;
  for (auto v : parse_budgets(spec))
    out.push_back(v);
  return out;
}

EmitFormat format_for(const fs::path& path) {
  return path.extension() == ".json" ? EmitFormat::json : EmitFormat::csv;
}

int cmd_segment(const DataArgs& data, const PipelineArgs& pargs, std::size_t budget, bool unsupervised,
                const std::string& out_dir, const std::string& normalizer) {
  const auto d = load(data);
  const auto config = pargs.resolve();
  const auto geometry = prepare_geometry(d.cloud.points, config);
  const auto ranked = rank_pixels(d.cloud.points, geometry, config);
  Segmentation seg;
  if (unsupervised) {
    seg = dvis(geometry, ranked, config.classes);
  } else {
    if (!d.cloud.has_gt())
      throw InvalidArgument("ADVIS needs --labels as its oracle (or use --unsupervised)");
    GroundTruthOracle oracle(d.cloud.gt);
    seg = advis::advis(geometry, ranked, config.classes, budget, oracle);
  }

  const fs::path out = out_dir;
  fs::create_directories(out);
  const auto raster = to_raster(d.cloud, seg.labels, d.cube.rows, d.cube.cols);
  save_labels(out / "labels.bin", LabelMap{d.cube.rows, d.cube.cols, raster, config.classes});
  render_labels(out / "labels.bmp", raster, d.cube.rows, d.cube.cols, default_palette(config.classes));

  nlohmann::json summary;
  summary["points"] = d.cloud.size();
  summary["materials"] = ranked.materials;
  summary["mode"] = unsupervised ? "dvis" : "advis";
  summary["budget"] = unsupervised ? 0 : budget;
  summary["settings"] = settings_to_json({config, budget});
  summary["queries"] = nlohmann::json::array();
  for (const auto& q : seg.queries)
    summary["queries"].push_back({{"pixel", q.pixel},
                                  {"row", d.cloud.pixel_index[q.pixel].row},
                                  {"col", d.cloud.pixel_index[q.pixel].col},
                                  {"class", q.label}});
  std::map<std::string, std::size_t> counts;
  for (auto p : seg.provenance)
    ++counts[to_string(p)];
  summary["provenance"] = counts;
  if (d.cloud.has_gt()) {
    summary["nmi"] = score_labeled(seg.labels, d.cloud.gt, parse_nmi_normalizer(normalizer));
    std::printf("NMI %.6f\n", summary["nmi"].get<double>());
  }
  write_text(out / "summary.json", summary.dump(2) + "\n");
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

int cmd_sweep(const DataArgs& data, const PipelineArgs& pargs, const std::string& budgets,
              const std::string& seeds, const std::string& out, const std::string& summary_out,
              bool runtime, const std::string& normalizer) {
  const auto d = load(data);
  SweepOptions options;
  options.normalizer = parse_nmi_normalizer(normalizer);
  const auto results = budget_sweep(d.cloud, parse_budgets(budgets), pargs.resolve(), parse_seeds(seeds), options);
  EmitOptions emit_options;
  emit_options.include_runtime = runtime;
  if (out.empty() || out == "-")
    std::cout << format_results(results, EmitFormat::csv, emit_options);
  else
    emit(out, results, format_for(out), emit_options);
  if (!summary_out.empty())
    write_text(summary_out, format_summary_csv(summarize(results)));
  return 0;
}

int cmd_score(const std::string& predicted, const std::string& truth, const std::string& normalizer) {
  const auto p = load_labels(predicted);
  const auto t = load_labels(truth);
  if (p.rows != t.rows || p.cols != t.cols)
    throw SizeMismatchError("prediction and ground truth rasters differ in size");
  const std::vector<int> a(p.labels.begin(), p.labels.end()), b(t.labels.begin(), t.labels.end());
  std::printf("%.17g\n", score_labeled(a, b, parse_nmi_normalizer(normalizer)));
  return 0;
}

int cmd_diagnostics(const DataArgs& data, const PipelineArgs& pargs, const std::string& out) {
  const auto d = load(data);
  const auto config = pargs.resolve();
  const auto geometry = prepare_geometry(d.cloud.points, config);
  const auto ranked = rank_pixels(d.cloud.points, geometry, config);
  write_diagnostics(out, d.cloud, geometry.density, ranked.purity, ranked.ranking);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_serve(const DataArgs& data, const std::string& host, int port, const std::string& state_dir) {
  auto cube = load_cube(data.dataset, parse_cube_format(data.format));
  std::optional<LabelMap> labels;
  if (!data.labels.empty())
    labels = load_labels(data.labels);
  auto dataset = std::make_shared<const Dataset>(
      make_dataset(fs::path(data.dataset).stem().string(), std::move(cube), std::move(labels),
                   parse_scope(data.scope), data.no_normalize ? Normalization::none : Normalization::global_max));
  OracleService service(dataset, state_dir);
  if (const auto n = service.restore())
    std::printf("restored %zu sessions\n", n);
  httplib::Server server;
  mount_routes(server, service);
  std::printf("listening on http://%s:%d\n", host.c_str(), port);
  std::fflush(stdout);
  if (!server.listen(host, port))
    throw Error("cannot listen on " + host + ":" + std::to_string(port));
  return 0;
}

// Gaussian blobs laid out as a one-row-per-class scene, for trying the tools
// without a real dataset.
int cmd_synth(const std::string& out_dir, int classes, std::size_t per_class, std::size_t bands,
              double spread, double separation, std::uint64_t seed) {
  if (classes < 1 || per_class < 1 || bands < static_cast<std::size_t>(classes))
    throw InvalidArgument("synth: need classes >= 1, per-class >= 1 and bands >= classes");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, spread);
  HsiCube cube{static_cast<std::size_t>(classes), per_class, bands, {}};
  LabelMap gt{cube.rows, cube.cols, {}, classes};
  for (int k = 0; k < classes; ++k)
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t b = 0; b < bands; ++b) {
        double center = 0.5 + (b == static_cast<std::size_t>(k) ? separation / std::sqrt(2.0) : 0.0);
        cube.data.push_back(static_cast<float>(center + g(rng)));
      }
      gt.labels.push_back(k + 1);
    }
  const fs::path out = out_dir;
  fs::create_directories(out);
  save_cube(out / "cube.bin", cube);
  save_labels(out / "gt.bin", gt);
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active diffusion and VCA-assisted image segmentation"};
  app.require_subcommand(1);

  DataArgs data;
  PipelineArgs pipeline;
  std::string normalizer = "arithmetic";

  auto* segment = app.add_subcommand("segment", "Segment a cube with ADVIS (or D-VIS)");
  std::size_t budget = 0;
  bool unsupervised = false;
  std::string out_dir = "advis-out";
  add_data_options(segment, data, false);
  add_pipeline_options(segment, pipeline);
  segment->add_option("--budget,-B", budget, "Oracle queries (ground truth answers)")->capture_default_str();
  segment->add_flag("--unsupervised", unsupervised, "Run D-VIS; no oracle");
  segment->add_option("--out", out_dir, "Output directory")->capture_default_str();
  segment->add_option("--nmi-normalizer", normalizer, "arithmetic | geometric | max")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "NMI over a grid of budgets and seeds");
  std::string budgets = "10..100..10", seeds = "10", sweep_out, summary_out;
  bool no_runtime = false;
  add_data_options(sweep, data, true);
  add_pipeline_options(sweep, pipeline);
  sweep->add_option("--budgets", budgets, "a..b..step or comma list")->capture_default_str();
  sweep->add_option("--seeds", seeds, "Seed count, or explicit list/range")->capture_default_str();
  sweep->add_option("--out", sweep_out, "Results file (.csv or .json); stdout if omitted");
  sweep->add_option("--summary", summary_out, "Per-budget mean/std CSV");
  sweep->add_flag("--no-runtime", no_runtime, "Omit wall-clock runtimes (byte-stable output)");
  sweep->add_option("--nmi-normalizer", normalizer, "arithmetic | geometric | max")->capture_default_str();

  auto* score = app.add_subcommand("score", "NMI of a predicted label map against ground truth");
  std::string predicted, truth;
  score->add_option("--predicted", predicted, "Predicted label map")->required();
  score->add_option("--labels", truth, "Ground-truth label map")->required();
  score->add_option("--nmi-normalizer", normalizer, "arithmetic | geometric | max")->capture_default_str();

  auto* diag = app.add_subcommand("dump-diagnostics", "Per-pixel density, purity, zeta, dt and rank as CSV");
  std::string diag_out = "diagnostics.csv";
  add_data_options(diag, data, false);
  add_pipeline_options(diag, pipeline);
  diag->add_option("--out", diag_out, "CSV path")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "HTTP oracle service for interactive labeling");
  std::string host = "127.0.0.1", state_dir = "advis-sessions";
  int port = 8080;
  add_data_options(serve, data, false);
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--state-dir", state_dir, "Session manifests")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian-blob scene");
  std::string synth_out = "blobs";
  int synth_classes = 3;
  std::size_t per_class = 200, bands = 10;
  double spread = 0.05, separation = 0.4;
  std::uint64_t synth_seed = 0;
  synth->add_option("--out", synth_out, "Output directory")->capture_default_str();
  synth->add_option("--classes", synth_classes)->capture_default_str();
  synth->add_option("--per-class", per_class)->capture_default_str();
  synth->add_option("--bands", bands)->capture_default_str();
  synth->add_option("--spread", spread, "Per-band standard deviation")->capture_default_str();
  synth->add_option("--separation", separation, "Distance between blob centers")->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*segment)
      return cmd_segment(data, pipeline, budget, unsupervised, out_dir, normalizer);
    if (*sweep)
      return cmd_sweep(data, pipeline, budgets, seeds, sweep_out, summary_out, !no_runtime, normalizer);
    if (*score)
      return cmd_score(predicted, truth, normalizer);
    if (*diag)
      return cmd_diagnostics(data, pipeline, diag_out);
    if (*serve)
      return cmd_serve(data, host, port, state_dir);
    if (*synth)
      return cmd_synth(synth_out, synth_classes, per_class, bands, spread, separation, synth_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
