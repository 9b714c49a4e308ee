#include "advis/http_api.hpp"
#include "advis/service.hpp"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"

#include <doctest.h>
#include <httplib.h>

#include <thread>

using namespace advis;
namespace t_ = advis::testing;

namespace {

// 60 blob pixels laid out as a 6 x 10 scene with ground truth
std::shared_ptr<const Dataset> blob_dataset() {
  auto b = t_::make_blobs(3, 20, 5, 0.05, 0.4, 4);
  HsiCube cube{6, 10, 5, {}};
  LabelMap gt{6, 10, {}, 3};
  for (Eigen::Index i = 0; i < b.points.rows(); ++i) {
    for (Eigen::Index d = 0; d < 5; ++d)
      cube.data.push_back(static_cast<float>(b.points(i, d)));
    gt.labels.push_back(b.labels[static_cast<std::size_t>(i)]);
  }
  return std::make_shared<const Dataset>(make_dataset("blobs", std::move(cube), std::move(gt), Scope::all));
}

SessionSettings small_settings(std::size_t budget) {
  SessionSettings s;
  s.budget = budget;
  s.pipeline.neighbors = 25;
  s.pipeline.classes = 3;
  s.pipeline.sigma0 = 0.1;
  s.pipeline.time = 4;
  s.pipeline.purity_runs = 3;
  s.pipeline.seed = 7;
  return s;
}

// answers every query from ground truth, returns the answers given
std::map<std::size_t, int> drive(OracleService& svc, const std::string& id) {
  std::map<std::size_t, int> answers;
  while (svc.status(id).state == SessionState::awaiting_label) {
    auto q = svc.next_query(id);
    const int c = svc.dataset().cloud.gt[q.pixel];
    answers[q.pixel] = c;
    svc.submit_label(id, q.pixel, c);
  }
  return answers;
}

} // namespace

TEST_CASE("service result equals the headless pipeline with replayed answers") {
  auto ds = blob_dataset();
  OracleService svc(ds);
  auto st = svc.create_session(small_settings(4));
  CHECK(st.state == SessionState::awaiting_label);
  auto q = svc.next_query(st.id);
  CHECK(q.rank == 1);
  CHECK(q.spectrum.size() == 5);
  CHECK(q.tile.size() == q.tile_size * q.tile_size);
  auto answers = drive(svc, st.id);
  CHECK(answers.size() == 4);
  CHECK(svc.status(st.id).state == SessionState::complete);

  TableOracle replay(answers);
  auto headless = run_advis(ds->cloud.points, small_settings(4).pipeline, 4, replay);
  CHECK(svc.point_labels(st.id) == headless.labels);
  auto view = svc.segmentation(st.id);
  REQUIRE(view.nmi.has_value());
  CHECK(view.counts["queried"] == 4);
  CHECK(view.labels.size() == 60);
  CHECK(svc.label_image(st.id) ==
        encode_indexed_bmp(to_raster(ds->cloud, headless.labels, 6, 10), 6, 10, default_palette(3)));
}

TEST_CASE("zero-budget session is complete and equals D-VIS") {
  auto ds = blob_dataset();
  OracleService svc(ds);
  auto st = svc.create_session(small_settings(0));
  CHECK(st.state == SessionState::complete);
  CHECK(svc.point_labels(st.id) == run_dvis(ds->cloud.points, small_settings(0).pipeline).labels);
}

TEST_CASE("lock-step rules") {
  OracleService svc(blob_dataset());
  auto id = svc.create_session(small_settings(2)).id;
  auto q = svc.next_query(id);
  const std::size_t wrong = q.pixel == 0 ? 1 : 0;
  CHECK_THROWS_AS(svc.submit_label(id, wrong, 1), OutOfOrderSubmission);
  CHECK_THROWS_AS(svc.submit_label(id, q.pixel, 4), InvalidArgument);
  svc.submit_label(id, q.pixel, 2);
  // repeating the last submission is a no-op
  CHECK(svc.submit_label(id, q.pixel, 2).cursor == 1);
  CHECK_THROWS_AS(svc.status("ffff"), UnknownSession);
  CHECK_THROWS_AS(svc.point_labels(id), OutOfOrderSubmission);

  auto zero = svc.create_session(small_settings(0));
  CHECK(zero.state == SessionState::complete);
  CHECK_THROWS_AS(svc.next_query(zero.id), OutOfOrderSubmission);
  CHECK(svc.list().size() == 2);
}

TEST_CASE("sessions survive a restart") {
  t_::TempDir dir;
  auto ds = blob_dataset();
  std::string id;
  std::vector<int> before;
  std::size_t first_pixel = 0;
  {
    OracleService svc(ds, dir.path());
    id = svc.create_session(small_settings(3)).id;
    first_pixel = svc.next_query(id).pixel;
    svc.submit_label(id, first_pixel, ds->cloud.gt[first_pixel]);
  }
  OracleService again(ds, dir.path());
  CHECK(again.restore() == 1);
  CHECK(again.status(id).cursor == 1);
  CHECK(again.next_query(id).rank == 2);
  drive(again, id);
  CHECK(again.status(id).state == SessionState::complete);
  CHECK(again.restore() == 0);
}

TEST_CASE("settings JSON round trip") {
  auto s = small_settings(9);
  s.pipeline.num_materials = 4;
  s.pipeline.symmetrization = Symmetrization::directed;
  auto back = settings_from_json(settings_to_json(s));
  CHECK(back.budget == 9);
  CHECK(back.pipeline.num_materials == std::optional<std::size_t>(4));
  CHECK(back.pipeline.symmetrization == Symmetrization::directed);
  CHECK(back.pipeline.sigma0 == s.pipeline.sigma0);
  CHECK_THROWS_AS(settings_from_json(nlohmann::json::array()), InvalidArgument);
}

TEST_CASE("HTTP API") {
  auto ds = blob_dataset();
  OracleService svc(ds);
  httplib::Server server;
  mount_routes(server, svc);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);

  auto settings = settings_to_json(small_settings(3)).dump();
  auto created = cli.Post("/sessions", settings, "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  CHECK(created->get_header_value("Access-Control-Allow-Origin") == "*");
  const auto id = nlohmann::json::parse(created->body).at("id").get<std::string>();

  auto q = cli.Get("/sessions/" + id + "/query");
  REQUIRE(q);
  CHECK(q->status == 200);
  const auto query = nlohmann::json::parse(q->body);
  const auto pixel = query.at("pixel").get<std::size_t>();
  CHECK(query.at("spectrum").size() == 5);

  auto bad = cli.Post("/sessions/" + id + "/label", R"({"pixel": 0})", "application/json");
  CHECK(bad->status == 400);
  auto junk = cli.Post("/sessions/" + id + "/label", "{nope", "application/json");
  CHECK(junk->status == 400);
  const std::size_t other = pixel == 0 ? 1 : 0;
  auto ooo = cli.Post("/sessions/" + id + "/label",
                      nlohmann::json{{"pixel", other}, {"class", 1}}.dump(), "application/json");
  CHECK(ooo->status == 409);
  CHECK(cli.Get("/sessions/abc123")->status == 404);

  std::map<std::size_t, int> answers;
  for (int k = 0; k < 3; ++k) {
    auto qq = nlohmann::json::parse(cli.Get("/sessions/" + id + "/query")->body);
    const auto p = qq.at("pixel").get<std::size_t>();
    answers[p] = ds->cloud.gt[p];
    auto r = cli.Post("/sessions/" + id + "/label", nlohmann::json{{"pixel", p}, {"class", answers[p]}}.dump(),
                      "application/json");
    CHECK(r->status == 200);
  }
  auto seg = nlohmann::json::parse(cli.Get("/sessions/" + id + "/segmentation")->body);
  CHECK(seg.at("state") == "complete");
  TableOracle replay(answers);
  auto headless = run_advis(ds->cloud.points, small_settings(3).pipeline, 3, replay);
  CHECK(seg.at("labels").get<std::vector<int>>() == to_raster(ds->cloud, headless.labels, 6, 10));

  auto img = cli.Get("/sessions/" + id + "/image");
  CHECK(img->get_header_value("Content-Type") == "image/bmp");
  CHECK(img->body.substr(0, 2) == "BM");
  CHECK(cli.Get("/sessions/" + id + "/context")->status == 200);
  CHECK(nlohmann::json::parse(cli.Get("/sessions")->body).size() == 1);

  server.stop();
  th.join();
}
