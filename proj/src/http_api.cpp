#include "advis/http_api.hpp"

#include "advis/errors.hpp"
#include "advis/service.hpp"

#include <httplib.h>

#include <functional>

namespace advis {
namespace {

void send_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, {{"error", message}}, status);
}

// Maps library exceptions onto HTTP status codes.
void guarded(httplib::Response& res, const std::function<void()>& body) {
  try {
    body();
  } catch (const UnknownSession& e) {
    send_error(res, 404, e.what());
  } catch (const OutOfOrderSubmission& e) {
    send_error(res, 409, e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, std::string("malformed JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

void send_bmp(httplib::Response& res, const std::vector<std::uint8_t>& bytes) {
  res.set_content(std::string(bytes.begin(), bytes.end()), "image/bmp");
}

} // namespace

void mount_routes(httplib::Server& server, OracleService& service) {
  server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
  });
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server.Post("/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
      send_json(res, to_json(service.create_session(settings_from_json(body))), 201);
    });
  });
  server.Get("/sessions", [&service](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      nlohmann::json all = nlohmann::json::array();
      for (const auto& s : service.list())
        all.push_back(to_json(s));
      send_json(res, all);
    });
  });
  server.Get(R"(/sessions/([0-9a-f]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, to_json(service.status(req.matches[1]))); });
  });
  server.Get(R"(/sessions/([0-9a-f]+)/query)", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, to_json(service.next_query(req.matches[1]))); });
  });
  server.Post(R"(/sessions/([0-9a-f]+)/label)", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body);
      if (!body.contains("pixel") || !body.contains("class"))
        throw InvalidArgument("label body needs 'pixel' and 'class'");
      const auto pixel = body.at("pixel").get<long long>();
      if (pixel < 0)
        throw InvalidArgument("pixel must be nonnegative");
      send_json(res, to_json(service.submit_label(req.matches[1], static_cast<std::size_t>(pixel),
                                                  body.at("class").get<int>())));
    });
  });
  server.Get(R"(/sessions/([0-9a-f]+)/segmentation)",
             [&service](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] { send_json(res, to_json(service.segmentation(req.matches[1]))); });
             });
  server.Get(R"(/sessions/([0-9a-f]+)/image)", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_bmp(res, service.label_image(req.matches[1])); });
  });
  server.Get(R"(/sessions/([0-9a-f]+)/context)", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      (void)service.status(req.matches[1]);
      send_bmp(res, service.context_image());
    });
  });
}

} // namespace advis
