#include "service.hpp"

#include "../common/workflow.hpp"

#include "impact/error.hpp"
#include "impact/records_io.hpp"

#include <httplib.h>

#include <charconv>
#include <sstream>

namespace impact::service {

namespace {

constexpr const char* kJson = "application/json";

std::uint64_t parse_version(const std::string& header) {
  std::string v = header;
  // Accept both 3 and "3" (ETag style).
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw Error(errc::kInvalidArgument, "If-Match must carry the session version number");
  return out;
}

nlohmann::json session_summary(const panel::RankingSession& s) {
  return {{"session_id", s.session_id()},
          {"label", s.label()},
          {"status", std::string(panel::to_string(s.status()))},
          {"version", s.version()},
          {"card_count", s.cards().size()},
          {"allow_ties", s.allow_ties()}};
}

std::string body_string(const nlohmann::json& body, const char* key, std::string fallback = {}) {
  if (!body.contains(key)) return fallback;
  if (!body.at(key).is_string()) throw Error(errc::kInvalidArgument, std::string(key) + " must be a string");
  return body.at(key).get<std::string>();
}

// Constant-time comparison so the credential cannot be probed by timing.
bool credential_matches(const std::string& given, const std::string& expected) {
  if (given.size() != expected.size()) return false;
  unsigned char diff = 0;
  for (std::size_t i = 0; i < given.size(); ++i)
    diff |= static_cast<unsigned char>(given[i] ^ expected[i]);
  return diff == 0;
}

Response error_response(const std::string& code, const std::string& message, const nlohmann::json& detail = nullptr) {
  return {status_for(code), app::error_json(code, message, detail)};
}

template <typename F>
Response guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    return error_response(e.code(), e.what(), e.detail());
  } catch (const nlohmann::json::exception& e) {
    return error_response(errc::kInvalidArgument, std::string("request body: ") + e.what());
  } catch (const std::exception& e) {
    return error_response("internal", e.what());
  }
}

}  // namespace

int status_for(const std::string& code) {
  if (code == "not_found") return 404;
  if (code == "unauthorized") return 401;
  if (code == "precondition_required") return 428;
  if (code == errc::kVersionConflict || code == errc::kSessionState || code == errc::kDuplicateId) return 409;
  if (code == errc::kQualityRejected || code == errc::kMissingArmAssignment ||
      code == errc::kDegenerateDistribution || code == errc::kInvariantViolation)
    return 422;
  if (code == errc::kIo || code == "internal") return 500;
  return 400;
}

Service::Service(ServiceConfig config) : config_(std::move(config)), store_(config_.store_dir) {}

Response Service::list_sessions() {
  return guarded([&] {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& id : store_.session_ids()) arr.push_back(session_summary(store_.load_session(id)));
    return Response{200, {{"sessions", arr}}};
  });
}

Response Service::create_session(const nlohmann::json& body) {
  return guarded([&] {
    if (!body.is_object() || !body.contains("records") || !body.at("records").is_array())
      throw Error(errc::kInvalidArgument, "body needs a \"records\" array of anecdote rows");
    std::stringstream rows;
    for (const auto& row : body.at("records")) rows << row.dump() << "\n";
    const auto data = records::ingest_jsonl(rows);

    app::NewSessionRequest req;
    req.session.allow_ties = body.value("allow_ties", false);
    req.session.seed = body.value("seed", config_.default_seed);
    req.session.label = body_string(body, "label");
    req.session.actor = body_string(body, "actor", "coordinator");
    req.cgi_declared = body.value("cgi_declared", true);
    const auto policy = body_string(body, "visit_policy", "last-blinded-day");
    if (policy == "latest") req.policy = records::VisitPolicy::Latest;
    else if (policy != "last-blinded-day")
      throw Error(errc::kInvalidArgument, "visit_policy must be last-blinded-day or latest");
    if (body.contains("participants")) req.participants = body.at("participants").get<std::vector<std::string>>();

    auto result = app::new_session(data, req);
    std::lock_guard lock(write_mutex_);
    store_.save_sealed(result.opened.sealed);
    store_.save_session(result.opened.session);
    return Response{201, {{"session", result.opened.session.to_json()}, {"warnings", app::findings_json(result.warnings)}}};
  });
}

Response Service::get_session(const std::string& id) {
  return guarded([&] { return Response{200, store_.load_session(id).to_json()}; });
}

Response Service::get_cards(const std::string& id) {
  return guarded([&] {
    const auto s = store_.load_session(id);
    return Response{200, {{"session_id", s.session_id()},
                          {"version", s.version()},
                          {"allow_ties", s.allow_ties()},
                          {"status", std::string(panel::to_string(s.status()))},
                          {"cards", s.cards_json()}}};
  });
}

Response Service::put_ordering(const std::string& id, const nlohmann::json& body, const std::string& if_match) {
  return guarded([&] {
    if (if_match.empty())
      throw Error("precondition_required", "PUT ordering needs an If-Match header with the session version");
    const auto expected = parse_version(if_match);
    if (!body.is_object() || !body.contains("tiers")) throw Error(errc::kInvalidArgument, "body needs \"tiers\"");
    const auto tiers = panel::tiers_from_json(body.at("tiers"));
    const auto actor = body_string(body, "actor", "chair");

    std::lock_guard lock(write_mutex_);
    auto session = store_.load_session(id);
    const auto ranks = session.submit_ordering(tiers, actor, expected);
    store_.save_session(session);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : ranks) arr.push_back({{"card_id", r.card_id}, {"rank", r.rank.to_double()}});
    return Response{200, {{"session_id", id}, {"version", session.version()}, {"ranks", arr}}};
  });
}

Response Service::finalize(const std::string& id, const nlohmann::json& body, const std::string& if_match) {
  return guarded([&] {
    const auto chair = body.is_object() ? body_string(body, "chair_id") : std::string{};
    if (chair.empty()) throw Error(errc::kInvalidArgument, "body needs \"chair_id\"");
    std::lock_guard lock(write_mutex_);
    auto session = store_.load_session(id);
    if (!if_match.empty() && parse_version(if_match) != session.version())
      throw Error(errc::kVersionConflict, "session changed since version " + if_match,
                  {{"current_version", session.version()}});
    session.finalize(chair);
    store_.save_session(session);
    return Response{200, session_summary(session)};
  });
}

Response Service::create_analysis(const nlohmann::json& body, const std::string& credential) {
  return guarded([&] {
    if (config_.arm_credential.empty())
      throw Error("unauthorized", "arm-map access is not configured on this server");
    if (!credential_matches(credential, config_.arm_credential))
      throw Error("unauthorized", "missing or invalid X-Arm-Credential");
    if (!body.is_object()) throw Error(errc::kInvalidArgument, "body must be an object");
    const auto session_id = body_string(body, "session_id");
    const auto arm_name = body_string(body, "arm_map");
    if (!app::safe_id(arm_name)) throw Error(errc::kInvalidArgument, "arm_map must name a stored arm map");
    const auto arm_path = config_.arm_store_dir / (arm_name + ".json");
    if (!std::filesystem::exists(arm_path)) throw Error("not_found", "no such arm map: " + arm_name);
    const auto options = app::options_from_json(body.value("options", nlohmann::json()));
    auto analysis_id = body_string(body, "analysis_id");
    if (analysis_id.empty()) analysis_id = panel::random_ids("a-")();

    std::lock_guard lock(write_mutex_);
    // The arm map lives only for the duration of this request.
    const auto report = [&] {
      const auto arms = app::load_arm_map(arm_path);
      return app::run_analysis(store_, session_id, arms, options, analysis_id);
    }();
    return Response{201, analysis::to_json(report)};
  });
}

Response Service::get_analysis(const std::string& id) {
  return guarded([&] { return Response{200, analysis::to_json(store_.load_analysis(id))}; });
}

Response Service::what_if(const nlohmann::json& body) {
  return guarded([&] {
    if (!body.is_object() || !body.contains("tiers")) throw Error(errc::kInvalidArgument, "body needs \"tiers\"");
    const auto analysis_id = body_string(body, "analysis_id");
    std::optional<analysis::AnalysisOptions> options;
    if (body.contains("options")) {
      const auto stored = store_.load_analysis(analysis_id);
      options = app::options_from_json(body.at("options"), stored.options);
    }
    const auto result = app::run_what_if(store_, analysis_id, panel::tiers_from_json(body.at("tiers")), options);
    return Response{200, analysis::to_json(result)};
  });
}

void Service::install(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), kJson);
  };
  // Parses the body, or answers 400 and returns nullopt.
  auto parse = [send](const httplib::Request& req, httplib::Response& res) -> std::optional<nlohmann::json> {
    if (req.body.empty()) return nlohmann::json::object();
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      send(res, error_response(errc::kInvalidArgument, std::string("request body is not JSON: ") + e.what()));
      return std::nullopt;
    }
  };

  server.Get("/healthz", [send](const httplib::Request&, httplib::Response& res) {
    send(res, {200, {{"status", "ok"}}});
  });
  server.Get("/sessions", [this, send](const httplib::Request&, httplib::Response& res) { send(res, list_sessions()); });
  server.Post("/sessions", [this, send, parse](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parse(req, res)) send(res, create_session(*body));
  });
  server.Get("/sessions/:id", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_session(req.path_params.at("id")));
  });
  server.Get("/sessions/:id/cards", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_cards(req.path_params.at("id")));
  });
  server.Put("/sessions/:id/ordering", [this, send, parse](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parse(req, res))
      send(res, put_ordering(req.path_params.at("id"), *body, req.get_header_value("If-Match")));
  });
  server.Post("/sessions/:id/finalize", [this, send, parse](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parse(req, res))
      send(res, finalize(req.path_params.at("id"), *body, req.get_header_value("If-Match")));
  });
  server.Post("/analyses", [this, send, parse](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parse(req, res)) send(res, create_analysis(*body, req.get_header_value("X-Arm-Credential")));
  });
  server.Get("/analyses/:id", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_analysis(req.path_params.at("id")));
  });
  server.Post("/whatif", [this, send, parse](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parse(req, res)) send(res, what_if(*body));
  });

  // Unmatched routes still answer with an ApiError.
  server.set_error_handler([send](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty())
      send(res, {res.status, app::error_json(res.status == 404 ? "not_found" : "http_error",
                                             "no route for " + req.method + " " + req.path)});
  });
}

}  // namespace impact::service
