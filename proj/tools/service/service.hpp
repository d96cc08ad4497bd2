#pragma once

// JSON-over-HTTP front end for panels, coordinators and analysts.
//
//   GET  /healthz
//   GET  /sessions                       summaries of stored sessions
//   POST /sessions                       open a session from anecdote records
//   GET  /sessions/{id}                  blinded session document
//   GET  /sessions/{id}/cards            blinded card payload
//   PUT  /sessions/{id}/ordering         draft ordering; If-Match: <version>
//   POST /sessions/{id}/finalize         chair finalization
//   POST /analyses                       unblind + analyze; X-Arm-Credential
//   GET  /analyses/{id}                  stored report
//   POST /whatif                         exploratory recomputation
//
// Every failure is a single {"code", "message", "detail"} object.

#include "../common/store.hpp"

#include <filesystem>
#include <mutex>
#include <string>

namespace httplib {
class Server;
}

namespace impact::service {

struct ServiceConfig {
  std::filesystem::path store_dir;
  /// Directory of <name>.json arm maps; read only by POST /analyses.
  std::filesystem::path arm_store_dir;
  /// Static credential required for arm-map access. Empty disables analyses.
  std::string arm_credential;
  /// Shuffle seed used when a POST /sessions body gives none.
  std::uint64_t default_seed = 0;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

class Service {
 public:
  explicit Service(ServiceConfig config);

  /// Registers every route on `server`.
  void install(httplib::Server& server);

  Response list_sessions();
  Response create_session(const nlohmann::json& body);
  Response get_session(const std::string& id);
  Response get_cards(const std::string& id);
  Response put_ordering(const std::string& id, const nlohmann::json& body, const std::string& if_match);
  Response finalize(const std::string& id, const nlohmann::json& body, const std::string& if_match);
  Response create_analysis(const nlohmann::json& body, const std::string& credential);
  Response get_analysis(const std::string& id);
  Response what_if(const nlohmann::json& body);

 private:
  ServiceConfig config_;
  app::FileStore store_;
  // Serializes store writes; version checks catch stale clients.
  std::mutex write_mutex_;
};

/// HTTP status for an error code.
int status_for(const std::string& code);

}  // namespace impact::service
