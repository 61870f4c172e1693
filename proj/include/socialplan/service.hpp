#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "socialplan/mpc.hpp"
#include "socialplan/scene.hpp"
#include "socialplan/zoplanner.hpp"

namespace httplib {
class Server;
}

namespace socialplan::service {

enum class SessionMode { Human, Auto };

const char* to_string(SessionMode m);
SessionMode session_mode_from_string(const std::string& s);

struct SessionOptions {
  SessionMode mode = SessionMode::Human;
  Scene scene = default_scene();
  PlannerConfig planner = PlannerConfig::defaults(Scheme::Local);
  MpcConfig mpc;
  std::uint64_t seed = 2021;
  // auto mode only
  int p = 20;
  double move_radius = 0.3;
  std::vector<double> zone_radii = {0.3, 0.4, 0.5, 0.7};

  void validate() const;
};

/// Request body of POST /sessions. Missing fields keep the defaults above;
/// "mode" falls back to `default_mode`.
SessionOptions session_options_from_json(const nlohmann::json& body, SessionMode default_mode);

/// Carries the HTTP status the endpoint should answer with.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class Session;

/// In-memory session registry. Every call is safe to make from any thread;
/// calls on one session are serialized.
class SessionManager {
 public:
  /// Finished epochs are appended to `audit_log` as JSON lines when the path is set.
  explicit SessionManager(std::optional<std::filesystem::path> audit_log = std::nullopt);
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  std::string create(const SessionOptions& options);

  /// {"status": "query", ...payload} | {"status": "pending", "retry_after_ms"} |
  /// {"status": "terminal", "m_x", ...}. Repeated calls return the same query.
  nlohmann::json next_query(const std::string& id);

  /// Consumes the pending query named by body["query_id"]. Stale, replayed or
  /// malformed posts throw ServiceError and leave the session unchanged.
  nlohmann::json post_feedback(const std::string& id, const nlohmann::json& body);

  nlohmann::json state(const std::string& id);

  /// Starts the next epoch from the finished one: warm start from its tracked
  /// trajectory; in auto mode the population moves first.
  nlohmann::json advance_epoch(const std::string& id);

  /// Blocks until no compute is in flight for the session.
  void wait(const std::string& id);

 private:
  std::shared_ptr<Session> find(const std::string& id);
  void audit(const nlohmann::json& line);

  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;

  std::mutex audit_mutex_;
  std::optional<std::filesystem::path> audit_log_;
};

/// POST /sessions, GET /sessions/{id}/query, POST /sessions/{id}/feedback,
/// GET /sessions/{id}/state, POST /sessions/{id}/advance.
void register_routes(httplib::Server& server, SessionManager& manager, SessionMode default_mode);

}  // namespace socialplan::service
