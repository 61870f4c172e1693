#include "socialplan/service.hpp"

#include <httplib.h>

#include <fstream>
#include <functional>
#include <future>

#include "socialplan/harness.hpp"
#include "socialplan/oracle.hpp"

namespace socialplan::service {

using nlohmann::json;

const char* to_string(SessionMode m) { return m == SessionMode::Human ? "human" : "auto"; }

SessionMode session_mode_from_string(const std::string& s) {
  if (s == "human") return SessionMode::Human;
  if (s == "auto") return SessionMode::Auto;
  throw std::invalid_argument("unknown mode '" + s + "' (expected human or auto)");
}

void SessionOptions::validate() const {
  scene.validate();
  planner.validate();
  mpc.validate();
  if (planner.query_policy != QueryPolicy::CheckEachIterate) {
    throw std::invalid_argument("sessions run the check-each-iterate policy");
  }
  if (p < 0) throw std::invalid_argument("p must be >= 0");
  if (!(move_radius >= 0.0)) throw std::invalid_argument("move_radius must be >= 0");
  if (zone_radii.empty()) throw std::invalid_argument("zone_radii must not be empty");
  for (double r : zone_radii) {
    if (!(r > 0.0)) throw std::invalid_argument("zone radii must be positive");
  }
}

namespace {

template <class T>
T field(const json& body, const char* key, T fallback) {
  if (!body.contains(key)) return fallback;
  try {
    return body.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

SessionOptions session_options_from_json(const json& body, SessionMode default_mode) {
  if (!body.is_object()) throw std::invalid_argument("session request must be a JSON object");
  SessionOptions o;
  o.mode = body.contains("mode") ? session_mode_from_string(field<std::string>(body, "mode", "")) : default_mode;
  const Scheme scheme = scheme_from_string(field<std::string>(body, "scheme", "local"));
  o.planner = PlannerConfig::defaults(scheme);
  o.planner.max_inner = field<int>(body, "max_inner", o.planner.max_inner);
  if (body.contains("scene")) o.scene = scene_from_json(body.at("scene"));
  o.seed = field<std::uint64_t>(body, "seed", o.seed);
  o.p = field<int>(body, "p", o.p);
  o.move_radius = field<double>(body, "move_radius", o.move_radius);
  o.zone_radii = field<std::vector<double>>(body, "zone_radii", o.zone_radii);
  o.validate();
  return o;
}

class Session {
 public:
  using Audit = std::function<void(const json&)>;

  Session(std::string id, SessionOptions opts, Audit audit)
      : id_(std::move(id)),
        opts_(std::move(opts)),
        audit_(std::move(audit)),
        pop_rng_(substream(opts_.seed, 0, static_cast<std::uint64_t>(Stream::Population))) {
    if (opts_.mode == SessionMode::Auto) {
      population_ = spawn_population(opts_.p, opts_.scene.workspace, opts_.zone_radii, opts_.move_radius, pop_rng_);
    }
    std::lock_guard lock(mutex_);
    start_epoch(opts_.scene.initial);
  }

  ~Session() { wait(); }

  void wait() {
    std::future<void> task;
    {
      std::lock_guard lock(mutex_);
      task = std::move(task_);
    }
    if (task.valid()) task.wait();
  }

  json next_query() {
    std::lock_guard lock(mutex_);
    if (error_) throw ServiceError(500, *error_);
    if (computing_) return json{{"status", "pending"}, {"retry_after_ms", kRetryAfterMs}};
    if (planner_->phase() == EpochPlanner::Phase::Done) return terminal_payload();
    json q{{"status", "query"},
           {"query_id", query_id_},
           {"epoch", epoch_},
           {"iteration", planner_->iteration()},
           {"m_x", to_json(planner_->tracked())},
           {"scene", to_json(opts_.scene)}};
    if (planner_->phase() == EpochPlanner::Phase::Eval) {
      q["kind"] = "eval";
    } else {
      q["kind"] = "pair";
      q["m_plus"] = to_json(planner_->tracked_plus());
      q["m_minus"] = to_json(planner_->tracked_minus());
    }
    return q;
  }

  json post_feedback(const json& body) {
    if (!body.is_object() || !body.contains("query_id") || !body.at("query_id").is_number_integer()) {
      throw ServiceError(400, "feedback needs an integer query_id");
    }
    const std::int64_t qid = body.at("query_id").get<std::int64_t>();

    std::lock_guard lock(mutex_);
    if (error_) throw ServiceError(500, *error_);
    if (opts_.mode == SessionMode::Auto) throw ServiceError(409, "auto sessions take feedback from the oracle");
    if (computing_) throw ServiceError(409, "query " + std::to_string(qid) + " is not pending (compute in progress)");
    if (planner_->phase() == EpochPlanner::Phase::Done) throw ServiceError(409, "epoch finished");
    if (qid != query_id_) {
      throw ServiceError(409, "stale query id " + std::to_string(qid) + " (pending " + std::to_string(query_id_) + ")");
    }

    const auto reports = parse_reports(body);
    if (planner_->phase() == EpochPlanner::Phase::Eval) {
      const FeedbackResponse r{parse_count(body, "complaints_eval"), reports};
      launch([this, r] { planner_->answer_eval(r); });
    } else {
      const FeedbackResponse plus{parse_count(body, "complaints_plus"), reports};
      const FeedbackResponse minus{parse_count(body, "complaints_minus"), {}};
      launch([this, plus, minus] { planner_->answer_pair(plus, minus); });
    }
    return json{{"accepted", true}, {"query_id", qid}};
  }

  json state() {
    std::lock_guard lock(mutex_);
    json s{{"id", id_}, {"mode", to_string(opts_.mode)}, {"epoch", epoch_}, {"computing", computing_}};
    if (error_) s["error"] = *error_;
    if (computing_ || !planner_) return s;
    const auto phase = planner_->phase();
    s["iteration"] = planner_->iteration();
    s["terminal"] = phase == EpochPlanner::Phase::Done;
    s["phase"] = phase == EpochPlanner::Phase::Eval ? "eval" : phase == EpochPlanner::Phase::Pair ? "pair" : "done";
    s["complaint_history"] = planner_->complaint_history();
    s["x"] = to_json(planner_->iterate());
    if (phase == EpochPlanner::Phase::Pair) s["s_p"] = planner_->perturbation_set().indices;
    s["finished_epochs"] = finished_;
    return s;
  }

  json advance() {
    std::lock_guard lock(mutex_);
    if (error_) throw ServiceError(500, *error_);
    if (computing_ || planner_->phase() != EpochPlanner::Phase::Done) {
      throw ServiceError(409, "the current epoch has not finished");
    }
    const Trajectory warm = pin_endpoints(planner_->result().final_trajectory, opts_.scene.start, opts_.scene.goal);
    ++epoch_;
    if (population_) population_ = advance_epoch(*population_, pop_rng_);
    start_epoch(warm);
    return json{{"epoch", epoch_}};
  }

 private:
  static constexpr int kRetryAfterMs = 50;

  static int parse_count(const json& body, const char* key) {
    if (!body.contains(key) || !body.at(key).is_number_integer() || body.at(key).get<std::int64_t>() < 0) {
      throw ServiceError(400, std::string("feedback needs a nonnegative integer '") + key + "'");
    }
    return body.at(key).get<int>();
  }

  std::vector<std::vector<std::size_t>> parse_reports(const json& body) const {
    std::vector<std::vector<std::size_t>> out;
    if (!body.contains("reports")) return out;
    const json& r = body.at("reports");
    const std::int64_t last = static_cast<std::int64_t>(opts_.scene.initial.size()) - 1;
    if (!r.is_array()) throw ServiceError(400, "reports must be an array of index arrays");
    for (const auto& entry : r) {
      if (!entry.is_array()) throw ServiceError(400, "reports must be an array of index arrays");
      std::vector<std::size_t> idx;
      for (const auto& i : entry) {
        if (!i.is_number_integer()) throw ServiceError(400, "report indices must be integers");
        const std::int64_t v = i.get<std::int64_t>();
        if (v < 1 || v >= last) {
          throw ServiceError(400, "report index " + std::to_string(v) + " outside 1.." + std::to_string(last - 1));
        }
        idx.push_back(static_cast<std::size_t>(v));
      }
      out.push_back(std::move(idx));
    }
    return out;
  }

  // Caller holds mutex_.
  void start_epoch(const Trajectory& x0) {
    const int epoch = epoch_;
    launch([this, x0, epoch] {
      auto planner = std::make_unique<EpochPlanner>(
          x0, opts_.planner, MpcContext{opts_.mpc, opts_.scene.workspace},
          substream(opts_.seed, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(Stream::Planner)), epoch);
      if (population_) drive(*planner);
      planner_ = std::move(planner);
    });
  }

  void drive(EpochPlanner& planner) {
    const bool reports = opts_.planner.scheme == Scheme::Local;
    while (planner.phase() != EpochPlanner::Phase::Done) {
      if (planner.phase() == EpochPlanner::Phase::Eval) {
        planner.answer_eval(evaluate(*population_, planner.tracked(), reports));
      } else {
        planner.answer_pair(evaluate(*population_, planner.tracked_plus(), reports),
                            evaluate(*population_, planner.tracked_minus(), reports));
      }
    }
  }

  // Runs `work` off the request path. Caller holds mutex_; the session fields
  // touched by `work` are not read while computing_ is set.
  void launch(std::function<void()> work) {
    computing_ = true;
    task_ = std::async(std::launch::async, [this, work = std::move(work)] {
      std::optional<std::string> failure;
      try {
        work();
      } catch (const std::exception& e) {
        failure = e.what();
      }
      json line;
      {
        std::lock_guard lock(mutex_);
        if (failure) {
          error_ = failure;
        } else {
          ++query_id_;
          if (planner_->phase() == EpochPlanner::Phase::Done) {
            line = epoch_record();
            finished_.push_back(line);
          }
        }
        computing_ = false;
      }
      if (!line.is_null() && audit_) audit_(line);
    });
  }

  json epoch_record() const {
    const EpochResult r = planner_->result();
    return json{{"id", id_},
                {"mode", to_string(opts_.mode)},
                {"epoch", epoch_},
                {"iterations", r.iterations_used},
                {"queries", r.queries_used},
                {"complaint_history", r.complaint_history},
                {"m_x", to_json(r.final_trajectory)}};
  }

  json terminal_payload() const {
    const EpochResult r = planner_->result();
    return json{{"status", "terminal"},
                {"epoch", epoch_},
                {"iterations", r.iterations_used},
                {"complaint_history", r.complaint_history},
                {"m_x", to_json(r.final_trajectory)}};
  }

  std::string id_;
  SessionOptions opts_;
  Audit audit_;
  Rng pop_rng_;
  std::optional<Population> population_;

  std::mutex mutex_;
  std::future<void> task_;
  bool computing_ = false;
  std::optional<std::string> error_;
  std::unique_ptr<EpochPlanner> planner_;
  int epoch_ = 0;
  std::int64_t query_id_ = 0;
  std::vector<json> finished_;
};

SessionManager::SessionManager(std::optional<std::filesystem::path> audit_log) : audit_log_(std::move(audit_log)) {}

SessionManager::~SessionManager() {
  std::map<std::string, std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(mutex_);
    sessions.swap(sessions_);
  }
  for (auto& [id, s] : sessions) s->wait();
}

std::string SessionManager::create(const SessionOptions& options) {
  options.validate();
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "s" + std::to_string(next_id_++);
  }
  auto session = std::make_shared<Session>(id, options, [this](const json& line) { audit(line); });
  std::lock_guard lock(mutex_);
  sessions_.emplace(id, std::move(session));
  return id;
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session '" + id + "'");
  return it->second;
}

json SessionManager::next_query(const std::string& id) { return find(id)->next_query(); }
json SessionManager::post_feedback(const std::string& id, const json& body) { return find(id)->post_feedback(body); }
json SessionManager::state(const std::string& id) { return find(id)->state(); }
json SessionManager::advance_epoch(const std::string& id) { return find(id)->advance(); }
void SessionManager::wait(const std::string& id) { find(id)->wait(); }

void SessionManager::audit(const json& line) {
  if (!audit_log_) return;
  std::lock_guard lock(audit_mutex_);
  std::ofstream out(*audit_log_, std::ios::app);
  out << line.dump() << '\n';
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    reply(res, e.status(), json{{"error", e.what()}});
  } catch (const json::exception& e) {
    reply(res, 400, json{{"error", std::string("malformed JSON: ") + e.what()}});
  } catch (const std::invalid_argument& e) {
    reply(res, 400, json{{"error", e.what()}});
  } catch (const std::exception& e) {
    reply(res, 500, json{{"error", e.what()}});
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

void register_routes(httplib::Server& server, SessionManager& manager, SessionMode default_mode) {
  server.Post("/sessions", [&manager, default_mode](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const SessionOptions opts = session_options_from_json(parse_body(req), default_mode);
      reply(res, 201, json{{"id", manager.create(opts)}});
    });
  });
  server.Get(R"(/sessions/([^/]+)/query)", [&manager](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json q = manager.next_query(req.matches[1]);
      if (q.at("status") == "pending") {
        res.set_header("Retry-After", "1");
        reply(res, 202, q);
      } else {
        reply(res, 200, q);
      }
    });
  });
  server.Post(R"(/sessions/([^/]+)/feedback)", [&manager](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, manager.post_feedback(req.matches[1], parse_body(req))); });
  });
  server.Get(R"(/sessions/([^/]+)/state)", [&manager](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, manager.state(req.matches[1])); });
  });
  server.Post(R"(/sessions/([^/]+)/advance)", [&manager](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, manager.advance_epoch(req.matches[1])); });
  });
}

}  // namespace socialplan::service
