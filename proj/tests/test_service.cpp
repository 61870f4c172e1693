#include <doctest.h>

#include "socialplan/service.hpp"

#include <httplib.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

using namespace socialplan;
using namespace socialplan::service;
using nlohmann::json;

namespace {

SessionOptions fast_options(SessionMode mode) {
  SessionOptions o;
  o.mode = mode;
  o.mpc.solver_samples = 32;
  o.mpc.solver_iters = 1;
  return o;
}

json ready_query(SessionManager& m, const std::string& id) {
  m.wait(id);
  json q = m.next_query(id);
  REQUIRE(q.at("status") != "pending");
  return q;
}

int status_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.status();
  }
  return 0;
}

bool mentions_population(const json& j) {
  const std::string s = j.dump();
  return s.find("agents") != std::string::npos || s.find("zone_radius") != std::string::npos ||
         s.find("population") != std::string::npos;
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("human session walks the evaluate, pair, evaluate cycle") {
    SessionManager m;
    const std::string id = m.create(fast_options(SessionMode::Human));

    json q = ready_query(m, id);
    CHECK(q.at("status") == "query");
    CHECK(q.at("kind") == "eval");
    CHECK(q.at("m_x").size() == 15);
    CHECK(q.contains("scene"));
    CHECK_FALSE(mentions_population(q));
    const std::int64_t first = q.at("query_id");
    CHECK(m.next_query(id) == q);

    CHECK(m.post_feedback(id, {{"query_id", first}, {"complaints_eval", 1}, {"reports", {{6, 7}}}}).at("accepted"));
    CHECK(status_of([&] { m.post_feedback(id, {{"query_id", first}, {"complaints_eval", 1}}); }) == 409);

    q = ready_query(m, id);
    CHECK(q.at("kind") == "pair");
    CHECK(q.at("query_id").get<std::int64_t>() > first);
    CHECK(q.at("m_plus").size() == 15);
    CHECK(q.at("m_minus").size() == 15);
    const std::int64_t pair_id = q.at("query_id");

    CHECK(status_of([&] { m.post_feedback(id, {{"query_id", first}, {"complaints_eval", 0}}); }) == 409);
    CHECK(m.next_query(id) == q);

    const json before = m.state(id);
    const std::vector<std::size_t> s_p = before.at("s_p");
    CHECK(m.post_feedback(id, {{"query_id", pair_id}, {"complaints_plus", 2}, {"complaints_minus", 0},
                               {"reports", {{6, 7}}}})
              .at("accepted"));
    q = ready_query(m, id);
    CHECK(q.at("kind") == "eval");
    CHECK(q.at("query_id").get<std::int64_t>() > pair_id);
    const json after = m.state(id);
    CHECK(after.at("iteration") == 1);
    const auto& x0 = before.at("x");
    const auto& x1 = after.at("x");
    for (std::size_t j = 0; j < x0.size(); ++j) {
      if (std::find(s_p.begin(), s_p.end(), j) == s_p.end()) CHECK(x0[j] == x1[j]);
    }

    m.post_feedback(id, {{"query_id", q.at("query_id")}, {"complaints_eval", 0}});
    q = ready_query(m, id);
    CHECK(q.at("status") == "terminal");
    CHECK(q.at("m_x").size() == 15);
    const json st = m.state(id);
    CHECK(st.at("terminal") == true);
    CHECK(st.at("complaint_history") == std::vector<int>{1, 0});
    CHECK(status_of([&] { m.post_feedback(id, {{"query_id", q.value("query_id", 0)}, {"complaints_eval", 0}}); }) == 409);
  }

  TEST_CASE("malformed feedback is rejected without changing state") {
    SessionManager m;
    const std::string id = m.create(fast_options(SessionMode::Human));
    const json q = ready_query(m, id);
    const std::int64_t qid = q.at("query_id");
    CHECK(status_of([&] { m.post_feedback(id, {{"query_id", qid}}); }) == 400);
    CHECK(status_of([&] { m.post_feedback(id, {{"query_id", qid}, {"complaints_eval", -1}}); }) == 400);
    CHECK(status_of([&] { m.post_feedback(id, {{"query_id", qid}, {"complaints_eval", 1}, {"reports", {{0, 1}}}}); }) ==
          400);
    CHECK(status_of([&] { m.post_feedback(id, {{"query_id", qid}, {"complaints_eval", 1}, {"reports", {{14}}}}); }) ==
          400);
    CHECK(status_of([&] { m.post_feedback(id, {{"complaints_eval", 1}}); }) == 400);
    CHECK(m.next_query(id) == q);
  }

  TEST_CASE("sessions are independent") {
    SessionManager m;
    const std::string a = m.create(fast_options(SessionMode::Human));
    const std::string b = m.create(fast_options(SessionMode::Human));
    CHECK(a != b);
    const json qa = ready_query(m, a);
    m.post_feedback(a, {{"query_id", qa.at("query_id")}, {"complaints_eval", 0}});
    CHECK(ready_query(m, a).at("status") == "terminal");
    CHECK(ready_query(m, b).at("kind") == "eval");
    CHECK(status_of([&] { m.state("nope"); }) == 404);
  }

  TEST_CASE("auto session without humans terminates at once") {
    SessionManager m;
    SessionOptions o = fast_options(SessionMode::Auto);
    o.p = 0;
    const std::string id = m.create(o);
    const json q = ready_query(m, id);
    CHECK(q.at("status") == "terminal");
    CHECK(q.at("iterations") == 0);
    CHECK(m.state(id).at("complaint_history") == std::vector<int>{0});
    CHECK(status_of([&] { m.post_feedback(id, {{"query_id", 1}, {"complaints_eval", 0}}); }) == 409);
  }

  TEST_CASE("auto sessions advance epochs and write the audit log") {
    const auto log = std::filesystem::temp_directory_path() / "socialplan_audit_test.jsonl";
    std::filesystem::remove(log);
    {
      SessionManager m(log);
      SessionOptions o = fast_options(SessionMode::Auto);
      o.p = 30;
      o.planner.max_inner = 3;
      const std::string id = m.create(o);
      CHECK(ready_query(m, id).at("status") == "terminal");
      CHECK(m.advance_epoch(id).at("epoch") == 1);
      CHECK(ready_query(m, id).at("epoch") == 1);
      CHECK_FALSE(mentions_population(m.state(id)));
    }
    std::ifstream in(log);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
      const json j = json::parse(line);
      CHECK(j.at("epoch") == lines);
      CHECK(j.at("mode") == "auto");
      CHECK(j.at("queries") == 2 * j.at("iterations").get<int>());
      ++lines;
    }
    CHECK(lines == 2);
    std::filesystem::remove(log);
  }

  TEST_CASE("advance needs a finished epoch") {
    SessionManager m;
    const std::string id = m.create(fast_options(SessionMode::Human));
    ready_query(m, id);
    CHECK(status_of([&] { m.advance_epoch(id); }) == 409);
  }

  TEST_CASE("session options from json") {
    const SessionOptions o = session_options_from_json({{"scheme", "full"}, {"p", 7}, {"seed", 5}}, SessionMode::Auto);
    CHECK(o.mode == SessionMode::Auto);
    CHECK(o.planner.scheme == Scheme::Full);
    CHECK(o.planner.eta == 0.1);
    CHECK(o.p == 7);
    CHECK(o.seed == 5);
    CHECK(session_options_from_json(json::object(), SessionMode::Human).mode == SessionMode::Human);
    CHECK_THROWS_AS(session_options_from_json({{"scheme", "wide"}}, SessionMode::Human), std::invalid_argument);
    CHECK_THROWS_AS(session_options_from_json({{"p", "many"}}, SessionMode::Human), std::invalid_argument);
    CHECK_THROWS_AS(session_options_from_json({{"mode", "robot"}}, SessionMode::Human), std::invalid_argument);
    CHECK_THROWS_AS(session_options_from_json({{"scene", {{"workspace", 3}}}}, SessionMode::Human), std::exception);
  }

  TEST_CASE("http round trip") {
    SessionManager m;
    httplib::Server server;
    register_routes(server, m, SessionMode::Human);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client c("127.0.0.1", port);
    auto created = c.Post("/sessions", R"({"seed": 3})", "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string id = json::parse(created->body).at("id");

    json q;
    for (int i = 0; i < 400; ++i) {
      auto r = c.Get("/sessions/" + id + "/query");
      REQUIRE(r);
      q = json::parse(r->body);
      if (r->status == 200) break;
      CHECK(r->status == 202);
      CHECK(q.at("status") == "pending");
      std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
    REQUIRE(q.at("status") == "query");
    CHECK(q.at("kind") == "eval");
    CHECK(q.at("m_x")[0] == std::vector<double>{0.0, 0.0});

    const json fb{{"query_id", q.at("query_id")}, {"complaints_eval", 0}};
    auto posted = c.Post("/sessions/" + id + "/feedback", fb.dump(), "application/json");
    REQUIRE(posted);
    CHECK(posted->status == 200);
    auto replay = c.Post("/sessions/" + id + "/feedback", fb.dump(), "application/json");
    REQUIRE(replay);
    CHECK(replay->status == 409);

    m.wait(id);
    auto state = c.Get("/sessions/" + id + "/state");
    REQUIRE(state);
    CHECK(state->status == 200);
    CHECK(json::parse(state->body).at("terminal") == true);

    auto missing = c.Get("/sessions/zzz/state");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    auto garbage = c.Post("/sessions", "{not json", "application/json");
    REQUIRE(garbage);
    CHECK(garbage->status == 400);
    auto bad_scheme = c.Post("/sessions", R"({"scheme": "wide"})", "application/json");
    REQUIRE(bad_scheme);
    CHECK(bad_scheme->status == 400);
    CHECK(json::parse(bad_scheme->body).at("error").get<std::string>().find("wide") != std::string::npos);

    server.stop();
    t.join();
  }
}
