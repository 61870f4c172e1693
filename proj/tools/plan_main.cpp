#include "socialplan/harness.hpp"
#include "socialplan/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

using namespace socialplan;

namespace {

struct Common {
  std::string scene_path;
  std::string trace_path;
  std::string out_path;
  std::uint64_t seed = 2021;
  int p = 20;
  int trials = 20;
  std::string scheme = "local";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--p", c.p, "number of humans")->check(CLI::NonNegativeNumber);
  cmd->add_option("--scheme", c.scheme, "perturbation scheme")->check(CLI::IsMember({"full", "local"}));
  cmd->add_option("--trials", c.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "base seed (PLAN_SEED overrides)");
  cmd->add_option("--out", c.out_path, "output file (stdout when omitted)");
  cmd->add_option("--scene", c.scene_path, "scene JSON file");
  cmd->add_option("--trace", c.trace_path, "write iterate trace as JSON lines");
}

ExperimentSpec base_spec(const Common& c) {
  ExperimentSpec spec;
  spec.p = c.p;
  spec.scheme = scheme_from_string(c.scheme);
  spec.trials = c.trials;
  spec.seed = c.seed;
  if (const char* env = std::getenv("PLAN_SEED")) spec.seed = std::stoull(env);
  if (!c.scene_path.empty()) spec.scene = load_scene(c.scene_path);
  spec.keep_traces = !c.trace_path.empty();
  return spec;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

void write_trace(const std::string& path, const std::vector<TrialRecord>& trials) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (const auto& t : trials) {
    for (const auto& line : t.trace) out << to_json_line(line) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Socially-aware trajectory planning from complaint feedback"};
  app.require_subcommand(1);

  Common st;
  auto* stationary = app.add_subcommand("stationary", "fixed population, iterations and lengths per trial");
  add_common(stationary, st);

  Common dy;
  dy.p = 50;
  dy.trials = 5;
  double r = 0.3;
  int n_inner = 3;
  int epochs = 31;
  auto* dynamic = app.add_subcommand("dynamic", "moving population, cumulative regret");
  add_common(dynamic, dy);
  dynamic->add_option("--r", r, "movement radius")->check(CLI::NonNegativeNumber);
  dynamic->add_option("--n-inner", n_inner, "gradient updates per epoch")->check(CLI::NonNegativeNumber);
  dynamic->add_option("--epochs", epochs, "number of epochs")->check(CLI::PositiveNumber);

  int port = 8080;
  std::string host = "127.0.0.1";
  std::string mode = "human";
  std::string audit_path;
  auto* serve = app.add_subcommand("serve", "feedback service over HTTP");
  serve->add_option("--port", port, "listen port");
  serve->add_option("--host", host, "listen address");
  serve->add_option("--mode", mode, "default session mode")->check(CLI::IsMember({"human", "auto"}));
  serve->add_option("--audit", audit_path, "JSON-lines log of finished epochs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*stationary) {
      ExperimentSpec spec = base_spec(st);
      spec.mode = Mode::Stationary;
      const StationaryResult res = run_stationary(spec);
      write_output(st.out_path, stationary_csv_header() + "\n" + stationary_csv_row(res) + "\n");
      write_trace(st.trace_path, res.trials);
    } else if (*dynamic) {
      ExperimentSpec spec = base_spec(dy);
      spec.mode = Mode::Dynamic;
      spec.move_radius = r;
      spec.n_inner = n_inner;
      spec.epochs = epochs;
      const DynamicResult res = run_dynamic(spec);
      write_output(dy.out_path, to_json(res).dump(2) + "\n");
      write_trace(dy.trace_path, res.trials);
    } else if (*serve) {
      std::optional<std::filesystem::path> audit;
      if (!audit_path.empty()) audit = audit_path;
      service::SessionManager manager(audit);
      httplib::Server server;
      service::register_routes(server, manager, service::session_mode_from_string(mode));
      std::cerr << "listening on " << host << ":" << port << '\n';
      if (!server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
    }
  } catch (const std::exception& e) {
    std::cerr << "plan: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
