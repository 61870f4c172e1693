#include "socialplan/harness.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "socialplan/oracle.hpp"

namespace socialplan {

void ExperimentSpec::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (mode == Mode::Stationary && epochs != 1) throw std::invalid_argument("stationary studies use a single epoch");
  if (p < 0) throw std::invalid_argument("p must be >= 0");
  if (n_inner < 0) throw std::invalid_argument("n_inner must be >= 0");
  if (move_radius < 0.0) throw std::invalid_argument("move radius must be >= 0");
  scene.validate();
  mpc.validate();
  planner_config().validate();
}

PlannerConfig ExperimentSpec::planner_config() const {
  PlannerConfig cfg = planner.value_or(PlannerConfig::defaults(scheme));
  cfg.scheme = scheme;
  cfg.max_inner = n_inner;
  cfg.query_policy = mode == Mode::Stationary ? QueryPolicy::CheckEachIterate : QueryPolicy::BatchN;
  return cfg;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / n);
  return s;
}

RegretSeries cumulative_regret(std::span<const int> per_epoch_complaints) {
  RegretSeries r;
  r.values.reserve(per_epoch_complaints.size());
  double total = 0.0;
  for (const int c : per_epoch_complaints) {
    total += c;
    r.values.push_back(total);
  }
  return r;
}

Trajectory pin_endpoints(Trajectory t, Point2 start, Point2 goal) {
  if (t.size() >= 2) {
    t.waypoints.front() = start;
    t.waypoints.back() = goal;
  }
  return t;
}

namespace {

TraceSink collect_into(std::vector<IterateTrace>& out, int trial) {
  return [&out, trial](const IterateTrace& t) {
    out.push_back(t);
    out.back().trial = trial;
  };
}

}  // namespace

StationaryResult run_stationary(const ExperimentSpec& spec) {
  if (spec.mode != Mode::Stationary) throw std::invalid_argument("run_stationary needs a stationary spec");
  spec.validate();
  const PlannerConfig cfg = spec.planner_config();
  const MpcContext mpc{spec.mpc, spec.scene.workspace};

  std::vector<TrialRecord> records(static_cast<std::size_t>(spec.trials));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < spec.trials; ++t) {
    TrialRecord& rec = records[static_cast<std::size_t>(t)];
    const auto trial = static_cast<std::uint64_t>(t);
    Rng pop_rng = substream(spec.seed, trial, static_cast<std::uint64_t>(Stream::Population));
    Rng plan_rng = substream(spec.seed, trial, static_cast<std::uint64_t>(Stream::Planner));
    PopulationOracle oracle(spawn_population(spec.p, spec.scene.workspace, spec.zone_radii, 0.0, pop_rng));
    TraceSink sink = spec.keep_traces ? collect_into(rec.trace, t) : TraceSink{};
    const EpochResult res = plan_epoch(spec.scene.initial, oracle, cfg, mpc, plan_rng, 0, {}, sink);
    rec.iterations.push_back(res.iterations_used);
    rec.queries.push_back(res.queries_used);
    rec.lengths.push_back(res.final_trajectory.length());
    const int final_complaints = res.complaint_history.empty() ? 0 : res.complaint_history.back();
    rec.epoch_complaints.push_back(final_complaints);
    rec.converged = final_complaints == 0;
  }

  StationaryResult out;
  out.p = spec.p;
  out.scheme = spec.scheme;
  std::vector<double> iters, lengths;
  for (const auto& rec : records) {
    iters.push_back(rec.iterations.front());
    lengths.push_back(rec.lengths.front());
    if (!rec.converged) ++out.failures;
  }
  out.iterations = summarize(iters);
  out.length = summarize(lengths);
  out.trials = std::move(records);
  return out;
}

DynamicResult run_dynamic(const ExperimentSpec& spec) {
  if (spec.mode != Mode::Dynamic) throw std::invalid_argument("run_dynamic needs a dynamic spec");
  spec.validate();
  const PlannerConfig cfg = spec.planner_config();
  const MpcContext mpc{spec.mpc, spec.scene.workspace};
  const Trajectory baseline_traj = mpc.track(spec.scene.initial);
  const bool reports = cfg.scheme == Scheme::Local;

  std::vector<TrialRecord> records(static_cast<std::size_t>(spec.trials));
  std::vector<std::vector<int>> baseline(static_cast<std::size_t>(spec.trials));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < spec.trials; ++t) {
    TrialRecord& rec = records[static_cast<std::size_t>(t)];
    auto& base = baseline[static_cast<std::size_t>(t)];
    const auto trial = static_cast<std::uint64_t>(t);
    Rng pop_rng = substream(spec.seed, trial, static_cast<std::uint64_t>(Stream::Population));
    Rng plan_rng = substream(spec.seed, trial, static_cast<std::uint64_t>(Stream::Planner));
    Population pop = spawn_population(spec.p, spec.scene.workspace, spec.zone_radii, spec.move_radius, pop_rng);
    TraceSink sink = spec.keep_traces ? collect_into(rec.trace, t) : TraceSink{};

    Trajectory reference = spec.scene.initial;
    std::vector<std::vector<std::size_t>> latest_reports;
    for (int i = 0; i < spec.epochs; ++i) {
      if (i > 0) pop = advance_epoch(pop, pop_rng);
      PopulationOracle oracle(pop);
      const EpochResult res = plan_epoch(reference, oracle, cfg, mpc, plan_rng, i, latest_reports, sink);
      // regret bookkeeping is not a planner query
      rec.epoch_complaints.push_back(evaluate(pop, res.final_trajectory, false).complaint_count);
      rec.iterations.push_back(res.iterations_used);
      rec.queries.push_back(res.queries_used);
      rec.lengths.push_back(res.final_trajectory.length());
      base.push_back(evaluate(pop, baseline_traj, false).complaint_count);
      reference = pin_endpoints(res.final_trajectory, spec.scene.start, spec.scene.goal);
      if (reports) latest_reports = res.last_reports;
    }
  }

  DynamicResult out;
  out.move_radius = spec.move_radius;
  out.n_inner = spec.n_inner;
  const auto epochs = static_cast<std::size_t>(spec.epochs);
  out.baseline.values.assign(epochs, 0.0);
  out.method.values.assign(epochs, 0.0);
  for (std::size_t t = 0; t < records.size(); ++t) {
    const RegretSeries m = cumulative_regret(records[t].epoch_complaints);
    const RegretSeries b = cumulative_regret(baseline[t]);
    for (std::size_t i = 0; i < epochs; ++i) {
      out.method.values[i] += m.values[i] / static_cast<double>(spec.trials);
      out.baseline.values[i] += b.values[i] / static_cast<double>(spec.trials);
    }
  }
  out.trials = std::move(records);
  out.baseline_complaints = std::move(baseline);
  return out;
}

std::string stationary_csv_header() { return "p,scheme,mean_iters,std_iters,failures,mean_len,std_len"; }

std::string stationary_csv_row(const StationaryResult& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.p << ',' << to_string(r.scheme) << ',' << r.iterations.mean << ',' << r.iterations.stddev << ','
     << r.failures << ',' << r.length.mean << ',' << r.length.stddev;
  return os.str();
}

nlohmann::json to_json(const DynamicResult& r) {
  return {{"baseline", r.baseline.values}, {"method", r.method.values}, {"r", r.move_radius}, {"n_inner", r.n_inner}};
}

}  // namespace socialplan
