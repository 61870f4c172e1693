#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socialplan/mpc.hpp"
#include "socialplan/scene.hpp"
#include "socialplan/zoplanner.hpp"

namespace socialplan {

enum class Mode { Stationary, Dynamic };

struct ExperimentSpec {
  Mode mode = Mode::Stationary;
  int p = 20;
  double move_radius = 0.0;
  int epochs = 1;
  int n_inner = 50;
  Scheme scheme = Scheme::Local;
  int trials = 20;
  std::uint64_t seed = 2021;
  Scene scene = default_scene();
  MpcConfig mpc;
  std::vector<double> zone_radii = {0.3, 0.4, 0.5, 0.7};
  /// Overrides PlannerConfig::defaults(scheme); max_inner and query_policy are
  /// always set by the study being run.
  std::optional<PlannerConfig> planner;
  bool keep_traces = false;

  void validate() const;
  PlannerConfig planner_config() const;
};

struct TrialRecord {
  std::vector<int> epoch_complaints;  // complaints of the trajectory returned at each epoch
  std::vector<int> iterations;
  std::vector<int> queries;
  std::vector<double> lengths;
  bool converged = true;  // stationary: ended with zero complaints
  std::vector<IterateTrace> trace;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

Summary summarize(std::span<const double> values);

struct StationaryResult {
  int p = 0;
  Scheme scheme = Scheme::Local;
  Summary iterations;
  Summary length;
  int failures = 0;
  std::vector<TrialRecord> trials;
};

/// Cumulative complaints per epoch index.
struct RegretSeries {
  std::vector<double> values;
};

RegretSeries cumulative_regret(std::span<const int> per_epoch_complaints);

struct DynamicResult {
  RegretSeries baseline;  // trial mean, fixed m(x_T0)
  RegretSeries method;    // trial mean
  double move_radius = 0.0;
  int n_inner = 0;
  std::vector<TrialRecord> trials;
  std::vector<std::vector<int>> baseline_complaints;  // per trial, per epoch
};

/// Independent rng substreams of a trial.
enum class Stream : std::uint64_t { Population = 1, Planner = 2 };

StationaryResult run_stationary(const ExperimentSpec& spec);
DynamicResult run_dynamic(const ExperimentSpec& spec);

/// Copy of a tracked trajectory with its endpoints reset to the scene's start and goal.
Trajectory pin_endpoints(Trajectory t, Point2 start, Point2 goal);

std::string stationary_csv_header();
std::string stationary_csv_row(const StationaryResult& r);
nlohmann::json to_json(const DynamicResult& r);

}  // namespace socialplan
