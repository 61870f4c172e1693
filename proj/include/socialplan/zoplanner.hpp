#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "socialplan/feedback.hpp"
#include "socialplan/geometry.hpp"
#include "socialplan/mpc.hpp"
#include "socialplan/rng.hpp"

namespace socialplan {

enum class Scheme { Full, Local };
/// CheckEachIterate evaluates every iterate (eval + pair per iteration);
/// BatchN runs all N updates on pair queries only.
enum class QueryPolicy { CheckEachIterate, BatchN };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct PlannerConfig {
  double alpha = 10.0;
  double rho = 1.0;
  double delta = 10.0;
  double eta = 0.5;
  int max_inner = 50;
  Scheme scheme = Scheme::Local;
  int pad_min = 1;
  int pad_max = 3;
  QueryPolicy query_policy = QueryPolicy::CheckEachIterate;

  /// Step size 0.1 for the full scheme and 0.5 for the local one.
  static PlannerConfig defaults(Scheme scheme);
  void validate() const;
};

/// Waypoints dimension of a planar trajectory.
inline constexpr int kWaypointDim = 2;

/// Sorted interior waypoint indices (never 0 or n).
struct PerturbationSet {
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }
  bool contains(std::size_t i) const;
};

Eigen::VectorXd flatten(const Trajectory& t);
Trajectory unflatten(const Eigen::VectorXd& v);

/// e(x) = || x - m(x) || over the stacked waypoint coordinates.
double tracking_error(const Trajectory& reference, const Trajectory& tracked);

/// Isotropic unit vector (normalized standard normal draw).
Eigen::VectorXd sample_direction(int dim, Rng& rng);

/// Zeroes every coordinate outside the set's waypoints and renormalizes.
/// std::nullopt when nothing is left to normalize; the caller resamples.
std::optional<Eigen::VectorXd> restrict_direction(const Eigen::VectorXd& u, const PerturbationSet& s);

/// Indices lo-before .. hi+after of a report spanning lo..hi, clipped to {1..n-1}.
std::vector<std::size_t> dilate_report(const std::vector<std::size_t>& report, int before, int after, std::size_t n);

/// Full: every interior index. Local: each report widened by independent
/// before/after pads drawn from [pad_min, pad_max], clipped to {1..n-1};
/// falls back to Full when the reports name nothing.
PerturbationSet build_perturbation_set(const std::vector<std::vector<std::size_t>>& reports, std::size_t n,
                                       Scheme scheme, int pad_min, int pad_max, Rng& rng);

/// w|S| (f_plus - f_minus) / (2 delta) * u_s, the two-point estimate used for both
/// the complaint count and the tracking error.
Eigen::VectorXd two_point_gradient(const PerturbationSet& s, const Eigen::VectorXd& u_s, double f_plus,
                                   double f_minus, double delta);

inline Eigen::VectorXd estimate_feedback_gradient(const PerturbationSet& s, const Eigen::VectorXd& u_s, int h_plus,
                                                  int h_minus, double delta) {
  return two_point_gradient(s, u_s, h_plus, h_minus, delta);
}

struct MpcContext {
  MpcConfig config;
  Workspace workspace;

  /// m(x)
  Trajectory track(const Trajectory& reference) const { return socialplan::track(reference, config, workspace); }
};

/// Tracks x +- delta u_s and returns the tracking-error estimate.
Eigen::VectorXd estimate_tracking_gradient(const Trajectory& x, const PerturbationSet& s, const Eigen::VectorXd& u_s,
                                           double delta, const MpcContext& mpc);

/// One line of the iterate trace. Fields that were not observed stay empty.
struct IterateTrace {
  int trial = -1;  // set by the experiment harness
  int epoch = 0;
  int iter = 0;
  std::optional<int> complaints;
  std::optional<double> tracking_error;
  std::optional<int> h_plus;
  std::optional<int> h_minus;
  std::vector<std::size_t> s_p;  // set used for the step out of this iterate
  Trajectory x;
};

using TraceSink = std::function<void(const IterateTrace&)>;

std::string to_json_line(const IterateTrace& t);

struct EpochResult {
  Trajectory final_trajectory;  // m(x^k) of the last iterate
  Trajectory final_reference;   // x^k
  int iterations_used = 0;
  /// Per-iteration queries only: a pair plus the post-update evaluation under
  /// CheckEachIterate, one pair under BatchN.
  int queries_used = 0;
  /// Whether the entry iterate m(x^0) was evaluated (CheckEachIterate only).
  bool entry_evaluated = false;
  std::vector<int> complaint_history;  // evaluation counts, entry evaluation first
  std::vector<std::vector<std::size_t>> last_reports;
};

class PlannerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Algorithm-1 inner loop as an ask/tell state machine: read the pending
/// trajectories, answer with feedback, repeat until done.
class EpochPlanner {
 public:
  enum class Phase { Eval, Pair, Done };

  EpochPlanner(Trajectory x0, PlannerConfig cfg, MpcContext mpc, Rng rng, int epoch = 0,
               std::vector<std::vector<std::size_t>> seed_reports = {}, TraceSink sink = {});

  Phase phase() const { return phase_; }
  int iteration() const { return k_; }
  int epoch() const { return epoch_; }
  const Trajectory& iterate() const { return x_; }
  /// m(x^k); pending under Eval and the final answer under Done.
  const Trajectory& tracked() const { return m_x_; }
  const Trajectory& tracked_plus() const { return m_plus_; }
  const Trajectory& tracked_minus() const { return m_minus_; }
  const PerturbationSet& perturbation_set() const { return s_p_; }
  const PlannerConfig& config() const { return cfg_; }
  const std::vector<int>& complaint_history() const { return complaint_history_; }

  void answer_eval(const FeedbackResponse& response);
  void answer_pair(const FeedbackResponse& plus, const FeedbackResponse& minus);

  /// Valid once phase() == Done.
  EpochResult result() const;

 private:
  void stage_pair(const std::vector<std::vector<std::size_t>>& reports);
  void finish();
  void emit(std::optional<int> complaints, std::optional<double> e, std::optional<int> hp, std::optional<int> hm,
            const std::vector<std::size_t>& s_p) const;

  PlannerConfig cfg_;
  MpcContext mpc_;
  Rng rng_;
  int epoch_;
  TraceSink sink_;

  Phase phase_ = Phase::Eval;
  int k_ = 0;
  Trajectory x_;
  Trajectory m_x_;
  Trajectory x_plus_, x_minus_, m_plus_, m_minus_;
  PerturbationSet s_p_;
  Eigen::VectorXd u_s_;

  std::optional<int> pending_complaints_;
  std::optional<double> pending_error_;

  int queries_ = 0;
  bool entry_evaluated_ = false;
  std::vector<int> complaint_history_;
  std::vector<std::vector<std::size_t>> last_reports_;
};

/// Drives an EpochPlanner against a feedback source until it terminates.
EpochResult plan_epoch(const Trajectory& x0, FeedbackSource& feedback, const PlannerConfig& cfg,
                       const MpcContext& mpc, Rng& rng, int epoch = 0,
                       std::vector<std::vector<std::size_t>> seed_reports = {}, TraceSink sink = {});

}  // namespace socialplan
