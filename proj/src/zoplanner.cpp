#include "socialplan/zoplanner.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <random>
#include <set>

namespace socialplan {

const char* to_string(Scheme s) { return s == Scheme::Full ? "full" : "local"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "full") return Scheme::Full;
  if (s == "local") return Scheme::Local;
  throw std::invalid_argument("unknown scheme '" + s + "' (expected full or local)");
}

PlannerConfig PlannerConfig::defaults(Scheme scheme) {
  PlannerConfig cfg;
  cfg.scheme = scheme;
  cfg.eta = scheme == Scheme::Full ? 0.1 : 0.5;
  return cfg;
}

void PlannerConfig::validate() const {
  if (!(alpha > 0.0) || !(rho > 0.0) || !(delta > 0.0) || !(eta > 0.0)) {
    throw std::invalid_argument("planner alpha, rho, delta and eta must be positive");
  }
  if (max_inner < 0) throw std::invalid_argument("planner max_inner must be >= 0");
  if (pad_min < 0 || pad_max < pad_min) throw std::invalid_argument("planner pad range must be a nonnegative interval");
}

bool PerturbationSet::contains(std::size_t i) const {
  return std::binary_search(indices.begin(), indices.end(), i);
}

Eigen::VectorXd flatten(const Trajectory& t) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(kWaypointDim * t.size()));
  for (std::size_t j = 0; j < t.size(); ++j) {
    v(static_cast<Eigen::Index>(2 * j)) = t[j].x;
    v(static_cast<Eigen::Index>(2 * j + 1)) = t[j].y;
  }
  return v;
}

Trajectory unflatten(const Eigen::VectorXd& v) {
  Trajectory t;
  t.waypoints.resize(static_cast<std::size_t>(v.size() / kWaypointDim));
  for (std::size_t j = 0; j < t.size(); ++j) {
    t[j] = {v(static_cast<Eigen::Index>(2 * j)), v(static_cast<Eigen::Index>(2 * j + 1))};
  }
  return t;
}

double tracking_error(const Trajectory& reference, const Trajectory& tracked) {
  if (reference.size() != tracked.size()) throw PlannerError("tracking error needs equal-length trajectories");
  return (flatten(reference) - flatten(tracked)).norm();
}

Eigen::VectorXd sample_direction(int dim, Rng& rng) {
  if (dim < 1) throw PlannerError("direction dimension must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd u(dim);
  double n2 = 0.0;
  do {
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = gauss(rng);
    n2 = u.squaredNorm();
  } while (n2 == 0.0);
  return u / std::sqrt(n2);
}

std::optional<Eigen::VectorXd> restrict_direction(const Eigen::VectorXd& u, const PerturbationSet& s) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(u.size());
  for (const std::size_t i : s.indices) {
    for (int d = 0; d < kWaypointDim; ++d) {
      const auto slot = static_cast<Eigen::Index>(kWaypointDim * i + static_cast<std::size_t>(d));
      if (slot < u.size()) r(slot) = u(slot);
    }
  }
  const double n = r.norm();
  if (n == 0.0) return std::nullopt;
  return r / n;
}

std::vector<std::size_t> dilate_report(const std::vector<std::size_t>& report, int before, int after, std::size_t n) {
  if (report.empty()) return {};
  const auto [lo_it, hi_it] = std::minmax_element(report.begin(), report.end());
  const long lo = std::max<long>(1, static_cast<long>(*lo_it) - before);
  const long hi = std::min<long>(static_cast<long>(n) - 1, static_cast<long>(*hi_it) + after);
  std::vector<std::size_t> out;
  for (long i = lo; i <= hi; ++i) out.push_back(static_cast<std::size_t>(i));
  return out;
}

PerturbationSet build_perturbation_set(const std::vector<std::vector<std::size_t>>& reports, std::size_t n,
                                       Scheme scheme, int pad_min, int pad_max, Rng& rng) {
  if (n < 2) throw PlannerError("perturbation set needs a trajectory with at least one interior waypoint");
  PerturbationSet full;
  for (std::size_t i = 1; i < n; ++i) full.indices.push_back(i);
  if (scheme == Scheme::Full) return full;

  std::uniform_int_distribution<int> pad(pad_min, pad_max);
  std::set<std::size_t> picked;
  for (const auto& report : reports) {
    if (report.empty()) continue;
    const int before = pad(rng);
    const int after = pad(rng);
    for (const std::size_t i : dilate_report(report, before, after, n)) picked.insert(i);
  }
  if (picked.empty()) return full;
  return {std::vector<std::size_t>(picked.begin(), picked.end())};
}

Eigen::VectorXd two_point_gradient(const PerturbationSet& s, const Eigen::VectorXd& u_s, double f_plus,
                                   double f_minus, double delta) {
  const double scale = kWaypointDim * static_cast<double>(s.size()) * (f_plus - f_minus) / (2.0 * delta);
  return scale * u_s;
}

Eigen::VectorXd estimate_tracking_gradient(const Trajectory& x, const PerturbationSet& s, const Eigen::VectorXd& u_s,
                                           double delta, const MpcContext& mpc) {
  const Eigen::VectorXd flat = flatten(x);
  const Trajectory plus = unflatten(flat + delta * u_s);
  const Trajectory minus = unflatten(flat - delta * u_s);
  const double e_plus = tracking_error(plus, mpc.track(plus));
  const double e_minus = tracking_error(minus, mpc.track(minus));
  return two_point_gradient(s, u_s, e_plus, e_minus, delta);
}

std::string to_json_line(const IterateTrace& t) {
  nlohmann::json j;
  if (t.trial >= 0) j["trial"] = t.trial;
  j["epoch"] = t.epoch;
  j["iter"] = t.iter;
  j["complaints"] = t.complaints ? nlohmann::json(*t.complaints) : nlohmann::json(nullptr);
  j["tracking_error"] = t.tracking_error ? nlohmann::json(*t.tracking_error) : nlohmann::json(nullptr);
  if (t.h_plus) j["h_plus"] = *t.h_plus;
  if (t.h_minus) j["h_minus"] = *t.h_minus;
  j["s_p"] = t.s_p;
  nlohmann::json x = nlohmann::json::array();
  for (const auto& p : t.x.waypoints) x.push_back({p.x, p.y});
  j["x"] = std::move(x);
  return j.dump();
}

EpochPlanner::EpochPlanner(Trajectory x0, PlannerConfig cfg, MpcContext mpc, Rng rng, int epoch,
                           std::vector<std::vector<std::size_t>> seed_reports, TraceSink sink)
    : cfg_(cfg), mpc_(std::move(mpc)), rng_(std::move(rng)), epoch_(epoch), sink_(std::move(sink)), x_(std::move(x0)) {
  cfg_.validate();
  if (x_.size() < 3) throw PlannerError("planner needs a trajectory with at least three waypoints");
  if (cfg_.max_inner == 0) {
    m_x_ = mpc_.track(x_);
    emit(std::nullopt, tracking_error(x_, m_x_), std::nullopt, std::nullopt, {});
    finish();
    return;
  }
  if (cfg_.query_policy == QueryPolicy::CheckEachIterate) {
    m_x_ = mpc_.track(x_);
    phase_ = Phase::Eval;
  } else {
    stage_pair(seed_reports);
  }
}

void EpochPlanner::answer_eval(const FeedbackResponse& response) {
  if (phase_ != Phase::Eval) throw PlannerError("no evaluation query is pending");
  if (k_ == 0) {
    entry_evaluated_ = true;
  } else {
    ++queries_;
  }
  complaint_history_.push_back(response.complaint_count);
  last_reports_ = response.reports;
  const double e = tracking_error(x_, m_x_);
  if (response.complaint_count == 0 || k_ >= cfg_.max_inner) {
    emit(response.complaint_count, e, std::nullopt, std::nullopt, {});
    finish();
    return;
  }
  pending_complaints_ = response.complaint_count;
  pending_error_ = e;
  stage_pair(response.reports);
}

void EpochPlanner::stage_pair(const std::vector<std::vector<std::size_t>>& reports) {
  const std::size_t n = x_.size() - 1;
  s_p_ = build_perturbation_set(reports, n, cfg_.scheme, cfg_.pad_min, cfg_.pad_max, rng_);
  std::optional<Eigen::VectorXd> u;
  while (!u) u = restrict_direction(sample_direction(static_cast<int>(kWaypointDim * x_.size()), rng_), s_p_);
  u_s_ = std::move(*u);
  const Eigen::VectorXd flat = flatten(x_);
  x_plus_ = unflatten(flat + cfg_.delta * u_s_);
  x_minus_ = unflatten(flat - cfg_.delta * u_s_);
  m_plus_ = mpc_.track(x_plus_);
  m_minus_ = mpc_.track(x_minus_);
  phase_ = Phase::Pair;
}

void EpochPlanner::answer_pair(const FeedbackResponse& plus, const FeedbackResponse& minus) {
  if (phase_ != Phase::Pair) throw PlannerError("no pair query is pending");
  ++queries_;
  const double e_plus = tracking_error(x_plus_, m_plus_);
  const double e_minus = tracking_error(x_minus_, m_minus_);
  const Eigen::VectorXd grad =
      cfg_.alpha * two_point_gradient(s_p_, u_s_, plus.complaint_count, minus.complaint_count, cfg_.delta) +
      cfg_.rho * two_point_gradient(s_p_, u_s_, e_plus, e_minus, cfg_.delta);

  emit(pending_complaints_, pending_error_, plus.complaint_count, minus.complaint_count, s_p_.indices);
  pending_complaints_.reset();
  pending_error_.reset();

  x_ = unflatten(flatten(x_) - cfg_.eta * grad);
  ++k_;

  last_reports_ = plus.reports;
  last_reports_.insert(last_reports_.end(), minus.reports.begin(), minus.reports.end());

  if (cfg_.query_policy == QueryPolicy::CheckEachIterate) {
    m_x_ = mpc_.track(x_);
    phase_ = Phase::Eval;
    return;
  }
  if (k_ >= cfg_.max_inner) {
    m_x_ = mpc_.track(x_);
    emit(std::nullopt, tracking_error(x_, m_x_), std::nullopt, std::nullopt, {});
    finish();
    return;
  }
  stage_pair(last_reports_);
}

void EpochPlanner::finish() {
  phase_ = Phase::Done;
  m_plus_ = {};
  m_minus_ = {};
}

void EpochPlanner::emit(std::optional<int> complaints, std::optional<double> e, std::optional<int> hp,
                        std::optional<int> hm, const std::vector<std::size_t>& s_p) const {
  if (!sink_) return;
  IterateTrace t;
  t.epoch = epoch_;
  t.iter = k_;
  t.complaints = complaints;
  t.tracking_error = e;
  t.h_plus = hp;
  t.h_minus = hm;
  t.s_p = s_p;
  t.x = x_;
  sink_(t);
}

EpochResult EpochPlanner::result() const {
  if (phase_ != Phase::Done) throw PlannerError("epoch has not finished");
  EpochResult r;
  r.final_trajectory = m_x_;
  r.final_reference = x_;
  r.iterations_used = k_;
  r.queries_used = queries_;
  r.entry_evaluated = entry_evaluated_;
  r.complaint_history = complaint_history_;
  r.last_reports = last_reports_;
  return r;
}

EpochResult plan_epoch(const Trajectory& x0, FeedbackSource& feedback, const PlannerConfig& cfg,
                       const MpcContext& mpc, Rng& rng, int epoch, std::vector<std::vector<std::size_t>> seed_reports,
                       TraceSink sink) {
  const bool reports = cfg.scheme == Scheme::Local;
  EpochPlanner planner(x0, cfg, mpc, Rng(rng()), epoch, std::move(seed_reports), std::move(sink));
  while (planner.phase() != EpochPlanner::Phase::Done) {
    if (planner.phase() == EpochPlanner::Phase::Eval) {
      planner.answer_eval(feedback.query(planner.tracked(), reports));
    } else {
      const FeedbackResponse plus = feedback.query(planner.tracked_plus(), reports);
      const FeedbackResponse minus = feedback.query(planner.tracked_minus(), reports);
      planner.answer_pair(plus, minus);
    }
  }
  return planner.result();
}

}  // namespace socialplan
