#ifndef TUMBLE_EVALUATION_HPP
#define TUMBLE_EVALUATION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include <json.hpp>

#include "tumble/motion.hpp"
#include "tumble/rigid_body.hpp"

namespace tumble {

inline double rmse(const std::vector<double>& estimates, const std::vector<double>& truth)
{
  require(!estimates.empty(), ErrorKind::EmptyInput, "rmse of an empty series");
  require(estimates.size() == truth.size(), ErrorKind::InvalidArgument, "rmse series differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double d = estimates[i] - truth[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(estimates.size()));
}

/// Percent.
inline double period_relative_error(double fit_period, double true_period)
{
  require(std::isfinite(true_period) && true_period > 0.0, ErrorKind::InvalidArgument, "true period must be positive");
  return 100.0 * std::abs(fit_period - true_period) / true_period;
}

/**
 * @brief Continuous ground truth from sampled simulator states.
 *
 * Between samples the state is re-integrated from the preceding sample with
 * the simulator's own integrator and step, so any time is evaluable at the
 * simulator's accuracy. The simulated SfM world coincides with the body frame.
 */
class TruthModel
{
public:
  TruthModel(std::vector<RigidBodyState> states, InertiaModel inertia, double integrator_dt, Vec3 camera_position)
      : states_(std::move(states)), inertia_(inertia), dt_(integrator_dt), camera_(camera_position)
  {
    require(!states_.empty(), ErrorKind::EmptyInput, "truth has no states");
    require(std::isfinite(dt_) && dt_ > 0.0, ErrorKind::InvalidArgument, "integrator_dt must be positive");
    for (std::size_t i = 1; i < states_.size(); ++i) {
      require(states_[i].time > states_[i - 1].time, ErrorKind::InvalidArgument, "truth times must increase");
    }
  }

  RigidBodyState state_at(double t) const
  {
    require(t >= states_.front().time - 1e-9 && t <= states_.back().time + 1e-9, ErrorKind::InvalidArgument,
            "time " + text::fmt9(t) + " s is outside the truth span");
    auto it = std::upper_bound(states_.begin(), states_.end(), t,
                               [](double v, const RigidBodyState& s) { return v < s.time; });
    if (it != states_.begin()) --it;
    if (it->time == t) return *it;
    return propagate(*it, inertia_, t - it->time, dt_);
  }

  /// Body-frame angular velocity, rad/s.
  Vec3 omega_at(double t) const { return state_at(t).omega; }

  /// Rotation vector of the body attitude change over [t0, t1], body axes, per second.
  Vec3 mean_omega(double t0, double t1) const
  {
    const Rotation a0 = state_at(t0).attitude;
    const Rotation a1 = state_at(t1).attitude;
    return so3_log(a0.inverse() * a1) / (t1 - t0);
  }

  double range_at(double t) const { return (camera_ - state_at(t).position).norm(); }

  double range_rate_at(double t) const
  {
    const auto s = state_at(t);
    const Vec3 los = camera_ - s.position;
    return -los.dot(s.velocity) / los.norm();
  }

  const std::vector<RigidBodyState>& states() const { return states_; }

private:
  std::vector<RigidBodyState> states_;
  InertiaModel inertia_;
  double dt_;
  Vec3 camera_;
};

struct PeriodComparison
{
  double estimate_s = 0.0;
  double truth_s = 0.0;
  double relative_error_pct = 0.0;
};

struct EvalReport
{
  std::size_t intervals = 0;
  /// Against the truth attitude change over each interval.
  std::array<double, 3> omega_rmse_deg_s{};
  /// Against the instantaneous truth rate at each interval midpoint.
  std::array<double, 3> omega_midpoint_rmse_deg_s{};
  double radial_speed_rmse_m_s = 0.0;
  double mean_linear_speed_estimate_m_s = 0.0;
  double mean_linear_speed_truth_m_s = 0.0;
  double mean_angular_speed_estimate_deg_s = 0.0;
  double mean_angular_speed_truth_deg_s = 0.0;
  std::array<std::optional<PeriodComparison>, 3> period;
  double runtime_s = 0.0;  ///< wall clock, kept out of the JSON so reports stay reproducible

  double linear_speed_relative_error_pct() const
  {
    return 100.0 * std::abs(mean_linear_speed_estimate_m_s - mean_linear_speed_truth_m_s) / mean_linear_speed_truth_m_s;
  }
  double angular_speed_relative_error_pct() const
  {
    return 100.0 * std::abs(mean_angular_speed_estimate_deg_s - mean_angular_speed_truth_deg_s) /
           mean_angular_speed_truth_deg_s;
  }
};

/**
 * @brief Compares a motion estimate against simulator truth.
 *
 * Truth vectors are expressed along the estimate's frame axes. Linear truth
 * is the range change of each interval divided by its length; mean speeds
 * are |mean velocity| and |mean omega| over all intervals. Periods come from
 * sine fits on the estimate and on truth sampled at the same midpoints.
 */
inline EvalReport evaluate(const MotionEstimate& est, const TruthModel& truth)
{
  require(!est.records.empty(), ErrorKind::EmptyInput, "motion estimate has no records");
  EvalReport report;
  report.intervals = est.records.size();
  std::array<std::vector<double>, 3> w_est, w_inc, w_mid;
  std::vector<double> v_est, v_true;
  Vec3 sum_est = Vec3::Zero(), sum_true = Vec3::Zero();
  double sum_speed_est = 0.0, sum_speed_true = 0.0;
  for (const auto& r : est.records) {
    require(r.t_end > r.t_start, ErrorKind::InvalidArgument, "motion record without interval bounds");
    const Vec3 inc = est.frame.to_target(truth.mean_omega(r.t_start, r.t_end));
    const Vec3 mid = est.frame.to_target(truth.omega_at(r.t_mid));
    for (std::size_t k = 0; k < 3; ++k) {
      const auto e = static_cast<Eigen::Index>(k);
      w_est[k].push_back(r.omega[e] * kRadToDeg);
      w_inc[k].push_back(inc[e] * kRadToDeg);
      w_mid[k].push_back(mid[e] * kRadToDeg);
    }
    const double range_rate = (truth.range_at(r.t_end) - truth.range_at(r.t_start)) / (r.t_end - r.t_start);
    v_est.push_back(r.radial_speed);
    v_true.push_back(range_rate);
    sum_speed_est += r.radial_speed;
    sum_speed_true += range_rate;
    sum_est += r.omega;
    sum_true += inc;
  }
  const double n = static_cast<double>(est.records.size());
  for (std::size_t k = 0; k < 3; ++k) {
    report.omega_rmse_deg_s[k] = rmse(w_est[k], w_inc[k]);
    report.omega_midpoint_rmse_deg_s[k] = rmse(w_est[k], w_mid[k]);
  }
  report.radial_speed_rmse_m_s = rmse(v_est, v_true);
  report.mean_linear_speed_estimate_m_s = std::abs(sum_speed_est / n);
  report.mean_linear_speed_truth_m_s = std::abs(sum_speed_true / n);
  report.mean_angular_speed_estimate_deg_s = sum_est.norm() / n * kRadToDeg;
  report.mean_angular_speed_truth_deg_s = sum_true.norm() / n * kRadToDeg;

  if (est.records.size() >= 8) {
    const auto t = est.mid_times();
    for (std::size_t k = 0; k < 3; ++k) {
      if (!est.omega_fits[k]) continue;
      std::optional<SineFit> truth_fit;
      try {
        truth_fit = fit_sine(t, w_mid[k]);
      } catch (const Error&) {
        continue;
      }
      PeriodComparison pc;
      pc.estimate_s = period_of(*est.omega_fits[k]);
      pc.truth_s = period_of(*truth_fit);
      pc.relative_error_pct = period_relative_error(pc.estimate_s, pc.truth_s);
      report.period[k] = pc;
    }
  }
  return report;
}

inline nlohmann::json eval_report_to_json(const EvalReport& r)
{
  const char* axes[] = {"x", "y", "z"};
  nlohmann::json j;
  j["intervals"] = r.intervals;
  for (std::size_t k = 0; k < 3; ++k) {
    j["omega_rmse_deg_s"][axes[k]] = r.omega_rmse_deg_s[k];
    j["omega_midpoint_rmse_deg_s"][axes[k]] = r.omega_midpoint_rmse_deg_s[k];
    if (r.period[k]) {
      j["period"][axes[k]] = {{"estimate_s", r.period[k]->estimate_s},
                              {"truth_s", r.period[k]->truth_s},
                              {"relative_error_pct", r.period[k]->relative_error_pct}};
    } else {
      j["period"][axes[k]] = nullptr;
    }
  }
  j["radial_speed_rmse_m_s"] = r.radial_speed_rmse_m_s;
  j["mean_linear_speed_m_s"] = {{"estimate", r.mean_linear_speed_estimate_m_s},
                                {"truth", r.mean_linear_speed_truth_m_s}};
  if (r.mean_linear_speed_truth_m_s > 0.0) {
    j["mean_linear_speed_m_s"]["relative_error_pct"] = r.linear_speed_relative_error_pct();
  }
  j["mean_angular_speed_deg_s"] = {{"estimate", r.mean_angular_speed_estimate_deg_s},
                                   {"truth", r.mean_angular_speed_truth_deg_s}};
  if (r.mean_angular_speed_truth_deg_s > 0.0) {
    j["mean_angular_speed_deg_s"]["relative_error_pct"] = r.angular_speed_relative_error_pct();
  }
  return j;
}

}  // namespace tumble

#endif  // TUMBLE_EVALUATION_HPP
