#ifndef TUMBLE_SINE_FIT_HPP
#define TUMBLE_SINE_FIT_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "tumble/geom.hpp"

namespace tumble {

/// y(t) = amplitude * sin(angular_frequency * t + phase) + offset
struct SineFit
{
  double amplitude = 0.0;
  double angular_frequency = 0.0;  ///< rad/s
  double phase = 0.0;              ///< rad, in (-pi, pi]
  double offset = 0.0;
  double rmse_residual = 0.0;

  double operator()(double t) const { return amplitude * std::sin(angular_frequency * t + phase) + offset; }
};

inline double period_of(const SineFit& fit) { return 2.0 * kPi / fit.angular_frequency; }

namespace detail {

struct LinearSine
{
  double a_sin, a_cos, offset, rmse;
};

/// Linear least squares for y ~ a sin(w t) + b cos(w t) + c at fixed w.
inline LinearSine solve_linear_sine(std::span<const double> t, std::span<const double> y, double w)
{
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wt = w * t[static_cast<std::size_t>(i)];
    A(i, 0) = std::sin(wt);
    A(i, 1) = std::cos(wt);
    A(i, 2) = 1.0;
    b[i] = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d x = A.colPivHouseholderQr().solve(b);
  const double rmse = std::sqrt((A * x - b).squaredNorm() / static_cast<double>(n));
  return {x[0], x[1], x[2], rmse};
}

}  // namespace detail

/**
 * @brief Fits a single sinusoid plus offset to samples.
 *
 * 1. Frequency seed: peak of the discrete spectrum of the mean-removed
 *    series, scanned on a grid 8x finer than 1/T.
 * 2. For a trial frequency, amplitude/phase/offset come from linear least
 *    squares on (sin, cos, 1).
 * 3. The residual is scanned around the seed and the frequency refined by
 *    golden-section search.
 *
 * Needs >= 8 samples at increasing times covering >= 1.5 periods; throws
 * NoPeriodicity for a flat series or insufficient coverage.
 */
inline SineFit fit_sine(std::span<const double> times, std::span<const double> values)
{
  require(times.size() == values.size(), ErrorKind::InvalidArgument, "times and values differ in length");
  require(times.size() >= 8, ErrorKind::InvalidArgument, "sine fit needs at least 8 samples");
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(std::isfinite(times[i]) && std::isfinite(values[i]), ErrorKind::InvalidArgument, "non-finite sample");
    if (i > 0) require(times[i] > times[i - 1], ErrorKind::InvalidArgument, "sample times must increase");
  }
  const std::size_t n = times.size();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double variance = 0.0;
  for (double v : values) variance += (v - mean) * (v - mean);
  variance /= static_cast<double>(n);
  if (variance < 1e-15) throw Error(ErrorKind::NoPeriodicity, "signal is flat (variance below 1e-15)");

  const double span = times.back() - times.front();
  std::vector<double> gaps(n - 1);
  for (std::size_t i = 1; i < n; ++i) gaps[i - 1] = times[i] - times[i - 1];
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
  const double median_gap = gaps[gaps.size() / 2];

  // (1) spectrum peak, frequencies in cycles per second
  const double f_lo = 1.0 / span;
  const double f_hi = 0.5 / median_gap;
  const double df = 1.0 / (8.0 * span);
  double f_peak = f_lo;
  double best_power = -1.0;
  for (double f = f_lo; f <= f_hi; f += df) {
    double re = 0.0, im = 0.0;
    const double w = 2.0 * kPi * f;
    for (std::size_t i = 0; i < n; ++i) {
      re += (values[i] - mean) * std::cos(w * times[i]);
      im += (values[i] - mean) * std::sin(w * times[i]);
    }
    const double power = re * re + im * im;
    if (power > best_power) {
      best_power = power;
      f_peak = f;
    }
  }

  // (2)+(3) residual scan within one spectral bin, then golden section
  const auto residual = [&](double w) { return detail::solve_linear_sine(times, values, w).rmse; };
  const double w_peak = 2.0 * kPi * f_peak;
  const double half_width = 2.0 * kPi / span;
  constexpr int kScan = 40;
  const double step = 2.0 * half_width / kScan;
  double w_best = w_peak;
  double r_best = residual(w_peak);
  for (int k = 0; k <= kScan; ++k) {
    const double w = w_peak - half_width + step * k;
    if (w <= 0.0) continue;
    const double r = residual(w);
    if (r < r_best) {
      r_best = r;
      w_best = w;
    }
  }
  double a = std::max(w_best - step, 1e-3 * step), b = w_best + step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double rc = residual(c), rd = residual(d);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * b; ++it) {
    if (rc < rd) {
      b = d;
      d = c;
      rd = rc;
      c = b - inv_phi * (b - a);
      rc = residual(c);
    } else {
      a = c;
      c = d;
      rc = rd;
      d = a + inv_phi * (b - a);
      rd = residual(d);
    }
  }
  double w = 0.5 * (a + b);
  if (r_best < residual(w)) w = w_best;

  const auto lin = detail::solve_linear_sine(times, values, w);
  SineFit fit;
  fit.angular_frequency = w;
  fit.amplitude = std::hypot(lin.a_sin, lin.a_cos);
  fit.phase = fit.amplitude > 0.0 ? std::atan2(lin.a_cos, lin.a_sin) : 0.0;
  if (fit.phase <= -kPi) fit.phase = kPi;
  fit.offset = lin.offset;
  fit.rmse_residual = lin.rmse;
  if (span * w / (2.0 * kPi) < 1.5) {
    throw Error(ErrorKind::NoPeriodicity, "fitted period is not covered 1.5 times by the samples");
  }
  return fit;
}

inline SineFit fit_sine(const std::vector<double>& times, const std::vector<double>& values)
{
  return fit_sine(std::span<const double>(times), std::span<const double>(values));
}

}  // namespace tumble

#endif  // TUMBLE_SINE_FIT_HPP
