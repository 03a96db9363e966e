#pragma once

// Trajectory diagnostics shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "dynres/semiclassical.hpp"

namespace analysis {

using dynres::cplx;

/// Instantaneous centre of the oscillator's circular motion: with a frozen
/// radiation-pressure force db/dt = -i omega_m (b - c), so c = b - i b'/omega_m.
inline cplx rotation_centre(const dynres::SystemParams& p, const dynres::TrajectoryPoint& q) {
  const dynres::Drift d = dynres::drift(q.t, q.b, q.T, p);
  return q.b.b - cplx(0.0, 1.0) * d.db_dt / p.omega_m;
}

struct Arcs {
  bool two_arcs = false;
  cplx centre_before{};
  cplx centre_after{};
  double max_br_before_over_b0 = 0.0;
};

/// Splits a trajectory at the first transfer (n2/n_bar crossing 1/2) and
/// reports the mean rotation centre on each side, using only points where the
/// populations are essentially frozen (n2/n_bar < lo or > hi).
inline Arcs phase_portrait(const dynres::Trajectory& tr, double lo = 0.01, double hi = 0.99) {
  const auto& p = tr.params;
  Arcs a;
  cplx sum_before = 0.0, sum_after = 0.0;
  std::size_t nb = 0, na = 0;
  bool transferred = false;
  for (const auto& q : tr.points) {
    const double f = q.n2 / p.n_bar;
    if (!transferred && f >= 0.5) transferred = true;
    if (!transferred) a.max_br_before_over_b0 = std::max(a.max_br_before_over_b0, q.b.b.real() / p.b0);
    if (!transferred && f < lo) {
      sum_before += rotation_centre(p, q);
      ++nb;
    } else if (transferred && f > hi) {
      sum_after += rotation_centre(p, q);
      ++na;
      if (na > 200) break;  // first post-transfer arc only
    }
  }
  if (nb > 0) a.centre_before = sum_before / double(nb);
  if (na > 0) a.centre_after = sum_after / double(na);
  const double b_eq = p.kappa0 * p.n_bar / p.omega_m;
  a.two_arcs = nb > 0 && na > 0 && std::abs(a.centre_before - a.centre_after) > b_eq;
  return a;
}

/// Spacing of adjacent local maxima above `floor`; returns the median.
inline double median_peak_spacing(const std::vector<double>& t, const std::vector<double>& f, double floor) {
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < f.size(); ++i)
    if (f[i] > floor && f[i] >= f[i - 1] && f[i] > f[i + 1]) peaks.push_back(t[i]);
  std::vector<double> gaps;
  for (std::size_t i = 1; i < peaks.size(); ++i) gaps.push_back(peaks[i] - peaks[i - 1]);
  if (gaps.empty()) return 0.0;
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  return gaps[gaps.size() / 2];
}

}  // namespace analysis
