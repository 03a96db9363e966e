#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

#include "dynres/errors.hpp"
#include "dynres/params.hpp"

namespace dynres {

/// 2x2 transmittance: a(t) = T(t) a(0) for the cavity annihilation operators.
struct Transmittance {
  cplx t11{1.0, 0.0};
  cplx t12{0.0, 0.0};
  cplx t21{0.0, 0.0};
  cplx t22{1.0, 0.0};

  static Transmittance identity() { return {}; }

  /// max_ij |(T^dagger T - I)_ij|
  double unitarity_defect() const;
};

/// Mean mechanical amplitude <b>, zero-point units.
struct OscillatorState {
  cplx b{0.0, 0.0};
};

/// Full semiclassical state: oscillator, transmittance and the accumulated
/// eigen-phase xi(t) = integral of sqrt(omega^2 + g^2).
struct SemiclassicalState {
  OscillatorState osc;
  Transmittance T;
  double xi = 0.0;
};

struct Populations {
  double n1 = 0.0;
  double n2 = 0.0;
};

/// n1 = n_bar |T11|^2, n2 = n_bar |T21|^2 (all photons start in cavity 1).
Populations populations(const Transmittance& T, double n_bar);

/// Instantaneous detuning omega(b) = 2 kappa0 b0 (1 - Re b / b0).
double detuning(const SystemParams& p, cplx b);

struct Drift {
  cplx db_dt;
  Transmittance dT_dt;
};

/// Right-hand side of the coupled mean-field equations
///   i dT/dt = M_a(t) T,  M_a = [[omega - i gamma1, g], [g, -omega - i gamma2]]
///   i db/dt = (omega_m - i gamma_m) b - kappa0 <dn>,  <dn> = n_bar (|T11|^2 - |T21|^2).
Drift drift(double t, const OscillatorState& b, const Transmittance& T, const SystemParams& p);

struct IntegratorControls {
  double rtol = 1e-14;
  double atol = 1e-16;
  /// Sampling interval in the rate unit's time (1/g). Zero: sample_count
  /// evenly spaced samples across the window.
  double sample_dt = 0.0;
  std::size_t sample_count = 2001;
  double window_begin = 0.0;
  double window_end = std::numeric_limits<double>::infinity();
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 200'000'000;
  /// Contract on max ||T^dagger T - I|| for lossless runs; violated -> IntegrationError.
  double unitarity_tol = 1e-9;
};

struct TrajectoryPoint {
  double t = 0.0;  ///< in 1/g units; see time_unit()
  OscillatorState b;
  Transmittance T;
  double omega = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  double xi = 0.0;
  double theta = 0.0;  ///< unwrapped arg T21
};

struct IntegratorStats {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evals = 0;
  double rtol = 0.0;
  double atol = 0.0;
  double max_unitarity_defect = 0.0;
  double max_photon_defect = 0.0;  ///< | |T11|^2 + |T21|^2 - 1 |
};

struct Trajectory {
  SystemParams params;
  std::vector<TrajectoryPoint> points;
  IntegratorStats stats;
};

class IntegrationError : public NumericError {
 public:
  IntegrationError(const std::string& what, Trajectory partial)
      : NumericError(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

/// 2 pi / g, the time unit used in every report (2 pi when g = 0).
double time_unit(const SystemParams& p);

using TrajectoryObserver = std::function<void(const TrajectoryPoint&)>;

/// Integrates from b(0) = 0, T(0) = I to t_end, streaming samples on the
/// controls' grid to `observe` without storing them.
IntegratorStats integrate(const SystemParams& p, double t_end, const IntegratorControls& ctrl,
                          const TrajectoryObserver& observe);

/// Same, collecting the samples into a Trajectory.
Trajectory integrate(const SystemParams& p, double t_end, const IntegratorControls& ctrl = {});

/// Propagates an arbitrary state from t0 to t1 (t1 < t0 runs backwards).
SemiclassicalState propagate(const SystemParams& p, const SemiclassicalState& start, double t0,
                             double t1, const IntegratorControls& ctrl = {});

/// Times at which Re b(t) - b0 changes sign, refined on a cubic Hermite
/// interpolant built from the sampled states and their drift.
std::vector<double> resonance_crossings(const Trajectory& traj);

/// CSV with columns t_over_2pi_g, re_b_over_b0, im_b_over_b0, omega_over_dw,
/// n1_over_nbar, n2_over_nbar, abs_T21, arg_T21, xi.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace dynres
