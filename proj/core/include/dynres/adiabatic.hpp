#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "dynres/params.hpp"
#include "dynres/semiclassical.hpp"

namespace dynres {

/// Instantaneous eigen-frame of M_a = [[omega - i gamma1, g], [g, -omega - i gamma2]].
/// Eigenvectors are the columns of W = [[c, -s], [s, c]].
struct EigenFrame {
  double omega = 0.0;
  double g = 0.0;
  double epsilon = 0.0;  ///< sqrt(omega^2 + g^2)
  double s = 0.0;
  double c = 0.0;
  cplx lambda_plus{};
  cplx lambda_minus{};
};

/// s, c are the non-negative roots sqrt((1 -/+ omega/epsilon)/2). Requires g > 0.
EigenFrame eigenframe(double omega, double g, double gamma1 = 0.0, double gamma2 = 0.0);

/// max |W^-1 M_a W - diag(lambda+, lambda-)|. Requires gamma1 = gamma2
/// (taken from the frame's eigenvalues).
double verify_diagonalization(const EigenFrame& frame);

/// Lossless adiabatic transmittance
///   T11 = c c0 e^{-i xi} + s s0 e^{i xi},   T21 = s c0 e^{-i xi} - c s0 e^{i xi},
///   T22 = T11*, T12 = -T21*,
/// multiplied by `decay` (e^{-gamma t} for equal damping).
Transmittance closed_form_T(const EigenFrame& frame0, const EigenFrame& frame_t, double xi,
                            double decay = 1.0);

/// sqrt(s^2 c0^2 + c^2 s0^2 - 2 s c s0 c0 cos 2xi).
double t21_magnitude(const EigenFrame& frame0, const EigenFrame& frame_t, double xi);

/// Far-detuned approximation |T21| ~ 1 - (g/delta_omega)^2 cos^2(xi) / 2, i.e.
/// |T21|^2 ~ 1 - (g/delta_omega)^2 cos^2(xi), valid after transfer.
double t21_magnitude_far_detuned(double g_over_dw, double xi);

/// Tangent form of the phase, tan(theta) = (c s0 + s c0)/(c s0 - s c0) tan(xi).
/// Returns the residual |sin(theta - theta_tan)|, zero when theta agrees modulo pi.
double theta_tangent_residual(const EigenFrame& frame0, const EigenFrame& frame_t, double xi,
                              double theta);

/// Continuous lift of arg T21 along a sequence of (frame, xi) samples.
/// Within a branch (s c0 > c s0 or s c0 < c s0) the lift is exact for any
/// spacing; a branch change needs Delta xi < pi/2 across it, otherwise
/// SamplingError.
class ThetaLift {
 public:
  explicit ThetaLift(const EigenFrame& frame0) : f0_(frame0) {}

  /// Lift at the next sample; xi must not decrease.
  double next(const EigenFrame& frame_t, double xi);

  /// Crossing of the branch boundary at a known xi (when the caller can
  /// locate it more precisely than the sample spacing allows).
  void cross_at(double xi_switch, int new_branch);

  /// +1 when s c0 >= c s0 at the last sample, -1 otherwise, 0 before any sample.
  int branch() const { return branch_; }
  static int branch_of(const EigenFrame& f0, const EigenFrame& ft);

 private:
  double raw(int branch, double a, double b, double xi) const;

  EigenFrame f0_;
  int branch_ = 0;
  double offset_ = 0.0;
  double last_xi_ = 0.0;
  double last_theta_ = 0.0;
  double last_gap_ = 0.0;  ///< s c0 - c s0 at the last sample
};

/// theta(t) over a sampled series; throws SamplingError when xi decreases or
/// a branch change is straddled by Delta xi >= pi/2.
std::vector<double> theta_phase(const EigenFrame& frame0, const std::vector<EigenFrame>& frames,
                                const std::vector<double>& xi_series);

/// Reduced self-consistent oscillator equation in the adiabatic limit:
///   db/dt = -i (omega_m - i gamma_m) b + i kappa0 (omega(b)/eps(b)) n_bar (omega0/eps0).
cplx adiabatic_oscillator_rhs(cplx b, const SystemParams& p, const EigenFrame& frame0);

struct AdiabaticPoint {
  double t = 0.0;  ///< 1/g units
  cplx b{};
  double omega = 0.0;
  double xi = 0.0;
  double theta = 0.0;
  Transmittance T;
};

struct AdiabaticSolution {
  SystemParams params;
  std::vector<AdiabaticPoint> points;
  IntegratorStats stats;
};

/// Integrates the reduced oscillator equation with xi as a quadrature state
/// and assembles the closed-form transmittance. Rejects gamma1 != gamma2.
/// Sampling follows the same controls as the semiclassical integrator.
AdiabaticSolution adiabatic_trajectory(const SystemParams& p, double t_end,
                                       const IntegratorControls& ctrl = {});

/// Semiclassical schema plus theta and abs_T21_closed.
void write_adiabatic_csv(std::ostream& os, const AdiabaticSolution& sol);

}  // namespace dynres
