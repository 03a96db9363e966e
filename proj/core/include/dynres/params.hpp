#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dynres/input_state.hpp"

namespace dynres {

/// Physical rates of the two-cavity / one-mirror system. Rates are angular
/// frequencies in a common unit (g = 1 by convention); b0 is measured in
/// mechanical zero-point units.
struct SystemParams {
  double g = 1.0;            ///< inter-cavity optical coupling
  double delta_omega = 0.0;  ///< half splitting (omega1 - omega2) / 2
  double omega_m = 0.0;      ///< mechanical frequency
  double kappa0 = 0.0;       ///< single-photon optomechanical coupling
  double b0 = 0.0;           ///< equilibrium offset of the mirror
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma_m = 0.0;
  double n_bar = 0.0;        ///< mean photon number initially in cavity 1

  /// Full invariant check: strictly positive rates, non-negative losses and
  /// delta_omega = 2 kappa0 b0 to 1e-9 relative. Throws ConfigError.
  void validate() const;

  /// Weaker check used by the propagators, which also accept the degenerate
  /// limits g = 0 and kappa0 = 0. Throws ConfigError.
  void check_simulable() const;

  bool lossless() const { return gamma1 == 0.0 && gamma2 == 0.0 && gamma_m == 0.0; }
};

/// n_thr = omega_m b0 / (2 kappa0): photons needed to push the mirror to resonance.
double n_threshold(const SystemParams& p);

/// Builds parameters from the dimensionless ratios (g/dw, omega_m/g,
/// n_bar/n_thr) and n_bar. The (kappa0, b0) split satisfies delta_omega = 2 kappa0 b0 and
/// n_thr = n_bar / n_ratio simultaneously.
SystemParams from_dimensionless(double g, double ratio_g_over_dw, double ratio_wm_over_g,
                                double n_ratio, double n_bar);

/// Adiabaticity parameter nu ~ (1/8) (n_bar/n_thr) (omega_m delta_omega / g^2).
double adiabaticity_nu(const SystemParams& p);

/// High-amplitude-limit metric of a displaced squeezed state: relative
/// photon-number fluctuation. Equals 1/|alpha| when eta = 0.
double hal_displaced_squeezed(cplx alpha, cplx eta);

/// Both sides of the cat-state high-amplitude condition lhs << rhs.
struct CatHal {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio() const;
};
CatHal hal_cat(cplx alpha, Parity parity);

/// Fock states have no number fluctuation; n = 0 is rejected (undefined ratio).
double hal_fock(int n);

/// State-dispatched high-amplitude metric (ratio form for cats).
double hal_metric(const InputState& state);

/// Thresholds standing in for "much less than".
struct Thresholds {
  double weak_coupling = 0.1;   ///< g / delta_omega
  double slow_mechanics = 0.1;  ///< omega_m / g
  double adiabaticity = 0.1;    ///< nu
  double hal = 0.1;             ///< state-dependent metric
  double min_n_ratio = 1.0;     ///< n_bar / n_thr must exceed this
};

struct RegimeFlags {
  bool weak_coupling = false;
  bool slow_mechanics = false;
  bool adiabatic = false;
  bool above_threshold = false;
  bool high_amplitude = false;

  bool all() const {
    return weak_coupling && slow_mechanics && adiabatic && above_threshold && high_amplitude;
  }
};

struct RegimeReport {
  double weak_coupling_ratio = 0.0;
  double slow_mech_ratio = 0.0;
  double nu = 0.0;
  double n_ratio = 0.0;
  std::optional<double> hal_metric;
  Thresholds thresholds;
  RegimeFlags pass_flags;
  std::vector<std::string> failed;    ///< names of failed conditions
  std::vector<std::string> warnings;
};

RegimeReport regime_report(const SystemParams& p, const InputState& state,
                           const Thresholds& thresholds = {});

/// Parameters plus thresholds as loaded from a JSON "params" block with keys
/// g, ratio_g_over_dw, ratio_wm_over_g, n_ratio, n_bar, gammas, thresholds.
struct ParamsConfig {
  SystemParams params;
  Thresholds thresholds;
};

ParamsConfig params_from_json(const std::string& json_text);

}  // namespace dynres
