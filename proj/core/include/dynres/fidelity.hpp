#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "dynres/adiabatic.hpp"
#include "dynres/input_state.hpp"
#include "dynres/semiclassical.hpp"

namespace dynres {

/// Throughout, theta is the continuous lift of arg T21 (T21 = |T21| e^{i theta}).

/// Fidelity against the fixed target (input state relocated to cavity 2) and
/// the moving target (same, rotated by the accumulated phase theta).
struct FidelityPair {
  double fixed = 0.0;
  double moving = 0.0;
};

/// |T21|^{2n} for both targets.
FidelityPair fidelity_fock(cplx t21, int n);

/// |(e^{|a|^2 T21} +/- e^{-|a|^2 T21}) / (e^{|a|^2} +/- e^{-|a|^2})|^2, with
/// |T21| in place of T21 for the moving target. Evaluated in log form.
FidelityPair fidelity_cat(cplx t21, double theta, cplx alpha, Parity parity);

/// Gaussian parameters of the cavity-2 state and the scalar prefactor C.
struct DsTransform {
  cplx alpha_p{};  ///< T21 alpha + beta'
  cplx eta_p{};    ///< r' e^{i (phi_eta + 2 theta)}
  cplx beta{};
  cplx beta_p{};
  double C = 1.0;
  double log_C = 0.0;
};

/// r' = atanh(|T21|^2 tanh r), phi' = phi_eta + 2 theta,
/// beta = e^{i phi_eta} alpha* T21 (1 - |T21|^2) tanh r cosh r',
/// beta' = beta cosh r' - beta* e^{i phi'} sinh r'.
DsTransform ds_transform(cplx t21, double theta, cplx alpha, cplx eta);

/// <alpha1, eta1 | alpha2, eta2> for D(alpha) S(eta)|0>.
cplx ds_inner_product(cplx alpha1, cplx eta1, cplx alpha2, cplx eta2);

/// log |<alpha1, eta1 | alpha2, eta2>|^2, finite where the overlap underflows.
double ds_log_overlap2(cplx alpha1, cplx eta1, cplx alpha2, cplx eta2);

/// F_fix = C |<alpha, eta | alpha', eta'>|^2; moving target (alpha e^{i theta}, eta e^{2 i theta}).
FidelityPair fidelity_ds(cplx t21, double theta, cplx alpha, cplx eta);

/// exp(-2|a|^2 (1 - |T21| cos theta)) and exp(-2|a|^2 (1 - |T21|)).
FidelityPair fidelity_coherent(cplx t21, double theta, cplx alpha);

/// Family dispatch.
FidelityPair fidelity(const InputState& state, cplx t21, double theta);

struct FidelityTrace {
  double time_unit = 1.0;  ///< 2 pi / g, for reporting
  std::vector<double> t;   ///< 1/g units
  std::vector<double> abs_t21;
  std::vector<double> theta;
  std::vector<double> f_fix;
  std::vector<double> f_mov;

  std::size_t size() const { return t.size(); }
};

FidelityTrace fidelity_trace(const Trajectory& traj, const InputState& state);
FidelityTrace fidelity_trace(const AdiabaticSolution& sol, const InputState& state);

/// Columns t_over_2pi_g, abs_T21, theta, F_fix, F_mov.
void write_fidelity_csv(std::ostream& os, const FidelityTrace& trace);

}  // namespace dynres
