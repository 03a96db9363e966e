#include "dynres/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "dynres/csv.hpp"
#include "dynres/errors.hpp"

namespace dynres {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// log |cosh z|^2 (odd = false) or log |sinh z|^2 (odd = true), z = x + i y.
// |cosh z|^2 = sinh^2 x + cos^2 y, |sinh z|^2 = sinh^2 x + sin^2 y.
double log_abs2_cosh_sinh(cplx z, bool odd) {
  const double x = std::abs(z.real());
  const double y = z.imag();
  const double trig = odd ? std::sin(y) : std::cos(y);
  if (x < 20.0) {
    const double sh = std::sinh(x);
    const double v = sh * sh + trig * trig;
    return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  }
  // 4 e^{-2x} |.|^2 = 1 + e^{-2x} (4 trig^2 - 2) + e^{-4x}
  const double q = std::exp(-2.0 * x);
  return 2.0 * x - 2.0 * std::numbers::ln2 + std::log1p(q * (4.0 * trig * trig - 2.0) + q * q);
}

double cat_value(cplx t, double a2, bool odd) {
  const double den = log_abs2_cosh_sinh(cplx(a2, 0.0), odd);
  const double num = log_abs2_cosh_sinh(a2 * t, odd);
  return clamp01(std::exp(num - den));
}

void check_t21(cplx t21, const char* who) {
  if (!std::isfinite(t21.real()) || !std::isfinite(t21.imag()))
    throw NumericError(std::string(who) + ": non-finite T21");
  if (std::abs(t21) > 1.0 + 1e-9) throw NumericError(std::string(who) + ": |T21| > 1");
}

}  // namespace

FidelityPair fidelity_fock(cplx t21, int n) {
  if (n < 0) throw ConfigError("fidelity_fock: n must be >= 0");
  if (n == 0) return {1.0, 1.0};
  const double f = clamp01(std::pow(std::norm(t21), n));
  return {f, f};
}

FidelityPair fidelity_cat(cplx t21, double theta, cplx alpha, Parity parity) {
  (void)theta;  // the moving target removes arg T21 entirely
  const double a2 = std::norm(alpha);
  const bool odd = parity == Parity::odd;
  if (odd && !(a2 > 0.0)) throw ConfigError("fidelity_cat: odd cat requires alpha != 0");
  if (a2 == 0.0) return {1.0, 1.0};
  return {cat_value(t21, a2, odd), cat_value(cplx(std::abs(t21), 0.0), a2, odd)};
}

DsTransform ds_transform(cplx t21, double theta, cplx alpha, cplx eta) {
  const double r = std::abs(eta);
  const double phi = std::arg(eta);
  const double A2 = std::min(1.0, std::norm(t21));
  const double om = 1.0 - A2;
  const double th = std::tanh(r);
  const double rp = std::atanh(A2 * th);
  const double chp = std::cosh(rp);
  const double shp = std::sinh(rp);
  const double php = phi + 2.0 * theta;

  DsTransform out;
  out.beta = std::polar(1.0, phi) * std::conj(alpha) * t21 * (om * th * chp);
  out.beta_p = out.beta * chp - std::conj(out.beta) * std::polar(shp, php);
  out.alpha_p = t21 * alpha + out.beta_p;
  out.eta_p = std::polar(rp, php);

  const double a2 = std::norm(alpha);
  const double cdphi = a2 > 0.0 ? std::cos(phi - 2.0 * std::arg(alpha)) : 0.0;
  out.log_C = std::log(chp / std::cosh(r)) - a2 * om - a2 * om * om * th * cdphi -
              a2 * A2 * om * om * th * th * chp * shp * cdphi +
              a2 * A2 * om * om * th * th * chp * chp;
  out.C = std::exp(out.log_C);
  return out;
}

namespace {

struct OverlapParts {
  cplx log_value;  ///< log <1|2>
};

OverlapParts ds_overlap_parts(cplx a1, cplx e1, cplx a2, cplx e2) {
  const double r1 = std::abs(e1), p1 = std::arg(e1);
  const double r2 = std::abs(e2), p2 = std::arg(e2);
  const cplx sigma =
      std::cosh(r2) * std::cosh(r1) - std::polar(std::sinh(r2) * std::sinh(r1), p2 - p1);
  const cplx d = a2 - a1;
  const cplx e21 = d * std::cosh(r2) + std::conj(d) * std::polar(std::sinh(r2), p2);
  const cplx e12 = -d * std::cosh(r1) - std::conj(d) * std::polar(std::sinh(r1), p1);
  const cplx expo =
      e21 * std::conj(e12) / (2.0 * sigma) + 0.5 * (a2 * std::conj(a1) - std::conj(a2) * a1);
  return {-0.5 * std::log(sigma) + expo};
}

}  // namespace

cplx ds_inner_product(cplx a1, cplx e1, cplx a2, cplx e2) {
  return std::exp(ds_overlap_parts(a1, e1, a2, e2).log_value);
}

double ds_log_overlap2(cplx a1, cplx e1, cplx a2, cplx e2) {
  return 2.0 * ds_overlap_parts(a1, e1, a2, e2).log_value.real();
}

FidelityPair fidelity_ds(cplx t21, double theta, cplx alpha, cplx eta) {
  check_t21(t21, "fidelity_ds");
  const DsTransform x = ds_transform(t21, theta, alpha, eta);
  const double lf = x.log_C + ds_log_overlap2(alpha, eta, x.alpha_p, x.eta_p);
  const cplx rot = std::polar(1.0, theta);
  const double lm =
      x.log_C + ds_log_overlap2(alpha * rot, eta * rot * rot, x.alpha_p, x.eta_p);
  return {clamp01(std::exp(lf)), clamp01(std::exp(lm))};
}

FidelityPair fidelity_coherent(cplx t21, double theta, cplx alpha) {
  const double a2 = std::norm(alpha);
  const double m = std::abs(t21);
  return {clamp01(std::exp(-2.0 * a2 * (1.0 - m * std::cos(theta)))),
          clamp01(std::exp(-2.0 * a2 * (1.0 - m)))};
}

FidelityPair fidelity(const InputState& state, cplx t21, double theta) {
  return std::visit(
      [&](const auto& s) -> FidelityPair {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Fock>) {
          return fidelity_fock(t21, s.n);
        } else if constexpr (std::is_same_v<S, Coherent>) {
          return fidelity_coherent(t21, theta, s.alpha);
        } else if constexpr (std::is_same_v<S, Cat>) {
          return fidelity_cat(t21, theta, s.alpha, s.parity);
        } else {
          return fidelity_ds(t21, theta, s.alpha, s.eta);
        }
      },
      state);
}

namespace {

template <class Points>
FidelityTrace trace_of(const SystemParams& p, const Points& pts, const InputState& state) {
  validate(state);
  FidelityTrace tr;
  tr.time_unit = time_unit(p);
  const std::size_t n = pts.size();
  tr.t.reserve(n);
  tr.abs_t21.reserve(n);
  tr.theta.reserve(n);
  tr.f_fix.reserve(n);
  tr.f_mov.reserve(n);
  for (const auto& q : pts) {
    const FidelityPair f = fidelity(state, q.T.t21, q.theta);
    tr.t.push_back(q.t);
    tr.abs_t21.push_back(std::abs(q.T.t21));
    tr.theta.push_back(q.theta);
    tr.f_fix.push_back(f.fixed);
    tr.f_mov.push_back(f.moving);
  }
  return tr;
}

}  // namespace

FidelityTrace fidelity_trace(const Trajectory& traj, const InputState& state) {
  return trace_of(traj.params, traj.points, state);
}

FidelityTrace fidelity_trace(const AdiabaticSolution& sol, const InputState& state) {
  return trace_of(sol.params, sol.points, state);
}

void write_fidelity_csv(std::ostream& os, const FidelityTrace& tr) {
  CsvWriter w(os, {"t_over_2pi_g", "abs_T21", "theta", "F_fix", "F_mov"});
  for (std::size_t i = 0; i < tr.size(); ++i)
    w.row({tr.t[i] / tr.time_unit, tr.abs_t21[i], tr.theta[i], tr.f_fix[i], tr.f_mov[i]});
}

}  // namespace dynres
