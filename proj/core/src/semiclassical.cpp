#include "dynres/semiclassical.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "dynres/csv.hpp"
#include "dynres/dop853.hpp"
#include "sampling.hpp"

namespace dynres {

namespace {

// Layout: b (2), T11, T21, T12, T22 (2 each), xi.
constexpr std::size_t kDim = 11;
using StateVec = ode::Vec<kDim>;

StateVec pack(const SemiclassicalState& s) {
  const auto& T = s.T;
  return {s.osc.b.real(), s.osc.b.imag(), T.t11.real(), T.t11.imag(), T.t21.real(), T.t21.imag(),
          T.t12.real(),   T.t12.imag(),   T.t22.real(), T.t22.imag(), s.xi};
}

SemiclassicalState unpack(const StateVec& y) {
  SemiclassicalState s;
  s.osc.b = {y[0], y[1]};
  s.T.t11 = {y[2], y[3]};
  s.T.t21 = {y[4], y[5]};
  s.T.t12 = {y[6], y[7]};
  s.T.t22 = {y[8], y[9]};
  s.xi = y[10];
  return s;
}

struct Rhs {
  const SystemParams& p;
  void operator()(double t, const StateVec& y, StateVec& dy) const {
    const SemiclassicalState s = unpack(y);
    const Drift d = drift(t, s.osc, s.T, p);
    const double w = detuning(p, s.osc.b);
    dy = {d.db_dt.real(),       d.db_dt.imag(),       d.dT_dt.t11.real(), d.dT_dt.t11.imag(),
          d.dT_dt.t21.real(),   d.dT_dt.t21.imag(),   d.dT_dt.t12.real(), d.dT_dt.t12.imag(),
          d.dT_dt.t22.real(),   d.dT_dt.t22.imag(),   std::sqrt(w * w + p.g * p.g)};
  }
};

ode::Tolerances<kDim> tolerances(const IntegratorControls& ctrl) {
  auto tol = ode::Tolerances<kDim>::uniform(ctrl.rtol, ctrl.atol);
  // xi grows without bound; hold its per-step error in absolute terms.
  tol.rtol[10] = 0.0;
  tol.atol[10] = 1e-8;
  return tol;
}

ode::StepOptions step_options(const IntegratorControls& ctrl) {
  ode::StepOptions opts;
  opts.max_step = ctrl.max_step;
  opts.max_steps = ctrl.max_steps;
  return opts;
}

double photon_defect(const Transmittance& T) {
  return std::abs(std::norm(T.t11) + std::norm(T.t21) - 1.0);
}

void check_controls(const IntegratorControls& ctrl) {
  if (!(ctrl.rtol > 0.0) || !(ctrl.atol > 0.0))
    throw ConfigError("integrator: tolerances must be > 0");
  if (ctrl.sample_dt < 0.0) throw ConfigError("integrator: sample_dt must be >= 0");
}

}  // namespace

double Transmittance::unitarity_defect() const {
  // T^dagger T: columns (t11, t21) and (t12, t22).
  const double d11 = std::abs(std::norm(t11) + std::norm(t21) - 1.0);
  const double d22 = std::abs(std::norm(t12) + std::norm(t22) - 1.0);
  const double d12 = std::abs(std::conj(t11) * t12 + std::conj(t21) * t22);
  return std::max({d11, d22, d12});
}

Populations populations(const Transmittance& T, double n_bar) {
  return {n_bar * std::norm(T.t11), n_bar * std::norm(T.t21)};
}

double detuning(const SystemParams& p, cplx b) { return 2.0 * p.kappa0 * (p.b0 - b.real()); }

Drift drift(double /*t*/, const OscillatorState& osc, const Transmittance& T, const SystemParams& p) {
  const cplx I(0.0, 1.0);
  const double w = detuning(p, osc.b);
  const cplx m11(w, -p.gamma1);
  const cplx m22(-w, -p.gamma2);
  Drift d;
  d.dT_dt.t11 = -I * (m11 * T.t11 + p.g * T.t21);
  d.dT_dt.t21 = -I * (p.g * T.t11 + m22 * T.t21);
  d.dT_dt.t12 = -I * (m11 * T.t12 + p.g * T.t22);
  d.dT_dt.t22 = -I * (p.g * T.t12 + m22 * T.t22);
  const double dn = p.n_bar * (std::norm(T.t11) - std::norm(T.t21));
  d.db_dt = -I * cplx(p.omega_m, -p.gamma_m) * osc.b + I * p.kappa0 * dn;
  return d;
}

double time_unit(const SystemParams& p) {
  return 2.0 * std::numbers::pi / (p.g > 0.0 ? p.g : 1.0);
}

IntegratorStats integrate(const SystemParams& p, double t_end, const IntegratorControls& ctrl,
                          const TrajectoryObserver& observe) {
  p.check_simulable();
  check_controls(ctrl);
  if (!(t_end > 0.0)) throw ConfigError("integrate: t_end must be > 0");

  IntegratorStats stats;
  stats.rtol = ctrl.rtol;
  stats.atol = ctrl.atol;
  const detail::SampleGrid grid(t_end, ctrl.window_begin, ctrl.window_end, ctrl.sample_dt,
                                ctrl.sample_count);

  double theta = -0.5 * std::numbers::pi;  // T21 ~ -i g t near t = 0
  auto unwrap = [&theta](cplx t21) {
    if (t21 == cplx(0.0)) return theta;
    theta += std::remainder(std::arg(t21) - theta, 2.0 * std::numbers::pi);
    return theta;
  };
  auto track = [&](const Transmittance& T) {
    stats.max_unitarity_defect = std::max(stats.max_unitarity_defect, T.unitarity_defect());
    stats.max_photon_defect = std::max(stats.max_photon_defect, photon_defect(T));
  };

  auto emit = [&](double t, const StateVec& y) {
    const SemiclassicalState s = unpack(y);
    TrajectoryPoint pt;
    pt.t = t;
    pt.b = s.osc;
    pt.T = s.T;
    pt.omega = detuning(p, s.osc.b);
    const Populations pop = populations(s.T, p.n_bar);
    pt.n1 = pop.n1;
    pt.n2 = pop.n2;
    pt.xi = s.xi;
    pt.theta = unwrap(s.T.t21);
    if (p.lossless()) track(s.T);
    observe(pt);
  };
  auto on_accept = [&](double, const StateVec& y) {
    const SemiclassicalState s = unpack(y);
    unwrap(s.T.t21);
    if (p.lossless()) track(s.T);
  };

  const auto res = detail::run_sampled<kDim>(Rhs{p}, pack(SemiclassicalState{}), t_end,
                                             tolerances(ctrl), step_options(ctrl), grid, emit,
                                             on_accept);
  stats.accepted_steps = res.stats.accepted;
  stats.rejected_steps = res.stats.rejected;
  stats.rhs_evals = res.stats.rhs_evals;
  if (res.status != ode::Status::success)
    throw IntegrationError(std::string("integrate: ") + detail::describe(res.status) +
                               " at t = " + std::to_string(res.t),
                           Trajectory{p, {}, stats});
  if (p.lossless() && stats.max_unitarity_defect > ctrl.unitarity_tol)
    throw IntegrationError("integrate: unitarity defect " +
                               std::to_string(stats.max_unitarity_defect) + " exceeds tolerance",
                           Trajectory{p, {}, stats});
  return stats;
}

Trajectory integrate(const SystemParams& p, double t_end, const IntegratorControls& ctrl) {
  Trajectory traj;
  traj.params = p;
  try {
    traj.stats = integrate(p, t_end, ctrl,
                           [&traj](const TrajectoryPoint& pt) { traj.points.push_back(pt); });
  } catch (const IntegrationError& e) {
    Trajectory partial = std::move(traj);
    partial.stats = e.partial().stats;
    throw IntegrationError(e.what(), std::move(partial));
  }
  return traj;
}

SemiclassicalState propagate(const SystemParams& p, const SemiclassicalState& start, double t0,
                             double t1, const IntegratorControls& ctrl) {
  p.check_simulable();
  check_controls(ctrl);
  const auto res = ode::integrate<kDim>(Rhs{p}, t0, pack(start), t1, tolerances(ctrl),
                                        step_options(ctrl), [](auto&) {});
  if (res.status != ode::Status::success)
    throw NumericError(std::string("propagate: ") + detail::describe(res.status));
  return unpack(res.y);
}

std::vector<double> resonance_crossings(const Trajectory& traj) {
  std::vector<double> out;
  const auto& pts = traj.points;
  const SystemParams& p = traj.params;
  auto f = [&p](const TrajectoryPoint& q) { return q.b.b.real() - p.b0; };
  auto fdot = [&p](const TrajectoryPoint& q) { return drift(q.t, q.b, q.T, p).db_dt.real(); };
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto& a = pts[i - 1];
    const auto& c = pts[i];
    const double fa = f(a);
    const double fc = f(c);
    if (fa == 0.0) {
      if (out.empty() || out.back() != a.t) out.push_back(a.t);
      continue;
    }
    if (fa * fc > 0.0 || fc == 0.0) continue;
    // Cubic Hermite on [a.t, c.t] from values and slopes, then bisection.
    const double h = c.t - a.t;
    const double ma = fdot(a) * h;
    const double mc = fdot(c) * h;
    auto hermite = [&](double s) {
      const double s2 = s * s, s3 = s2 * s;
      return (2 * s3 - 3 * s2 + 1) * fa + (s3 - 2 * s2 + s) * ma + (-2 * s3 + 3 * s2) * fc +
             (s3 - s2) * mc;
    };
    double lo = 0.0, hi = 1.0;
    double flo = fa;
    for (int it = 0; it < 80 && (hi - lo) * h > 1e-13 * std::max(1.0, c.t); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = hermite(mid);
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    out.push_back(a.t + 0.5 * (lo + hi) * h);
  }
  if (!pts.empty() && f(pts.back()) == 0.0 && (out.empty() || out.back() != pts.back().t))
    out.push_back(pts.back().t);
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const SystemParams& p = traj.params;
  const double unit = time_unit(p);
  const double dw = p.delta_omega > 0.0 ? p.delta_omega : 1.0;
  CsvWriter w(os, {"t_over_2pi_g", "re_b_over_b0", "im_b_over_b0", "omega_over_dw", "n1_over_nbar",
                   "n2_over_nbar", "abs_T21", "arg_T21", "xi"});
  for (const auto& q : traj.points) {
    w.row({q.t / unit, q.b.b.real() / p.b0, q.b.b.imag() / p.b0, q.omega / dw, std::norm(q.T.t11),
           std::norm(q.T.t21), std::abs(q.T.t21), std::arg(q.T.t21), q.xi});
  }
}

}  // namespace dynres
