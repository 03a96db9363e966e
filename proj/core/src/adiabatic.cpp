#include "dynres/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "dynres/csv.hpp"
#include "dynres/dop853.hpp"
#include "sampling.hpp"

namespace dynres {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double arg_of(double re, double im) { return std::atan2(im, re); }

}  // namespace

EigenFrame eigenframe(double omega, double g, double gamma1, double gamma2) {
  if (!(g > 0.0)) throw ConfigError("eigenframe: g must be > 0");
  EigenFrame f;
  f.omega = omega;
  f.g = g;
  f.epsilon = std::hypot(omega, g);
  // 1 +/- omega/eps loses digits when |omega| >> g; use g^2/(eps(eps -/+ omega)) instead.
  const double e = f.epsilon;
  const double big = std::sqrt(0.5 * (1.0 + std::abs(omega) / e));
  const double small = g / (2.0 * e * big);
  f.c = omega >= 0.0 ? big : small;
  f.s = omega >= 0.0 ? small : big;
  const double gbar = 0.5 * (gamma1 + gamma2);
  f.lambda_plus = {e, -gbar};
  f.lambda_minus = {-e, -gbar};
  return f;
}

double verify_diagonalization(const EigenFrame& f) {
  const double gamma = -f.lambda_plus.imag();
  const cplx m11(f.omega, -gamma), m12(f.g), m21(f.g), m22(-f.omega, -gamma);
  // W = [[c, -s], [s, c]] is orthogonal, so W^-1 = W^T.
  const double c = f.c, s = f.s;
  const cplx a11 = m11 * c + m12 * s, a12 = -m11 * s + m12 * c;
  const cplx a21 = m21 * c + m22 * s, a22 = -m21 * s + m22 * c;
  const cplx d11 = c * a11 + s * a21, d12 = c * a12 + s * a22;
  const cplx d21 = -s * a11 + c * a21, d22 = -s * a12 + c * a22;
  return std::max({std::abs(d11 - f.lambda_plus), std::abs(d12), std::abs(d21),
                   std::abs(d22 - f.lambda_minus)});
}

Transmittance closed_form_T(const EigenFrame& f0, const EigenFrame& ft, double xi, double decay) {
  const cplx em = std::polar(1.0, -xi);
  const cplx ep = std::conj(em);
  Transmittance T;
  T.t11 = decay * (ft.c * f0.c * em + ft.s * f0.s * ep);
  T.t21 = decay * (ft.s * f0.c * em - ft.c * f0.s * ep);
  T.t22 = decay * (ft.s * f0.s * em + ft.c * f0.c * ep);
  T.t12 = decay * (ft.c * f0.s * em - ft.s * f0.c * ep);
  return T;
}

double t21_magnitude(const EigenFrame& f0, const EigenFrame& ft, double xi) {
  const double a = ft.s * f0.c;
  const double b = ft.c * f0.s;
  // (a - b)^2 + 4ab sin^2 xi: same quantity, no cancellation near a = b.
  const double sx = std::sin(xi);
  return std::sqrt(std::max(0.0, (a - b) * (a - b) + 4.0 * a * b * sx * sx));
}

double t21_magnitude_far_detuned(double g_over_dw, double xi) {
  const double cx = std::cos(xi);
  return std::sqrt(std::max(0.0, 1.0 - g_over_dw * g_over_dw * cx * cx));
}

double theta_tangent_residual(const EigenFrame& f0, const EigenFrame& ft, double xi,
                              double theta) {
  const double num = (ft.c * f0.s + ft.s * f0.c) * std::sin(xi);
  const double den = (ft.c * f0.s - ft.s * f0.c) * std::cos(xi);
  if (num == 0.0 && den == 0.0) return 0.0;
  return std::abs(std::sin(theta - std::atan2(num, den)));
}

int ThetaLift::branch_of(const EigenFrame& f0, const EigenFrame& ft) {
  return ft.s * f0.c >= ft.c * f0.s ? 1 : -1;
}

double ThetaLift::raw(int branch, double a, double b, double xi) const {
  // T21 = e^{-i xi} (a - b e^{2i xi}); factor out whichever term dominates so
  // the principal Arg of the remaining bracket never wraps.
  if (branch > 0) {
    return -xi + arg_of(a - b * std::cos(2.0 * xi), -b * std::sin(2.0 * xi));
  }
  return xi + kPi + arg_of(b - a * std::cos(2.0 * xi), a * std::sin(2.0 * xi));
}

void ThetaLift::cross_at(double xi_s, int new_branch) {
  if (new_branch == branch_ || branch_ == 0) {
    branch_ = new_branch;
    return;
  }
  const double before = offset_ + raw(branch_, 1.0, 1.0, xi_s);
  const double after = raw(new_branch, 1.0, 1.0, xi_s);
  offset_ = before - after;
  offset_ = kTwoPi * std::round(offset_ / kTwoPi);
  branch_ = new_branch;
}

double ThetaLift::next(const EigenFrame& ft, double xi) {
  const double a = ft.s * f0_.c;
  const double b = ft.c * f0_.s;
  const double gap = a - b;
  const int br = gap >= 0.0 ? 1 : -1;
  if (branch_ == 0) {
    branch_ = br;
    last_theta_ = -0.5 * kPi;  // T21 ~ -i g t just after t = 0
  } else {
    if (xi < last_xi_) throw SamplingError("theta_phase: xi must be non-decreasing");
    if (br != branch_) {
      if (xi - last_xi_ >= 0.5 * kPi)
        throw SamplingError("theta_phase: sampling too coarse across a branch change");
      const double w = last_gap_ / (last_gap_ - gap);
      cross_at(last_xi_ + w * (xi - last_xi_), br);
    }
  }
  last_xi_ = xi;
  last_gap_ = gap;
  const double sx = std::sin(xi);
  if (gap == 0.0 && sx == 0.0) return last_theta_;  // T21 = 0 exactly
  last_theta_ = offset_ + raw(branch_, a, b, xi);
  return last_theta_;
}

std::vector<double> theta_phase(const EigenFrame& frame0, const std::vector<EigenFrame>& frames,
                                const std::vector<double>& xi_series) {
  if (frames.size() != xi_series.size())
    throw ConfigError("theta_phase: frames and xi series differ in length");
  ThetaLift lift(frame0);
  std::vector<double> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) out.push_back(lift.next(frames[i], xi_series[i]));
  return out;
}

cplx adiabatic_oscillator_rhs(cplx b, const SystemParams& p, const EigenFrame& frame0) {
  const cplx I(0.0, 1.0);
  const double w = detuning(p, b);
  const double ratio = frame0.epsilon > 0.0 ? frame0.omega / frame0.epsilon : 0.0;
  const double force = p.kappa0 * (w / std::hypot(w, p.g)) * p.n_bar * ratio;
  return -I * cplx(p.omega_m, -p.gamma_m) * b + I * force;
}

AdiabaticSolution adiabatic_trajectory(const SystemParams& p, double t_end,
                                       const IntegratorControls& ctrl) {
  p.check_simulable();
  if (!(p.g > 0.0)) throw ConfigError("adiabatic_trajectory: g must be > 0");
  if (p.gamma1 != p.gamma2)
    throw ConfigError("adiabatic_trajectory: closed form requires gamma1 == gamma2");
  if (!(t_end > 0.0)) throw ConfigError("adiabatic_trajectory: t_end must be > 0");
  if (!(ctrl.rtol > 0.0) || !(ctrl.atol > 0.0))
    throw ConfigError("integrator: tolerances must be > 0");

  using Y = ode::Vec<3>;  // Re b, Im b, xi
  const EigenFrame f0 = eigenframe(detuning(p, 0.0), p.g, p.gamma1, p.gamma2);
  auto rhs = [&p, &f0](double, const Y& y, Y& dy) {
    const cplx b(y[0], y[1]);
    const cplx db = adiabatic_oscillator_rhs(b, p, f0);
    dy = {db.real(), db.imag(), std::hypot(detuning(p, b), p.g)};
  };
  auto tol = ode::Tolerances<3>::uniform(ctrl.rtol, ctrl.atol);
  tol.rtol[2] = 0.0;
  tol.atol[2] = 1e-8;
  ode::StepOptions opts;
  opts.max_step = ctrl.max_step;
  opts.max_steps = ctrl.max_steps;

  AdiabaticSolution sol;
  sol.params = p;
  sol.stats.rtol = ctrl.rtol;
  sol.stats.atol = ctrl.atol;
  const detail::SampleGrid grid(t_end, ctrl.window_begin, ctrl.window_end, ctrl.sample_dt,
                                ctrl.sample_count);
  ThetaLift lift(f0);
  auto frame_at = [&](const Y& y) {
    return eigenframe(detuning(p, cplx(y[0], y[1])), p.g, p.gamma1, p.gamma2);
  };
  auto gap_at = [&](const Y& y) {
    const EigenFrame f = frame_at(y);
    return f.s * f0.c - f.c * f0.s;
  };
  auto record = [&](double t, const Y& y, bool keep) {
    const EigenFrame ft = frame_at(y);
    const double theta = lift.next(ft, y[2]);
    if (!keep) return;
    AdiabaticPoint pt;
    pt.t = t;
    pt.b = {y[0], y[1]};
    pt.omega = ft.omega;
    pt.xi = y[2];
    pt.theta = theta;
    pt.T = closed_form_T(f0, ft, y[2], std::exp(-p.gamma1 * t));
    if (p.lossless()) {
      sol.stats.max_unitarity_defect =
          std::max(sol.stats.max_unitarity_defect, pt.T.unitarity_defect());
      sol.stats.max_photon_defect = std::max(
          sol.stats.max_photon_defect, std::abs(std::norm(pt.T.t11) + std::norm(pt.T.t21) - 1.0));
    }
    sol.points.push_back(pt);
  };

  const Y y0{0.0, 0.0, 0.0};
  std::size_t next = 0;
  lift.next(f0, 0.0);
  while (next < grid.size() && grid.time(next) <= 0.0) record(grid.time(next++), y0, true);

  auto on_step = [&](auto& step) {
    double prev_t = step.t_old();
    Y prev_y = step.y_old();
    auto visit = [&](double t, const Y& y, bool keep) {
      const int br = ThetaLift::branch_of(f0, frame_at(y));
      if (br != lift.branch()) {
        // Locate the branch boundary on the dense output.
        double lo = prev_t, hi = t;
        const double g_lo = gap_at(prev_y);
        for (int it = 0; it < 100 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
          const double mid = 0.5 * (lo + hi);
          if ((gap_at(step.at(mid)) >= 0.0) == (g_lo >= 0.0)) lo = mid;
          else hi = mid;
        }
        lift.cross_at(step.at(0.5 * (lo + hi))[2], br);
      }
      record(t, y, keep);
      prev_t = t;
      prev_y = y;
    };
    while (next < grid.size() && grid.time(next) <= step.t_new()) {
      const double t = grid.time(next++);
      visit(t, step.at(t), true);
    }
    visit(step.t_new(), step.y_new(), false);
  };
  const auto res = ode::integrate<3>(rhs, 0.0, y0, t_end, tol, opts, on_step);
  sol.stats.accepted_steps = res.stats.accepted;
  sol.stats.rejected_steps = res.stats.rejected;
  sol.stats.rhs_evals = res.stats.rhs_evals;
  if (res.status != ode::Status::success)
    throw NumericError(std::string("adiabatic_trajectory: ") + detail::describe(res.status));
  return sol;
}

void write_adiabatic_csv(std::ostream& os, const AdiabaticSolution& sol) {
  const SystemParams& p = sol.params;
  const double unit = time_unit(p);
  const double dw = p.delta_omega > 0.0 ? p.delta_omega : 1.0;
  const EigenFrame f0 = eigenframe(detuning(p, 0.0), p.g);
  CsvWriter w(os, {"t_over_2pi_g", "re_b_over_b0", "im_b_over_b0", "omega_over_dw", "n1_over_nbar",
                   "n2_over_nbar", "abs_T21", "arg_T21", "xi", "theta", "abs_T21_closed"});
  for (const auto& q : sol.points) {
    const EigenFrame ft = eigenframe(q.omega, p.g);
    w.row({q.t / unit, q.b.real() / p.b0, q.b.imag() / p.b0, q.omega / dw, std::norm(q.T.t11),
           std::norm(q.T.t21), std::abs(q.T.t21), std::arg(q.T.t21), q.xi, q.theta,
           t21_magnitude(f0, ft, q.xi) * std::exp(-p.gamma1 * q.t)});
  }
}

}  // namespace dynres
