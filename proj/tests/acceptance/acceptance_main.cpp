// Acceptance runner: one PASS/FAIL line per criterion with the measured numbers.
//
//   acceptance [--only 1,3] [--known-fail 1,7]
//
// Exit status is the number of failing criteria not listed in --known-fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "analysis.hpp"
#include "dynres/adiabatic.hpp"
#include "dynres/experiment.hpp"
#include "dynres/fidelity.hpp"
#include "dynres/fock_oracle.hpp"
#include "dynres/params.hpp"
#include "dynres/semiclassical.hpp"
#include "two_mode_oracle.hpp"

using namespace dynres;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGoverDw = 1e-2;
constexpr double kWmOverG = 1e-3;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Lossless-run defects collected across every criterion.
struct Hygiene {
  std::mutex mu;
  double unitarity = 0.0;
  double photons = 0.0;
  std::size_t runs = 0;

  void record(const SystemParams& p, const IntegratorStats& s) {
    if (!p.lossless()) return;
    std::lock_guard<std::mutex> lock(mu);
    unitarity = std::max(unitarity, s.max_unitarity_defect);
    photons = std::max(photons, s.max_photon_defect);
    ++runs;
  }
} hygiene;

SystemParams reference(double n_ratio, double wm_over_g = kWmOverG) {
  return from_dimensionless(1.0, kGoverDw, wm_over_g, n_ratio, 100.0);
}

Trajectory run(const SystemParams& p, double periods, std::size_t samples) {
  IntegratorControls c;
  c.sample_count = samples;
  Trajectory tr = integrate(p, periods * 2.0 * kPi / p.omega_m, c);
  hygiene.record(p, tr.stats);
  return tr;
}

Trajectory run_dt(const SystemParams& p, double periods, double dt_units) {
  IntegratorControls c;
  c.sample_dt = dt_units * time_unit(p);
  c.sample_count = 0;
  Trajectory tr = integrate(p, periods * 2.0 * kPi / p.omega_m, c);
  hygiene.record(p, tr.stats);
  return tr;
}

// ------------------------------------------------------------------ 1, 2

Outcome criterion1() {
  const SystemParams p = reference(5.0);
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory tr = run_dt(p, 1.2, 0.0005);
  const double runtime = seconds_since(t0);
  const FidelityTrace f = fidelity_trace(tr, Fock{100});
  std::size_t ipk = 0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.f_fix[i] > f.f_fix[ipk]) ipk = i;
  // Post-transfer window: the contiguous stretch around the peak with n2/n_bar >= 0.999.
  std::size_t lo = ipk, hi = ipk;
  while (lo > 0 && tr.points[lo - 1].n2 / p.n_bar >= 0.999) --lo;
  while (hi + 1 < tr.points.size() && tr.points[hi + 1].n2 / p.n_bar >= 0.999) ++hi;
  double fmin = 1.0;
  for (std::size_t i = lo; i <= hi; ++i) fmin = std::min(fmin, f.f_fix[i]);
  // Diagnostic: F over +-1 time unit around the peak, where the detuning is largest.
  double fmin_peak = 1.0;
  for (std::size_t i = lo; i <= hi; ++i)
    if (std::abs(f.t[i] - f.t[ipk]) <= f.time_unit) fmin_peak = std::min(fmin_peak, f.f_fix[i]);
  const double bound = 1.0 - 100.0 * kGoverDw * kGoverDw - 0.002;
  Outcome o;
  o.pass = f.f_fix[ipk] >= 0.99 && fmin >= bound && runtime < 60.0;
  o.detail = fmt("peak F = %.6f (>= 0.99)", f.f_fix[ipk]) + fmt(", window min F = %.6f (>= %.3f)", fmin, bound) +
             fmt(", window [%.2f, %.2f] 2pi/g", tr.points[lo].t / f.time_unit, tr.points[hi].t / f.time_unit) +
             fmt(", runtime %.2f s (< 60)", runtime) + fmt("; min F within 1 unit of the peak %.6f", fmin_peak) +
             fmt(" at omega/dw = %.3f", tr.points[ipk].omega / p.delta_omega);
  return o;
}

Outcome criterion2() {
  const SystemParams p = reference(5.0);
  const Trajectory tr = run(p, 1.2, 200001);
  double n2max = 0.0, t99 = -1.0;
  for (const auto& q : tr.points) {
    n2max = std::max(n2max, q.n2 / p.n_bar);
    if (t99 < 0.0 && q.n2 / p.n_bar >= 0.99) t99 = q.t;
  }
  const auto cross = resonance_crossings(tr);
  const double tc = cross.empty() ? -1.0 : cross.front();
  const double rel = tc > 0.0 && t99 > 0.0 ? std::abs(t99 - tc) / tc : 1.0;
  Outcome o;
  o.pass = n2max >= 0.999 && rel <= 0.05;
  o.detail = fmt("max n2/nbar = %.6f (>= 0.999)", n2max) + fmt(", first crossing omega_m t = %.4f", tc * p.omega_m) +
             fmt(", n2/nbar = 0.99 at %.4f", t99 * p.omega_m) + fmt(", offset %.2f%% (<= 5%%)", 100.0 * rel);
  return o;
}

// ------------------------------------------------------------------ 3

Outcome criterion3() {
  std::vector<std::future<std::pair<double, analysis::Arcs>>> jobs;
  const std::vector<double> ratios{0.5, 1.0, 1.4, 2.0};
  for (double r : ratios)
    jobs.push_back(std::async(std::launch::async, [r] {
      const SystemParams p = reference(r);
      return std::make_pair(r, analysis::phase_portrait(run(p, 1.2, 40001)));
    }));
  Outcome o{true, ""};
  for (auto& j : jobs) {
    const auto [r, arcs] = j.get();
    if (r <= 1.0) {
      const bool ok = std::abs(arcs.max_br_before_over_b0 - r) <= 0.02 * r;
      o.pass = o.pass && ok;
      o.detail += fmt("R=%.1f: max b_r/b0 = %.5f", r, arcs.max_br_before_over_b0) + (ok ? "" : " (out of 2%)") + "; ";
    } else {
      o.pass = o.pass && arcs.two_arcs;
      o.detail += fmt("R=%.1f: centres %.4f", r, arcs.centre_before.real() / reference(r).b0) +
                  fmt(" -> %.4f b0, ", arcs.centre_after.real() / reference(r).b0) +
                  (arcs.two_arcs ? "two arcs; " : "single arc; ");
    }
  }
  return o;
}

// ------------------------------------------------------------------ 4

Outcome criterion4() {
  const Preset pre = make_preset("fig5b");
  Job base = pre.jobs.front();
  base.run.peak_dt = 0.0005;
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  const auto rows = run_sweep(base, *pre.sweep, workers);
  const auto& ns = pre.sweep->values2;
  Outcome o{true, ""};
  bool mono_n = true;
  for (const auto& r : rows) mono_n = mono_n && r.monotone_in_n;
  bool inc_ratio = true;
  std::string worst;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    double prev = -1.0;
    for (std::size_t i = k; i < rows.size(); i += ns.size()) {
      if (rows[i].value < 1.5 || rows[i].value > 5.0) continue;
      if (!(rows[i].peak.f_fix > prev)) {
        inc_ratio = false;
        worst = fmt("n=%.0f at ratio %.1f", ns[k], rows[i].value);
      }
      prev = rows[i].peak.f_fix;
    }
  }
  o.pass = mono_n && inc_ratio;
  auto at = [&](double ratio, double n) {
    for (const auto& r : rows)
      if (r.value == ratio && r.value2 == n) return r.peak.f_fix;
    return -1.0;
  };
  o.detail = std::string("decreasing in n: ") + (mono_n ? "all ratios" : "violated") +
             "; increasing in ratio on [1.5, 5]: " + (inc_ratio ? "yes" : "no (" + worst + ")") +
             fmt("; F(1.5, 100) = %.5f", at(1.5, 100)) + fmt(", F(5, 100) = %.5f", at(5.0, 100)) +
             fmt(", F(5, 500) = %.5f", at(5.0, 500));
  return o;
}

// ------------------------------------------------------------------ 5

Outcome criterion5() {
  const Job job = make_preset("fig6").jobs.front();
  const SystemParams& p = job.params;
  RunSettings rs = job.run;
  const auto pk = peak_fidelities(p, {job.state}, rs);
  const double unit = time_unit(p);
  IntegratorControls z = rs.controls(p);
  z.window_begin = std::max(0.0, pk[0].t_mov - 0.5 * unit);
  z.window_end = pk[0].t_mov + 0.5 * unit;
  z.sample_dt = 1e-4 * unit;
  z.sample_count = 0;
  const Trajectory tr = integrate(p, z.window_end, z);
  hygiene.record(p, tr.stats);
  const FidelityTrace f = fidelity_trace(tr, job.state);
  const double fmax = *std::max_element(f.f_fix.begin(), f.f_fix.end());
  std::vector<double> t(f.t.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = f.t[i] / unit;
  const double spacing = analysis::median_peak_spacing(t, f.f_fix, 0.1 * fmax);
  Outcome o;
  o.pass = spacing >= 0.5e-2 && spacing <= 2e-2;
  o.detail = fmt("median F_fix peak spacing = %.5f 2pi/g (target 1e-2 within x2)", spacing) +
             fmt(", F_mov peak %.5f", pk[0].f_mov) + fmt(" at %.2f 2pi/g", pk[0].t_mov / unit);
  return o;
}

// ------------------------------------------------------------------ 6

Outcome criterion6() {
  const HalMapSpec spec = *make_preset("fig7").hal_map;
  const auto cells = hal_map(spec);
  const double da = spec.alpha_max / static_cast<double>(spec.alpha_steps);
  double row_err = 0.0, contour = -1.0;
  const HalCell* prev = nullptr;
  for (const auto& c : cells) {
    if (c.r != 0.0 || c.dphi != 0.0) continue;
    if (c.abs_alpha > 0.0) row_err = std::max(row_err, std::abs(c.log10_hal + std::log10(c.abs_alpha)));
    if (prev && std::isfinite(prev->log10_hal) && prev->log10_hal > -1.0 && c.log10_hal <= -1.0 && contour < 0.0)
      contour = prev->abs_alpha + (c.abs_alpha - prev->abs_alpha) * (prev->log10_hal + 1.0) /
                                      (prev->log10_hal - c.log10_hal);
    prev = &c;
  }
  Outcome o;
  o.pass = contour > 0.0 && std::abs(contour - 10.0) <= da && row_err <= 1e-12;
  o.detail = fmt("contour log10 HAL = -1 meets r = 0 at |alpha| = %.6f (grid %.3f)", contour, da) +
             fmt(", r = 0 row max error %.2e (<= 1e-12)", row_err);
  return o;
}

// ------------------------------------------------------------------ 7

struct SupError {
  double whole = 0.0;
  double before_return = 0.0;  ///< up to the second resonance crossing
};

SupError sup_t_error(const SystemParams& p) {
  IntegratorControls c;
  c.sample_count = 20001;
  const double t_end = 1.2 * 2.0 * kPi / p.omega_m;
  const Trajectory ode = integrate(p, t_end, c);
  hygiene.record(p, ode.stats);
  const AdiabaticSolution ad = adiabatic_trajectory(p, t_end, c);
  const auto cross = resonance_crossings(ode);
  const double t_return = cross.size() > 1 ? cross[1] : t_end;
  SupError e;
  for (std::size_t i = 0; i < ode.points.size(); ++i) {
    const auto& a = ode.points[i].T;
    const auto& b = ad.points[i].T;
    const double d = std::max({std::abs(a.t11 - b.t11), std::abs(a.t12 - b.t12), std::abs(a.t21 - b.t21),
                               std::abs(a.t22 - b.t22)});
    e.whole = std::max(e.whole, d);
    if (ode.points[i].t <= t_return) e.before_return = std::max(e.before_return, d);
  }
  return e;
}

Outcome criterion7() {
  const std::vector<double> wm{kWmOverG, kWmOverG / 2.0, kWmOverG / 4.0};
  std::vector<std::future<SupError>> jobs;
  for (double w : wm) jobs.push_back(std::async(std::launch::async, [w] { return sup_t_error(reference(5.0, w)); }));
  std::vector<double> err;
  double early = 0.0;
  for (auto& j : jobs) {
    const SupError e = j.get();
    if (err.empty()) early = e.before_return;
    err.push_back(e.whole);
  }
  const double nu = adiabaticity_nu(reference(5.0));
  const bool dec = err[1] < err[0] && err[2] < err[1];
  Outcome o;
  o.pass = err[0] <= 5.0 * nu && dec;
  o.detail = fmt("sup |T_closed - T_ode| = %.4f, 5 nu = %.4f", err[0], 5.0 * nu) +
             fmt("; omega_m/2: %.4f", err[1]) + fmt(", omega_m/4: %.4f", err[2]) +
             (dec ? " (strictly decreasing)" : " (not decreasing)") +
             fmt("; up to the return crossing %.4f", early);
  return o;
}

// ------------------------------------------------------------------ 8

cplx random_disk(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(std::sqrt(u(rng)), 2.0 * kPi * u(rng));
}

Outcome criterion8() {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> ph(-kPi, kPi), amp(0.0, 12.0);
  std::uniform_int_distribution<int> nn(0, 500);
  double ds_err = 0.0;
  std::size_t order_viol = 0, fock_viol = 0;
  for (int k = 0; k < 10000; ++k) {
    // (|T21|, theta) random; theta is the phase of T21.
    const double th = ph(rng);
    const cplx t = std::polar(std::abs(random_disk(rng)), th);
    const cplx a = std::polar(amp(rng), ph(rng));
    const FidelityPair ds = fidelity_ds(t, th, a, 0.0);
    const FidelityPair c = fidelity_coherent(t, th, a);
    ds_err = std::max({ds_err, std::abs(ds.fixed - c.fixed), std::abs(ds.moving - c.moving)});
    if (c.moving < c.fixed) ++order_viol;
    const FidelityPair f = fidelity_fock(t, nn(rng));
    if (f.fixed != f.moving) ++fock_viol;
  }
  Outcome o;
  o.pass = ds_err <= 1e-12 && order_viol == 0 && fock_viol == 0;
  o.detail = fmt("DS(r=0) vs coherent max error %.2e (<= 1e-12)", ds_err) +
             fmt("; F_mov < F_fix in %.0f cases", double(order_viol)) +
             fmt("; Fock F_fix != F_mov in %.0f of 1e4", double(fock_viol));
  return o;
}

// ------------------------------------------------------------------ 9

double rabi_error() {
  SystemParams p;
  p.g = 1.0;
  p.b0 = 1.0;
  p.omega_m = 0.05;
  p.n_bar = 1.0;
  OracleControls c;
  c.M_max = 2;
  const QuantumState psi0 = prepare_input(Fock{1}, 1, 2);
  double e = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double t = 0.05 * k;
    const QuantumState psi = evolve(psi0, p, t, c);
    double n2 = 0.0;
    const BlockBasis b{1, 2};
    for (std::size_t i = 0; i < psi.blocks[0].amp.size(); ++i)
      if (b.n1_of(i) == 0) n2 += std::norm(psi.blocks[0].amp[i]);
    e = std::max(e, std::abs(n2 - std::pow(std::sin(t), 2)));
  }
  return e;
}

double brute_force_error() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ph(-kPi, kPi), amp(0.05, 1.5);
  const int cutoff = 30;
  double e = 0.0;
  auto upd = [&](const FidelityPair& f, const oracle2::Fidelities& bf) {
    e = std::max({e, std::abs(f.fixed - bf.fixed), std::abs(f.moving - bf.moving)});
  };
  for (int k = 0; k < 200; ++k) {
    const double th = ph(rng);
    const cplx t = std::polar(std::abs(random_disk(rng)), th);
    const Eigen::Matrix2cd T = oracle2::unitary_with_t21(t, ph(rng), ph(rng));
    const cplx a = std::polar(amp(rng), ph(rng));
    for (int n = 0; n <= 4; ++n) {
      oracle2::Vec psi(cutoff + 1, 0.0);
      psi[n] = 1.0;
      upd(fidelity_fock(t, n), oracle2::evaluate(psi, T, th));
    }
    upd(fidelity_coherent(t, th, a), oracle2::evaluate(oracle2::coherent_amplitudes(a, cutoff), T, th));
    for (bool even : {true, false})
      upd(fidelity_cat(t, th, a, even ? Parity::even : Parity::odd),
          oracle2::evaluate(oracle2::cat_amplitudes(a, even, cutoff), T, th));
    const cplx eta = std::polar(0.5 * amp(rng) / 1.5, ph(rng));
    upd(fidelity_ds(t, th, a, eta), oracle2::evaluate(oracle2::displaced_squeezed_amplitudes(a, eta, cutoff), T, th));
  }
  return e;
}

Outcome criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  const OracleSpec spec;
  std::vector<std::future<ErrorReport>> jobs;
  for (int n : spec.photons)
    jobs.push_back(std::async(std::launch::async, [&spec, n] {
      const SystemParams p = from_dimensionless(1.0, spec.ratio_g_over_dw, spec.ratio_wm_over_g, spec.n_ratio, n);
      return compare_with_semiclassical(p, Fock{n}, spec.t_end * time_unit(p), spec.samples, spec.controls);
    }));
  const double rabi = rabi_error();
  const double bf = brute_force_error();
  std::vector<ErrorReport> reps;
  for (auto& j : jobs) reps.push_back(j.get());
  const double elapsed = seconds_since(t0);
  bool dec = true;
  for (std::size_t i = 1; i < reps.size(); ++i) dec = dec && reps[i].peak_transfer_error < reps[i - 1].peak_transfer_error;
  Outcome o;
  o.pass = rabi <= 1e-8 && bf <= 1e-8 && dec && elapsed < 600.0;
  o.detail = fmt("(a) Rabi error %.2e", rabi) + fmt("; (b) brute-force error %.2e", bf) + "; (c) peak-transfer error";
  for (std::size_t i = 0; i < reps.size(); ++i)
    o.detail += fmt(" N=%.0f: %.5f", double(spec.photons[i]), reps[i].peak_transfer_error);
  o.detail += dec ? " (decreasing)" : " (not decreasing)";
  o.detail += fmt("; %.1f s (< 600)", elapsed);
  return o;
}

// ------------------------------------------------------------------ 10

Outcome criterion10() {
  // Reruns of a reference trajectory and a threaded sweep must be byte-identical.
  const SystemParams p = reference(5.0);
  auto csv = [&] {
    std::ostringstream os;
    write_trajectory_csv(os, run(p, 1.2, 20001));
    return os.str();
  };
  const bool same_traj = csv() == csv();
  Job base = make_preset("fig5b").jobs.front();
  base.run.peak_dt = 0.002;
  const SweepSpec s{"n_ratio", {2.0, 5.0}, "n", {100, 200}};
  const auto a = run_sweep(base, s, 1), b = run_sweep(base, s, 4);
  bool same_sweep = a.size() == b.size();
  for (std::size_t i = 0; same_sweep && i < a.size(); ++i)
    same_sweep = a[i].peak.f_fix == b[i].peak.f_fix && a[i].peak.t_fix == b[i].peak.t_fix &&
                 a[i].peak.f_mov == b[i].peak.f_mov;
  Outcome o;
  o.pass = hygiene.unitarity <= 1e-9 && hygiene.photons <= 1e-9 && same_traj && same_sweep;
  o.detail = fmt("max unitarity defect %.2e", hygiene.unitarity) + fmt(", photon defect %.2e", hygiene.photons) +
             fmt(" over %.0f lossless runs", double(hygiene.runs)) + "; rerun " +
             (same_traj ? "identical" : "differs") + "; sweep 1 vs 4 workers " + (same_sweep ? "identical" : "differs");
  return o;
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.insert(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, known;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if ((a == "--only" || a == "--known-fail") && i + 1 < argc) {
      (a == "--only" ? only : known) = parse_list(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--only LIST] [--known-fail LIST]\n");
      return 64;
    }
  }
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  int unexpected = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool expected = known.count(id) > 0;
    if (!o.pass && !expected) ++unexpected;
    std::printf("CRITERION %2d: %s  %s  [%.1f s]%s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                seconds_since(t0), !o.pass && expected ? "  (known failure)" : "");
    std::fflush(stdout);
  }
  return unexpected;
}
