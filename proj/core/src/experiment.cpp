#include "dynres/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "dynres/adiabatic.hpp"
#include "dynres/csv.hpp"
#include "json_io.hpp"
#include "parallel.hpp"

#ifndef DYNRES_VERSION
#define DYNRES_VERSION "unknown"
#endif

namespace dynres {

namespace fs = std::filesystem;
using detail::json;
using detail::get_number;
using detail::get_number_or;
using detail::reject_unknown_keys;

const char* version() { return DYNRES_VERSION; }

double RunSettings::t_end_natural(const SystemParams& p) const {
  if (t_end > 0.0) return t_end * time_unit(p);
  if (!(t_end_periods > 0.0)) throw ConfigError("run: t_end or t_end_periods must be > 0");
  return t_end_periods * 2.0 * std::numbers::pi / p.omega_m;
}

IntegratorControls RunSettings::controls(const SystemParams& p) const {
  IntegratorControls c;
  c.rtol = rtol;
  c.atol = atol;
  c.sample_count = samples;
  c.sample_dt = sample_dt > 0.0 ? sample_dt * time_unit(p) : 0.0;
  return c;
}

// ---------------------------------------------------------------- config

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

cplx get_complex(const json& j, const char* key, std::string_view where) {
  if (!j.contains(key)) throw ConfigError(std::string(where) + ": missing key '" + key + "'");
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(std::string(where) + ": '" + key + "' must be a number or [re, im]");
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

InputState state_from_json(const json& j) {
  constexpr std::string_view where = "state";
  detail::require_object(j, where);
  if (!j.contains("family") || !j.at("family").is_string())
    throw ConfigError("state: 'family' must be one of fock, coherent, cat, displaced_squeezed");
  const std::string fam = j.at("family").get<std::string>();
  InputState s;
  if (fam == "fock") {
    reject_unknown_keys(j, {"family", "n"}, where);
    const double n = get_number(j, "n", where);
    if (n != std::floor(n) || n < 0 || n > 1e7) throw ConfigError("state: n must be a non-negative integer");
    s = Fock{static_cast<int>(n)};
  } else if (fam == "coherent") {
    reject_unknown_keys(j, {"family", "alpha"}, where);
    s = Coherent{get_complex(j, "alpha", where)};
  } else if (fam == "cat") {
    reject_unknown_keys(j, {"family", "alpha", "parity"}, where);
    Parity par = Parity::even;
    if (j.contains("parity")) {
      const auto& pj = j.at("parity");
      if (!pj.is_string() || (pj != "even" && pj != "odd"))
        throw ConfigError("state: parity must be \"even\" or \"odd\"");
      par = pj == "even" ? Parity::even : Parity::odd;
    }
    s = Cat{get_complex(j, "alpha", where), par};
  } else if (fam == "displaced_squeezed") {
    reject_unknown_keys(j, {"family", "alpha", "eta"}, where);
    s = DisplacedSqueezed{get_complex(j, "alpha", where), get_complex(j, "eta", where)};
  } else {
    throw ConfigError("state: unknown family '" + fam + "'");
  }
  validate(s);
  return s;
}

json state_to_json(const InputState& s) {
  return std::visit(
      [](const auto& x) -> json {
        using S = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<S, Fock>) return {{"family", "fock"}, {"n", x.n}};
        else if constexpr (std::is_same_v<S, Coherent>)
          return {{"family", "coherent"}, {"alpha", complex_json(x.alpha)}};
        else if constexpr (std::is_same_v<S, Cat>)
          return {{"family", "cat"},
                  {"alpha", complex_json(x.alpha)},
                  {"parity", x.parity == Parity::even ? "even" : "odd"}};
        else
          return {{"family", "displaced_squeezed"},
                  {"alpha", complex_json(x.alpha)},
                  {"eta", complex_json(x.eta)}};
      },
      s);
}

RunSettings run_from_json(const json& j) {
  constexpr std::string_view where = "run";
  reject_unknown_keys(j, {"t_end", "t_end_periods", "samples", "sample_dt", "peak_dt", "rtol", "atol",
                          "model"},
                      where);
  RunSettings r;
  r.t_end = get_number_or(j, "t_end", r.t_end, where);
  r.t_end_periods = get_number_or(j, "t_end_periods", r.t_end_periods, where);
  const double samples = get_number_or(j, "samples", static_cast<double>(r.samples), where);
  if (samples < 2 || samples != std::floor(samples) || samples > 1e8)
    throw ConfigError("run: samples must be an integer >= 2");
  r.samples = static_cast<std::size_t>(samples);
  r.sample_dt = get_number_or(j, "sample_dt", r.sample_dt, where);
  r.peak_dt = get_number_or(j, "peak_dt", r.peak_dt, where);
  r.rtol = get_number_or(j, "rtol", r.rtol, where);
  r.atol = get_number_or(j, "atol", r.atol, where);
  if (j.contains("model")) {
    if (!j.at("model").is_string()) throw ConfigError("run: model must be a string");
    r.model = j.at("model").get<std::string>();
  }
  if (r.model != "semiclassical" && r.model != "adiabatic")
    throw ConfigError("run: model must be \"semiclassical\" or \"adiabatic\"");
  if (r.t_end < 0.0 || r.t_end_periods <= 0.0 || r.sample_dt < 0.0 || !(r.peak_dt > 0.0) ||
      !(r.rtol > 0.0) || !(r.atol > 0.0))
    throw ConfigError("run: times and tolerances must be positive");
  if (r.rtol < 1e-15) throw ConfigError("run: rtol below double precision (minimum 1e-15)");
  return r;
}

json run_to_json(const RunSettings& r) {
  return {{"t_end", r.t_end},         {"t_end_periods", r.t_end_periods},
          {"samples", r.samples},     {"sample_dt", r.sample_dt},
          {"peak_dt", r.peak_dt},     {"rtol", r.rtol},
          {"atol", r.atol},           {"model", r.model}};
}

std::vector<double> number_list(const json& j, const char* key, std::string_view where) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty())
    throw ConfigError(std::string(where) + ": '" + key + "' must be a non-empty array");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError(std::string(where) + ": '" + key + "' entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

void check_axis(const std::string& axis, const std::vector<double>& values) {
  static const char* axes[] = {"n_ratio", "n", "alpha", "r"};
  if (std::find(std::begin(axes), std::end(axes), axis) == std::end(axes))
    throw ConfigError("sweep: axis must be one of n_ratio, n, alpha, r");
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("sweep: values must be finite");
    if (axis == "n" && (v < 0 || v != std::floor(v)))
      throw ConfigError("sweep: n values must be non-negative integers");
    if (axis == "n_ratio" && !(v > 0.0)) throw ConfigError("sweep: n_ratio values must be > 0");
    if ((axis == "alpha" || axis == "r") && v < 0.0)
      throw ConfigError("sweep: alpha and r values must be >= 0");
  }
}

SweepSpec sweep_from_json(const json& j) {
  constexpr std::string_view where = "sweep";
  reject_unknown_keys(j, {"axis", "values", "axis2", "values2"}, where);
  SweepSpec s;
  if (!j.contains("axis") || !j.at("axis").is_string()) throw ConfigError("sweep: missing 'axis'");
  s.axis = j.at("axis").get<std::string>();
  s.values = number_list(j, "values", where);
  check_axis(s.axis, s.values);
  if (j.contains("axis2")) {
    if (!j.at("axis2").is_string()) throw ConfigError("sweep: 'axis2' must be a string");
    s.axis2 = j.at("axis2").get<std::string>();
    s.values2 = number_list(j, "values2", where);
    check_axis(s.axis2, s.values2);
    if (s.axis2 == s.axis) throw ConfigError("sweep: axis2 must differ from axis");
  } else if (j.contains("values2")) {
    throw ConfigError("sweep: 'values2' requires 'axis2'");
  }
  return s;
}

HalMapSpec hal_from_json(const json& j) {
  constexpr std::string_view where = "hal_map";
  reject_unknown_keys(j, {"alpha_max", "alpha_steps", "r_max", "r_steps"}, where);
  HalMapSpec h;
  h.alpha_max = get_number_or(j, "alpha_max", h.alpha_max, where);
  h.r_max = get_number_or(j, "r_max", h.r_max, where);
  const double as = get_number_or(j, "alpha_steps", static_cast<double>(h.alpha_steps), where);
  const double rs = get_number_or(j, "r_steps", static_cast<double>(h.r_steps), where);
  if (!(h.alpha_max > 0.0) || !(h.r_max >= 0.0) || as < 1 || rs < 1 || as != std::floor(as) ||
      rs != std::floor(rs) || as > 1e5 || rs > 1e5)
    throw ConfigError("hal_map: invalid grid");
  h.alpha_steps = static_cast<std::size_t>(as);
  h.r_steps = static_cast<std::size_t>(rs);
  return h;
}

OracleSpec oracle_from_json(const json& j) {
  constexpr std::string_view where = "oracle";
  reject_unknown_keys(j, {"photons", "ratio_g_over_dw", "ratio_wm_over_g", "n_ratio", "t_end",
                          "samples", "M_max", "krylov_dim", "krylov_tol", "leakage_bound", "nnz_cap"},
                      where);
  OracleSpec o;
  if (j.contains("photons")) {
    o.photons.clear();
    for (double v : number_list(j, "photons", where)) {
      if (v < 0 || v != std::floor(v) || v > 1e4) throw ConfigError("oracle: photons must be integers >= 0");
      o.photons.push_back(static_cast<int>(v));
    }
  }
  o.ratio_g_over_dw = get_number_or(j, "ratio_g_over_dw", o.ratio_g_over_dw, where);
  o.ratio_wm_over_g = get_number_or(j, "ratio_wm_over_g", o.ratio_wm_over_g, where);
  o.n_ratio = get_number_or(j, "n_ratio", o.n_ratio, where);
  o.t_end = get_number_or(j, "t_end", o.t_end, where);
  const double samples = get_number_or(j, "samples", static_cast<double>(o.samples), where);
  if (samples < 2 || samples != std::floor(samples)) throw ConfigError("oracle: samples must be >= 2");
  o.samples = static_cast<std::size_t>(samples);
  o.controls.M_max = static_cast<int>(get_number_or(j, "M_max", o.controls.M_max, where));
  o.controls.krylov_dim = static_cast<int>(get_number_or(j, "krylov_dim", o.controls.krylov_dim, where));
  o.controls.krylov_tol = get_number_or(j, "krylov_tol", o.controls.krylov_tol, where);
  o.controls.leakage_bound = get_number_or(j, "leakage_bound", o.controls.leakage_bound, where);
  o.controls.nnz_cap =
      static_cast<std::size_t>(get_number_or(j, "nnz_cap", static_cast<double>(o.controls.nnz_cap), where));
  if (!(o.ratio_g_over_dw > 0.0) || !(o.ratio_wm_over_g > 0.0) || !(o.n_ratio > 0.0) ||
      !(o.t_end > 0.0) || o.controls.krylov_dim < 2 || !(o.controls.krylov_tol > 0.0))
    throw ConfigError("oracle: invalid settings");
  return o;
}

}  // namespace

InputState state_from_json_text(const std::string& text) {
  try {
    return state_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("state: ") + e.what());
  }
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    reject_unknown_keys(j, {"params", "state", "run", "sweep", "hal_map", "oracle", "output"}, "config");
    RunConfig cfg;
    if (j.contains("params")) {
      Job job;
      const ParamsConfig pc = detail::params_from_json_value(j.at("params"));
      job.params = pc.params;
      job.thresholds = pc.thresholds;
      job.state = j.contains("state") ? state_from_json(j.at("state")) : InputState{Fock{static_cast<int>(std::lround(pc.params.n_bar))}};
      if (j.contains("run")) job.run = run_from_json(j.at("run"));
      cfg.job = job;
    } else if (j.contains("state") || j.contains("run")) {
      throw ConfigError("config: 'state' and 'run' require a 'params' block");
    }
    if (j.contains("sweep")) cfg.sweep = sweep_from_json(j.at("sweep"));
    if (j.contains("hal_map")) cfg.hal_map = hal_from_json(j.at("hal_map"));
    if (j.contains("oracle")) cfg.oracle = oracle_from_json(j.at("oracle"));
    if (j.contains("output")) {
      const auto& o = j.at("output");
      reject_unknown_keys(o, {"dir", "prefix"}, "output");
      if (o.contains("dir")) {
        if (!o.at("dir").is_string()) throw ConfigError("output: dir must be a string");
        cfg.out_dir = o.at("dir").get<std::string>();
      }
      if (o.contains("prefix")) {
        if (!o.at("prefix").is_string()) throw ConfigError("output: prefix must be a string");
        cfg.prefix = o.at("prefix").get<std::string>();
        if (cfg.prefix.empty() || cfg.prefix.find_first_of("/\\") != std::string::npos)
          throw ConfigError("output: prefix must be a plain file name stem");
      }
    }
    if (cfg.job) cfg.job->name = cfg.prefix;
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------- presets

namespace {

constexpr double kRefGoverDw = 1e-2;
constexpr double kRefWmOverG = 1e-3;

Job reference_job(const std::string& name, double n_ratio, InputState state, double n_bar) {
  Job j;
  j.name = name;
  j.params = from_dimensionless(1.0, kRefGoverDw, kRefWmOverG, n_ratio, n_bar);
  j.state = state;
  j.run.samples = 20001;
  return j;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig3", "fig4", "fig5a", "fig5b", "fig6", "fig7", "fig8"}; }

Preset make_preset(const std::string& name) {
  Preset p;
  p.name = name;
  if (name == "fig3") {
    p.command = "simulate";
    for (double r : {1.0, 1.4, 2.0}) p.jobs.push_back(reference_job("fig3_ratio" + fmt(r), r, Fock{100}, 100.0));
  } else if (name == "fig4") {
    p.command = "simulate";
    p.jobs.push_back(reference_job("fig4_ratio5", 5.0, Fock{100}, 100.0));
  } else if (name == "fig5a") {
    p.command = "fidelity";
    p.jobs.push_back(reference_job("fig5a_fock100", 5.0, Fock{100}, 100.0));
  } else if (name == "fig5b") {
    p.command = "sweep";
    p.jobs.push_back(reference_job("fig5b", 5.0, Fock{100}, 100.0));
    SweepSpec s;
    s.axis = "n_ratio";
    s.values = {1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 6.0, 8.0, 10.0};
    s.axis2 = "n";
    s.values2 = {100, 200, 500};
    p.sweep = s;
  } else if (name == "fig6") {
    p.command = "fidelity";
    p.jobs.push_back(reference_job("fig6_cat_even", 5.0, Cat{10.0, Parity::even}, 100.0));
    p.jobs.push_back(reference_job("fig6_cat_odd", 5.0, Cat{10.0, Parity::odd}, 100.0));
  } else if (name == "fig7") {
    p.command = "hal-map";
    p.hal_map = HalMapSpec{};
  } else if (name == "fig8") {
    p.command = "fidelity";
    p.jobs.push_back(reference_job("fig8_coherent", 5.0, Coherent{10.0}, 100.0));
    p.jobs.push_back(reference_job("fig8_displaced_squeezed", 5.0, DisplacedSqueezed{0.93, 1.0}, 100.0));
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return p;
}

// ---------------------------------------------------------------- peaks

void PeakTracker::add(double t, double f) {
  if (count_ == 0 || f > best_f_) {
    best_f_ = f;
    best_t_ = t;
  }
  if (count_ >= 2 && f1_ >= f0_ && f1_ >= f && (f1_ > f0_ || f1_ > f)) {
    // Vertex of the parabola through the last three samples.
    const double h0 = t1_ - t0_, h1 = t - t1_;
    const double d0 = (f1_ - f0_) / h0, d1 = (f - f1_) / h1;
    const double curv = (d1 - d0) / (h0 + h1);
    if (curv < 0.0) {
      const double slope = d0 + curv * h0;  // derivative at t1
      const double dt = -slope / (2.0 * curv);
      if (std::abs(dt) <= std::max(h0, h1)) {
        const double fv = std::min(1.0, f1_ + slope * dt + curv * dt * dt);
        if (fv > best_f_) {
          best_f_ = fv;
          best_t_ = t1_ + dt;
        }
      }
    }
  }
  t0_ = t1_;
  f0_ = f1_;
  t1_ = t;
  f1_ = f;
  ++count_;
}

std::vector<PeakFidelity> peak_fidelities(const SystemParams& p, const std::vector<InputState>& states,
                                          const RunSettings& run) {
  for (const auto& s : states) validate(s);
  std::vector<PeakTracker> fix(states.size()), mov(states.size());
  const double t_end = run.t_end_natural(p);
  auto consume = [&](double t, cplx t21, double theta) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      const FidelityPair f = fidelity(states[i], t21, theta);
      fix[i].add(t, f.fixed);
      mov[i].add(t, f.moving);
    }
  };
  IntegratorControls c = run.controls(p);
  c.sample_dt = run.peak_dt * time_unit(p);
  if (run.model == "adiabatic") {
    const AdiabaticSolution sol = adiabatic_trajectory(p, t_end, c);
    for (const auto& q : sol.points) consume(q.t, q.T.t21, q.theta);
  } else {
    integrate(p, t_end, c, [&](const TrajectoryPoint& q) { consume(q.t, q.T.t21, q.theta); });
  }
  std::vector<PeakFidelity> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    out[i] = {fix[i].value(), fix[i].time(), mov[i].value(), mov[i].time()};
  return out;
}

// ---------------------------------------------------------------- sweeps

namespace {

InputState with_axis(InputState s, const std::string& axis, double v) {
  auto rescale = [v](cplx z) { return z == cplx(0.0) ? cplx(v, 0.0) : std::polar(v, std::arg(z)); };
  if (axis == "n") {
    return Fock{static_cast<int>(v)};
  }
  if (axis == "alpha") {
    if (auto* c = std::get_if<Coherent>(&s)) c->alpha = rescale(c->alpha);
    else if (auto* k = std::get_if<Cat>(&s)) k->alpha = rescale(k->alpha);
    else if (auto* d = std::get_if<DisplacedSqueezed>(&s)) d->alpha = rescale(d->alpha);
    else throw ConfigError("sweep: axis alpha needs a coherent, cat or displaced_squeezed state");
    return s;
  }
  if (axis == "r") {
    if (auto* d = std::get_if<DisplacedSqueezed>(&s)) d->eta = rescale(d->eta);
    else throw ConfigError("sweep: axis r needs a displaced_squeezed state");
    return s;
  }
  return s;
}

SystemParams with_ratio(const SystemParams& p, double n_ratio) {
  SystemParams q = from_dimensionless(p.g, p.g / p.delta_omega, p.omega_m / p.g, n_ratio, p.n_bar);
  q.gamma1 = p.gamma1;
  q.gamma2 = p.gamma2;
  q.gamma_m = p.gamma_m;
  return q;
}

}  // namespace

std::vector<SweepRow> run_sweep(const Job& base, const SweepSpec& spec, unsigned workers) {
  check_axis(spec.axis, spec.values);
  if (!spec.axis2.empty()) check_axis(spec.axis2, spec.values2);
  const bool two = !spec.axis2.empty();
  const std::vector<double> second = two ? spec.values2 : std::vector<double>{0.0};

  // Points sharing parameters share one trajectory.
  struct Group {
    SystemParams params;
    std::vector<InputState> states;
    std::vector<std::size_t> rows;
  };
  std::vector<Group> groups;
  std::vector<SweepRow> rows;
  std::map<double, std::size_t> group_of_ratio;
  for (double v : spec.values) {
    for (double w : second) {
      SystemParams p = base.params;
      InputState s = base.state;
      auto apply = [&](const std::string& axis, double x) {
        if (axis == "n_ratio") p = with_ratio(base.params, x);
        else s = with_axis(s, axis, x);
      };
      apply(spec.axis, v);
      if (two) apply(spec.axis2, w);
      validate(s);
      const double key = spec.axis == "n_ratio" ? v : (two && spec.axis2 == "n_ratio" ? w : 0.0);
      auto it = group_of_ratio.find(key);
      if (it == group_of_ratio.end()) {
        it = group_of_ratio.emplace(key, groups.size()).first;
        groups.push_back({p, {}, {}});
      }
      groups[it->second].states.push_back(s);
      groups[it->second].rows.push_back(rows.size());
      rows.push_back({v, w, {}, true});
    }
  }
  const auto peaks = detail::ordered_map<std::vector<PeakFidelity>>(
      groups.size(), workers,
      [&](std::size_t g) { return peak_fidelities(groups[g].params, groups[g].states, base.run); });
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t k = 0; k < groups[g].rows.size(); ++k) rows[groups[g].rows[k]].peak = peaks[g][k];

  // Strictly decreasing in n at fixed remaining coordinates.
  if (spec.axis == "n" || spec.axis2 == "n") {
    std::map<double, std::vector<std::size_t>> by_other;
    for (std::size_t i = 0; i < rows.size(); ++i)
      by_other[spec.axis == "n" ? rows[i].value2 : rows[i].value].push_back(i);
    for (auto& [other, idx] : by_other) {
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double na = spec.axis == "n" ? rows[a].value : rows[a].value2;
        const double nb = spec.axis == "n" ? rows[b].value : rows[b].value2;
        return na < nb;
      });
      bool ok = true;
      for (std::size_t k = 1; k < idx.size(); ++k)
        ok = ok && rows[idx[k]].peak.f_fix < rows[idx[k - 1]].peak.f_fix;
      for (std::size_t i : idx) rows[i].monotone_in_n = ok;
    }
  }
  return rows;
}

// ---------------------------------------------------------------- HAL map

std::vector<HalCell> hal_map(const HalMapSpec& spec) {
  std::vector<HalCell> out;
  for (double dphi : {0.0, std::numbers::pi}) {
    for (std::size_t ir = 0; ir <= spec.r_steps; ++ir) {
      const double r = spec.r_max * static_cast<double>(ir) / static_cast<double>(spec.r_steps);
      for (std::size_t ia = 0; ia <= spec.alpha_steps; ++ia) {
        const double a = spec.alpha_max * static_cast<double>(ia) / static_cast<double>(spec.alpha_steps);
        // Real alpha, so the squeezing phase alone sets dphi. The (0, 0) cell is +inf.
        const double h = hal_displaced_squeezed(cplx(a, 0.0), std::polar(r, dphi));
        out.push_back({dphi, a, r, std::log10(h)});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- commands

namespace {

std::ofstream open_out(const fs::path& dir, const std::string& file) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output: cannot create " + dir.string() + ": " + ec.message());
  std::ofstream os(dir / file, std::ios::binary);
  if (!os) throw ConfigError("output: cannot write " + (dir / file).string());
  return os;
}

void finish(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw NumericError("output: write failed for " + path.string());
}

}  // namespace

Outputs cmd_simulate(const std::vector<Job>& jobs, const fs::path& out) {
  Outputs o;
  for (const auto& job : jobs) {
    const std::string file = job.name + ".csv";
    const double t_end = job.run.t_end_natural(job.params);
    const IntegratorControls c = job.run.controls(job.params);
    auto os = open_out(out, file);
    if (job.run.model == "adiabatic") {
      write_adiabatic_csv(os, adiabatic_trajectory(job.params, t_end, c));
    } else {
      write_trajectory_csv(os, integrate(job.params, t_end, c));
    }
    finish(os, out / file);
    o.files.push_back(file);
  }
  return o;
}

Outputs cmd_fidelity(const std::vector<Job>& jobs, const fs::path& out, bool zoom_fixed) {
  Outputs o;
  for (const auto& job : jobs) {
    validate(job.state);
    const double t_end = job.run.t_end_natural(job.params);
    const IntegratorControls c = job.run.controls(job.params);
    FidelityTrace tr;
    if (job.run.model == "adiabatic") tr = fidelity_trace(adiabatic_trajectory(job.params, t_end, c), job.state);
    else tr = fidelity_trace(integrate(job.params, t_end, c), job.state);
    const std::string file = job.name + ".csv";
    auto os = open_out(out, file);
    write_fidelity_csv(os, tr);
    finish(os, out / file);
    o.files.push_back(file);
    if (zoom_fixed) {
      // Fixed-target oscillations resolved over one time unit around the moving-target peak.
      const auto pk = peak_fidelities(job.params, {job.state}, job.run);
      const double unit = time_unit(job.params);
      IntegratorControls z = c;
      z.window_begin = std::max(0.0, pk[0].t_mov - 0.5 * unit);
      z.window_end = std::min(t_end, pk[0].t_mov + 0.5 * unit);
      z.sample_dt = 1e-4 * unit;
      z.sample_count = 0;
      const FidelityTrace zt = fidelity_trace(integrate(job.params, z.window_end, z), job.state);
      const std::string zfile = job.name + "_fixed_zoom.csv";
      auto zs = open_out(out, zfile);
      write_fidelity_csv(zs, zt);
      finish(zs, out / zfile);
      o.files.push_back(zfile);
    }
  }
  return o;
}

Outputs cmd_sweep(const Job& base, const SweepSpec& spec, const fs::path& out, const std::string& name,
                  unsigned workers) {
  const auto rows = run_sweep(base, spec, workers);
  const std::string file = name + "_summary.csv";
  auto os = open_out(out, file);
  std::vector<std::string> header{spec.axis};
  if (!spec.axis2.empty()) header.push_back(spec.axis2);
  for (const char* h : {"peak_F_fix", "t_peak_fix_over_2pi_g", "peak_F_mov", "t_peak_mov_over_2pi_g",
                        "monotone_in_n"})
    header.emplace_back(h);
  CsvWriter w(os, header);
  const double unit = time_unit(base.params);
  for (const auto& r : rows) {
    std::vector<std::string> cells{format_double(r.value)};
    if (!spec.axis2.empty()) cells.push_back(format_double(r.value2));
    cells.push_back(format_double(r.peak.f_fix));
    cells.push_back(format_double(r.peak.t_fix / unit));
    cells.push_back(format_double(r.peak.f_mov));
    cells.push_back(format_double(r.peak.t_mov / unit));
    cells.emplace_back(r.monotone_in_n ? "pass" : "fail");
    w.text_row(cells);
  }
  finish(os, out / file);
  return {{file}};
}

Outputs cmd_hal_map(const HalMapSpec& spec, const fs::path& out, const std::string& name) {
  const std::string file = name + "_hal.csv";
  auto os = open_out(out, file);
  CsvWriter w(os, {"dphi", "abs_alpha", "r", "log10_hal"});
  for (const auto& c : hal_map(spec)) w.row({c.dphi, c.abs_alpha, c.r, c.log10_hal});
  finish(os, out / file);
  return {{file}};
}

Outputs cmd_oracle(const OracleSpec& spec, const fs::path& out, const std::string& name, unsigned workers) {
  struct Item {
    ErrorReport report;
    OracleRun run;
    SystemParams params;
  };
  const auto items = detail::ordered_map<Item>(spec.photons.size(), workers, [&](std::size_t i) {
    const int N = spec.photons[i];
    Item it;
    it.params = from_dimensionless(1.0, spec.ratio_g_over_dw, spec.ratio_wm_over_g, spec.n_ratio, N);
    it.report = compare_with_semiclassical(it.params, Fock{N}, spec.t_end * time_unit(it.params),
                                           spec.samples, spec.controls, &it.run);
    return it;
  });
  Outputs o;
  json reports = json::array();
  bool decreasing = true;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string file = name + "_N" + std::to_string(spec.photons[i]) + ".csv";
    auto os = open_out(out, file);
    write_oracle_csv(os, items[i].params, items[i].run);
    finish(os, out / file);
    o.files.push_back(file);
    reports.push_back(json::parse(to_json(items[i].report)));
    if (i > 0) decreasing = decreasing && items[i].report.peak_transfer_error < items[i - 1].report.peak_transfer_error;
  }

  // Analytic limits: decoupled mirror and decoupled cavities.
  SystemParams resonant;
  resonant.g = 1.0;
  resonant.kappa0 = 0.0;
  resonant.b0 = 1.0;
  resonant.omega_m = spec.ratio_wm_over_g;
  resonant.n_bar = 1.0;
  std::vector<double> times;
  for (int k = 0; k <= 200; ++k) times.push_back(0.05 * k);
  OracleControls small = spec.controls;
  small.M_max = 2;
  const OracleRun rr = run_oracle(resonant, Fock{1}, times, {}, small);
  double rabi_err = 0.0;
  for (const auto& s : rr.samples) rabi_err = std::max(rabi_err, std::abs(s.n2 - std::pow(std::sin(s.t), 2)));

  SystemParams frozen = from_dimensionless(1.0, spec.ratio_g_over_dw, spec.ratio_wm_over_g, spec.n_ratio, 2.0);
  frozen.g = 0.0;
  const OracleRun fr = run_oracle(frozen, Fock{2}, times, {}, spec.controls);
  double frozen_err = 0.0;
  for (const auto& s : fr.samples) frozen_err = std::max(frozen_err, std::abs(s.n2));

  json rep{{"reports", reports},
           {"peak_transfer_error_decreasing", decreasing},
           {"resonant_rabi_max_error", rabi_err},
           {"decoupled_max_n2", frozen_err}};
  const std::string file = name + "_report.json";
  auto os = open_out(out, file);
  os << rep.dump(2) << "\n";
  finish(os, out / file);
  o.files.push_back(file);
  return o;
}

std::string cmd_check(const Job& job) {
  const RegimeReport r = regime_report(job.params, job.state, job.thresholds);
  json j{{"weak_coupling_ratio", r.weak_coupling_ratio},
         {"slow_mech_ratio", r.slow_mech_ratio},
         {"nu", r.nu},
         {"n_ratio", r.n_ratio},
         {"hal_metric", r.hal_metric ? json(*r.hal_metric) : json(nullptr)},
         {"thresholds", detail::thresholds_to_json(r.thresholds)},
         {"pass_flags",
          {{"weak_coupling", r.pass_flags.weak_coupling},
           {"slow_mechanics", r.pass_flags.slow_mechanics},
           {"adiabatic", r.pass_flags.adiabatic},
           {"above_threshold", r.pass_flags.above_threshold},
           {"high_amplitude", r.pass_flags.high_amplitude}}},
         {"all_pass", r.pass_flags.all()},
         {"failed", r.failed},
         {"warnings", r.warnings}};
  return j.dump(2);
}

void write_manifest(const fs::path& out, const std::string& name, const std::string& command,
                    const std::vector<Job>& jobs, const Outputs& outputs, const std::string& extra) {
  json js = json::array();
  for (const auto& job : jobs) {
    js.push_back({{"name", job.name},
                  {"params", detail::params_to_json(job.params)},
                  {"ratios",
                   {{"g_over_dw", job.params.g / job.params.delta_omega},
                    {"wm_over_g", job.params.omega_m / job.params.g},
                    {"n_ratio", job.params.n_bar / n_threshold(job.params)}}},
                  {"thresholds", detail::thresholds_to_json(job.thresholds)},
                  {"state", state_to_json(job.state)},
                  {"run", run_to_json(job.run)}});
  }
  json m{{"name", name},
         {"command", command},
         {"version", version()},
         {"time_unit", "2*pi/g"},
         {"jobs", js},
         {"outputs", outputs.files},
         {"extra", json::parse(extra)}};
  const std::string file = name + "_manifest.json";
  auto os = open_out(out, file);
  os << m.dump(2) << "\n";
  finish(os, out / file);
}

}  // namespace dynres
