#include "dynres/params.hpp"

#include <cmath>
#include <limits>
#include <variant>

#include "dynres/errors.hpp"
#include "json_io.hpp"

namespace dynres {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

bool finite_all(std::initializer_list<double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void SystemParams::check_simulable() const {
  require(finite_all({g, delta_omega, omega_m, kappa0, b0, gamma1, gamma2, gamma_m, n_bar}),
          "SystemParams: all fields must be finite");
  require(g >= 0.0, "SystemParams: g must be >= 0");
  require(kappa0 >= 0.0, "SystemParams: kappa0 must be >= 0");
  require(omega_m > 0.0, "SystemParams: omega_m must be > 0");
  require(b0 > 0.0, "SystemParams: b0 must be > 0");
  require(n_bar >= 0.0, "SystemParams: n_bar must be >= 0");
  require(gamma1 >= 0.0 && gamma2 >= 0.0 && gamma_m >= 0.0,
          "SystemParams: decay rates must be >= 0");
}

void SystemParams::validate() const {
  check_simulable();
  require(g > 0.0, "SystemParams: g must be > 0");
  require(delta_omega > 0.0, "SystemParams: delta_omega must be > 0");
  require(kappa0 > 0.0, "SystemParams: kappa0 must be > 0");
  const double split = 2.0 * kappa0 * b0;
  require(std::abs(delta_omega - split) <= 1e-9 * delta_omega,
          "SystemParams: delta_omega must equal 2 kappa0 b0");
}

double n_threshold(const SystemParams& p) { return p.omega_m * p.b0 / (2.0 * p.kappa0); }

SystemParams from_dimensionless(double g, double ratio_g_over_dw, double ratio_wm_over_g,
                                double n_ratio, double n_bar) {
  require(finite_all({g, ratio_g_over_dw, ratio_wm_over_g, n_ratio, n_bar}),
          "from_dimensionless: inputs must be finite");
  require(g > 0.0 && ratio_g_over_dw > 0.0 && ratio_wm_over_g > 0.0 && n_ratio > 0.0 && n_bar > 0.0,
          "from_dimensionless: all inputs must be > 0");
  SystemParams p;
  p.g = g;
  p.delta_omega = g / ratio_g_over_dw;
  p.omega_m = g * ratio_wm_over_g;
  p.n_bar = n_bar;
  const double n_thr = n_bar / n_ratio;
  p.kappa0 = std::sqrt(p.omega_m * p.delta_omega / (4.0 * n_thr));
  p.b0 = std::sqrt(p.delta_omega * n_thr / p.omega_m);
  return p;
}

double adiabaticity_nu(const SystemParams& p) {
  return 0.125 * (p.n_bar / n_threshold(p)) * (p.omega_m * p.delta_omega / (p.g * p.g));
}

double hal_displaced_squeezed(cplx alpha, cplx eta) {
  require(std::isfinite(alpha.real()) && std::isfinite(alpha.imag()) &&
              std::isfinite(eta.real()) && std::isfinite(eta.imag()),
          "hal_displaced_squeezed: non-finite input");
  const double a2 = std::norm(alpha);
  const double r = std::abs(eta);
  const double dphi = std::arg(eta) - 2.0 * std::arg(alpha);
  const double sh2r = std::sinh(2.0 * r);
  const double shr = std::sinh(r);
  const double num = std::sqrt(a2 * (std::cosh(2.0 * r) - sh2r * std::cos(dphi)) + 0.5 * sh2r * sh2r);
  const double den = a2 + shr * shr;
  if (den == 0.0) return std::numeric_limits<double>::infinity();  // vacuum
  return num / den;
}

double CatHal::ratio() const {
  return rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
}

CatHal hal_cat(cplx alpha, Parity parity) {
  const double a2 = std::norm(alpha);
  const double corr = 2.0 * a2 * std::exp(-2.0 * a2);
  return {parity == Parity::even ? 1.0 + corr : 1.0 - corr, std::sqrt(a2)};
}

double hal_fock(int n) {
  if (n <= 0) throw ConfigError("hal_fock: n must be >= 1 (mean population difference vanishes)");
  return 0.0;
}

double hal_metric(const InputState& state) {
  return std::visit(
      [](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Fock>) return hal_fock(s.n);
        else if constexpr (std::is_same_v<S, Coherent>) return hal_displaced_squeezed(s.alpha, 0.0);
        else if constexpr (std::is_same_v<S, Cat>) return hal_cat(s.alpha, s.parity).ratio();
        else return hal_displaced_squeezed(s.alpha, s.eta);
      },
      state);
}

RegimeReport regime_report(const SystemParams& p, const InputState& state,
                           const Thresholds& thresholds) {
  p.validate();
  validate(state);
  RegimeReport rep;
  rep.thresholds = thresholds;
  rep.weak_coupling_ratio = p.g / p.delta_omega;
  rep.slow_mech_ratio = p.omega_m / p.g;
  rep.nu = adiabaticity_nu(p);
  rep.n_ratio = p.n_bar / n_threshold(p);
  rep.hal_metric = hal_metric(state);

  auto& f = rep.pass_flags;
  f.weak_coupling = rep.weak_coupling_ratio <= thresholds.weak_coupling;
  f.slow_mechanics = rep.slow_mech_ratio <= thresholds.slow_mechanics;
  f.adiabatic = rep.nu <= thresholds.adiabaticity;
  f.above_threshold = rep.n_ratio > thresholds.min_n_ratio;
  f.high_amplitude = *rep.hal_metric <= thresholds.hal;

  if (!f.weak_coupling) rep.failed.emplace_back("weak_coupling");
  if (!f.slow_mechanics) rep.failed.emplace_back("slow_mechanics");
  if (!f.adiabatic) rep.failed.emplace_back("adiabaticity");
  if (!f.above_threshold) {
    rep.failed.emplace_back("above_threshold");
    rep.warnings.emplace_back("n_bar/n_thr <= " + std::to_string(thresholds.min_n_ratio) +
                              ": the mirror never reaches the resonance point, no transfer expected");
  }
  if (!f.high_amplitude) rep.failed.emplace_back("high_amplitude");
  if (rep.slow_mech_ratio > rep.weak_coupling_ratio)
    rep.warnings.emplace_back("omega_m/g exceeds g/delta_omega; adiabatic ordering violated");
  return rep;
}

namespace detail {

ParamsConfig params_from_json_value(const json& j) {
  constexpr std::string_view where = "params";
  reject_unknown_keys(j, {"g", "ratio_g_over_dw", "ratio_wm_over_g", "n_ratio", "n_bar", "gammas",
                          "thresholds"},
                      where);
  ParamsConfig cfg;
  const double g = get_number_or(j, "g", 1.0, where);
  cfg.params = from_dimensionless(g, get_number(j, "ratio_g_over_dw", where),
                                  get_number(j, "ratio_wm_over_g", where),
                                  get_number(j, "n_ratio", where), get_number(j, "n_bar", where));
  if (j.contains("gammas")) {
    const auto& gj = j.at("gammas");
    reject_unknown_keys(gj, {"gamma1", "gamma2", "gamma_m"}, "params.gammas");
    cfg.params.gamma1 = get_number_or(gj, "gamma1", 0.0, "params.gammas");
    cfg.params.gamma2 = get_number_or(gj, "gamma2", 0.0, "params.gammas");
    cfg.params.gamma_m = get_number_or(gj, "gamma_m", 0.0, "params.gammas");
  }
  if (j.contains("thresholds")) {
    const auto& tj = j.at("thresholds");
    constexpr std::string_view tw = "params.thresholds";
    reject_unknown_keys(tj, {"weak_coupling", "slow_mechanics", "adiabaticity", "hal", "min_n_ratio"},
                        tw);
    auto& t = cfg.thresholds;
    t.weak_coupling = get_number_or(tj, "weak_coupling", t.weak_coupling, tw);
    t.slow_mechanics = get_number_or(tj, "slow_mechanics", t.slow_mechanics, tw);
    t.adiabaticity = get_number_or(tj, "adiabaticity", t.adiabaticity, tw);
    t.hal = get_number_or(tj, "hal", t.hal, tw);
    t.min_n_ratio = get_number_or(tj, "min_n_ratio", t.min_n_ratio, tw);
  }
  cfg.params.validate();
  return cfg;
}

json params_to_json(const SystemParams& p) {
  return json{{"g", p.g},           {"delta_omega", p.delta_omega}, {"omega_m", p.omega_m},
              {"kappa0", p.kappa0}, {"b0", p.b0},                   {"gamma1", p.gamma1},
              {"gamma2", p.gamma2}, {"gamma_m", p.gamma_m},         {"n_bar", p.n_bar},
              {"n_thr", n_threshold(p)}};
}

json thresholds_to_json(const Thresholds& t) {
  return json{{"weak_coupling", t.weak_coupling}, {"slow_mechanics", t.slow_mechanics},
              {"adiabaticity", t.adiabaticity},   {"hal", t.hal},
              {"min_n_ratio", t.min_n_ratio}};
}

}  // namespace detail

ParamsConfig params_from_json(const std::string& json_text) {
  detail::json j;
  try {
    j = detail::json::parse(json_text);
  } catch (const detail::json::parse_error& e) {
    throw ConfigError(std::string("params: invalid JSON: ") + e.what());
  }
  return detail::params_from_json_value(j);
}

}  // namespace dynres
