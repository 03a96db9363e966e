#pragma once

// Dormand-Prince 8(5,3) explicit Runge-Kutta integrator with adaptive step
// control and 7th-order continuous (dense) output. Tableau and dense-output
// coefficients are Hairer's DOP853 values.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace dynres::ode {

namespace dop853_tableau {
inline constexpr std::array<double, 16> kC = {0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274, 0.2816496580927726, 0.3333333333333333, 0.25, 0.3076923076923077, 0.6512820512820513, 0.6, 0.8571428571428571, 1.0, 1.0, 0.1, 0.2, 0.7777777777777778};
inline constexpr std::array<std::array<double, 16>, 16> kA = {{
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259, 0.0, 0.0, 0.0, 0.0},
    {0.056167502283047954, 0.0, 0.0, 0.0, 0.0, 0.0, 0.25350021021662483, -0.2462390374708025, -0.12419142326381637, 0.15329179827876568, 0.00820105229563469, 0.007567897660545699, -0.008298, 0.0, 0.0, 0.0},
    {0.03183464816350214, 0.0, 0.0, 0.0, 0.0, 0.028300909672366776, 0.053541988307438566, -0.05492374857139099, 0.0, 0.0, -0.00010834732869724932, 0.0003825710908356584, -0.00034046500868740456, 0.1413124436746325, 0.0, 0.0},
    {-0.42889630158379194, 0.0, 0.0, 0.0, 0.0, -4.697621415361164, 7.683421196062599, 4.06898981839711, 0.3567271874552811, 0.0, 0.0, 0.0, -0.0013990241651590145, 2.9475147891527724, -9.15095847217987, 0.0}}};
inline constexpr std::array<double, 13> kE3 = {-0.18980075407240762, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, -0.4226823213237919, -0.1521609496625161, 0.20136540080403034, 0.02265179219836082, 0.0};
inline constexpr std::array<double, 13> kE5 = {0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -0.4957589496572502, 1.6643771824549864, -0.35032884874997366, 0.3341791187130175, 0.08192320648511571, -0.022355307863886294, 0.0};
inline constexpr std::array<std::array<double, 16>, 4> kD = {{
    {-8.428938276109013, 0.0, 0.0, 0.0, 0.0, 0.5667149535193777, -3.0689499459498917, 2.38466765651207, 2.117034582445028, -0.871391583777973, 2.2404374302607883, 0.6315787787694688, -0.08899033645133331, 18.148505520854727, -9.194632392478356, -4.436036387594894},
    {10.427508642579134, 0.0, 0.0, 0.0, 0.0, 242.28349177525817, 165.20045171727028, -374.5467547226902, -22.113666853125306, 7.733432668472264, -30.674084731089398, -9.332130526430229, 15.697238121770845, -31.139403219565178, -9.35292435884448, 35.81684148639408},
    {19.985053242002433, 0.0, 0.0, 0.0, 0.0, -387.0373087493518, -189.17813819516758, 527.8081592054236, -11.57390253995963, 6.8812326946963, -1.0006050966910838, 0.7777137798053443, -2.778205752353508, -60.19669523126412, 84.32040550667716, 11.99229113618279},
    {-25.69393346270375, 0.0, 0.0, 0.0, 0.0, -154.18974869023643, -231.5293791760455, 357.6391179106141, 93.40532418362432, -37.45832313645163, 104.0996495089623, 29.8402934266605, -43.53345659001114, 96.32455395918828, -39.17726167561544, -149.72683625798564}}};
}  // namespace dop853_tableau

template <std::size_t N>
using Vec = std::array<double, N>;

/// Per-component tolerances; the local error of component i is held below
/// atol[i] + rtol[i] * max(|y_old[i]|, |y_new[i]|).
template <std::size_t N>
struct Tolerances {
  Vec<N> rtol;
  Vec<N> atol;

  static Tolerances uniform(double rtol, double atol) {
    Tolerances tol;
    tol.rtol.fill(rtol);
    tol.atol.fill(atol);
    return tol;
  }
};

struct StepOptions {
  double first_step = 0.0;  // 0 selects automatically
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 500'000'000;
};

enum class Status { success, step_underflow, too_many_steps, non_finite };

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

template <std::size_t N>
struct Result {
  Status status = Status::success;
  double t = 0.0;
  Vec<N> y{};
  Stats stats;
};

/// One accepted step, handed to the step observer. Dense output is built
/// lazily on the first call to `at`, costing three extra RHS evaluations.
template <std::size_t N, class Rhs>
class AcceptedStep {
 public:
  AcceptedStep(Rhs& rhs, Stats& stats, double t_old, double t_new,
               const Vec<N>& y_old, const Vec<N>& y_new,
               std::array<Vec<N>, 16>& k)
      : rhs_(rhs), stats_(stats), t_old_(t_old), t_new_(t_new),
        y_old_(y_old), y_new_(y_new), k_(k) {}

  double t_old() const { return t_old_; }
  double t_new() const { return t_new_; }
  const Vec<N>& y_old() const { return y_old_; }
  const Vec<N>& y_new() const { return y_new_; }

  Vec<N> at(double t) {
    if (t == t_new_) return y_new_;
    if (t == t_old_) return y_old_;
    if (!dense_ready_) build_dense();
    const double x = (t - t_old_) / (t_new_ - t_old_);
    Vec<N> y{};
    for (int i = 0; i < 7; ++i) {
      const auto& f = coeff_[6 - i];
      const double w = (i % 2 == 0) ? x : 1.0 - x;
      for (std::size_t j = 0; j < N; ++j) y[j] = (y[j] + f[j]) * w;
    }
    for (std::size_t j = 0; j < N; ++j) y[j] += y_old_[j];
    return y;
  }

 private:
  void build_dense() {
    using namespace dop853_tableau;
    const double h = t_new_ - t_old_;
    for (std::size_t s = 13; s < 16; ++s) {
      Vec<N> ys = y_old_;
      for (std::size_t j = 0; j < s; ++j) {
        const double a = kA[s][j];
        if (a == 0.0) continue;
        for (std::size_t i = 0; i < N; ++i) ys[i] += h * a * k_[j][i];
      }
      rhs_(t_old_ + kC[s] * h, ys, k_[s]);
      ++stats_.rhs_evals;
    }
    for (std::size_t i = 0; i < N; ++i) {
      const double dy = y_new_[i] - y_old_[i];
      coeff_[0][i] = dy;
      coeff_[1][i] = h * k_[0][i] - dy;
      coeff_[2][i] = 2.0 * dy - h * (k_[12][i] + k_[0][i]);
    }
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t i = 0; i < N; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 16; ++j) acc += kD[r][j] * k_[j][i];
        coeff_[3 + r][i] = h * acc;
      }
    }
    dense_ready_ = true;
  }

  Rhs& rhs_;
  Stats& stats_;
  double t_old_, t_new_;
  const Vec<N>& y_old_;
  const Vec<N>& y_new_;
  std::array<Vec<N>, 16>& k_;
  std::array<Vec<N>, 7> coeff_{};
  bool dense_ready_ = false;
};

namespace detail {

template <std::size_t N>
double rms_scaled(const Vec<N>& v, const Vec<N>& scale) {
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double q = v[i] / scale[i];
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(N));
}

template <std::size_t N>
bool all_finite(const Vec<N>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 to t1 (either direction). `rhs` has the
/// signature void(double t, const Vec<N>& y, Vec<N>& dydt). `on_step` is
/// called with an AcceptedStep<N, Rhs>& after every accepted step.
template <std::size_t N, class Rhs, class OnStep>
Result<N> integrate(Rhs&& rhs, double t0, const Vec<N>& y0, double t1,
                    const Tolerances<N>& tol, const StepOptions& opts,
                    OnStep&& on_step) {
  using namespace dop853_tableau;
  using RhsRef = std::remove_reference_t<Rhs>;
  constexpr double kSafety = 0.9;
  constexpr double kMinFactor = 0.2;
  constexpr double kMaxFactor = 10.0;
  constexpr double kErrExponent = -1.0 / 8.0;

  Result<N> res;
  res.t = t0;
  res.y = y0;
  if (t1 == t0) return res;
  const double dir = t1 > t0 ? 1.0 : -1.0;

  std::array<Vec<N>, 16> k{};
  Vec<N> y = y0;
  double t = t0;
  rhs(t, y, k[0]);
  ++res.stats.rhs_evals;

  auto scale_of = [&](const Vec<N>& a, const Vec<N>& b) {
    Vec<N> s;
    for (std::size_t i = 0; i < N; ++i)
      s[i] = tol.atol[i] + tol.rtol[i] * std::max(std::abs(a[i]), std::abs(b[i]));
    return s;
  };

  double h = opts.first_step;
  if (h <= 0.0) {
    const Vec<N> scale = scale_of(y, y);
    const double d0 = detail::rms_scaled(y, scale);
    const double d1 = detail::rms_scaled(k[0], scale);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, std::abs(t1 - t0));
    Vec<N> y1, f1, df;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + dir * h0 * k[0][i];
    rhs(t + dir * h0, y1, f1);
    ++res.stats.rhs_evals;
    for (std::size_t i = 0; i < N; ++i) df[i] = f1[i] - k[0][i];
    const double d2 = detail::rms_scaled(df, scale) / h0;
    const double h1 = (d1 <= 1e-15 && d2 <= 1e-15)
                          ? std::max(1e-6, h0 * 1e-3)
                          : std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
    h = std::min(100.0 * h0, h1);
  }
  h = std::min(h, opts.max_step);

  Vec<N> y_new, y_err5, y_err3, ys;
  bool last_rejected = false;
  while (dir * (t1 - t) > 0.0) {
    if (res.stats.accepted >= opts.max_steps) {
      res.status = Status::too_many_steps;
      break;
    }
    const double min_step =
        10.0 * std::abs(std::nextafter(t, dir * std::numeric_limits<double>::infinity()) - t);
    bool accepted = false;
    double h_used = 0.0;
    while (!accepted) {
      if (h < min_step) {
        res.status = Status::step_underflow;
        res.t = t;
        res.y = y;
        return res;
      }
      double t_next = t + dir * h;
      if (dir * (t_next - t1) > 0.0) t_next = t1;
      h_used = std::abs(t_next - t);
      const double hs = dir * h_used;

      for (std::size_t s = 1; s < 12; ++s) {
        ys = y;
        for (std::size_t j = 0; j < s; ++j) {
          const double a = kA[s][j];
          if (a == 0.0) continue;
          for (std::size_t i = 0; i < N; ++i) ys[i] += hs * a * k[j][i];
        }
        rhs(t + kC[s] * hs, ys, k[s]);
      }
      y_new = y;
      for (std::size_t j = 0; j < 12; ++j) {
        const double bj = kA[12][j];
        if (bj == 0.0) continue;
        for (std::size_t i = 0; i < N; ++i) y_new[i] += hs * bj * k[j][i];
      }
      rhs(t_next, y_new, k[12]);
      res.stats.rhs_evals += 12;

      if (!detail::all_finite(y_new)) {
        res.status = Status::non_finite;
        res.t = t;
        res.y = y;
        return res;
      }

      const Vec<N> scale = scale_of(y, y_new);
      for (std::size_t i = 0; i < N; ++i) {
        double e5 = 0.0, e3 = 0.0;
        for (std::size_t j = 0; j < 13; ++j) {
          e5 += kE5[j] * k[j][i];
          e3 += kE3[j] * k[j][i];
        }
        y_err5[i] = e5 / scale[i];
        y_err3[i] = e3 / scale[i];
      }
      double n5 = 0.0, n3 = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        n5 += y_err5[i] * y_err5[i];
        n3 += y_err3[i] * y_err3[i];
      }
      double err = 0.0;
      if (n5 != 0.0 || n3 != 0.0)
        err = h_used * n5 / std::sqrt((n5 + 0.01 * n3) * static_cast<double>(N));

      if (err < 1.0) {
        double factor = err == 0.0 ? kMaxFactor
                                   : std::min(kMaxFactor, kSafety * std::pow(err, kErrExponent));
        if (last_rejected) factor = std::min(1.0, factor);
        h = std::min(h_used * factor, opts.max_step);
        accepted = true;
        last_rejected = false;
        ++res.stats.accepted;
        const double t_old = t;
        AcceptedStep<N, RhsRef> step(rhs, res.stats, t_old, t_next, y, y_new, k);
        on_step(step);
        t = t_next;
        y = y_new;
        k[0] = k[12];
      } else {
        h = h_used * std::max(kMinFactor, kSafety * std::pow(err, kErrExponent));
        last_rejected = true;
        ++res.stats.rejected;
      }
    }
  }
  res.t = t;
  res.y = y;
  return res;
}

}  // namespace dynres::ode
