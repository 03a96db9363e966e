#include "dynres/input_state.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "dynres/errors.hpp"

namespace dynres {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// exp(G) v for anti-Hermitian G, through the spectrum of the Hermitian iG.
Eigen::VectorXcd apply_unitary_exp(const Eigen::MatrixXcd& generator, const Eigen::VectorXcd& v) {
  const Eigen::MatrixXcd herm = cplx(0.0, 1.0) * generator;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  const Eigen::VectorXcd phase =
      (es.eigenvalues().cast<cplx>() * cplx(0.0, -1.0)).array().exp().matrix();
  return es.eigenvectors() * phase.asDiagonal() * (es.eigenvectors().adjoint() * v);
}

std::vector<cplx> coherent_amplitudes(cplx alpha, int n_max) {
  std::vector<cplx> c(static_cast<std::size_t>(n_max) + 1, 0.0);
  const double a = std::abs(alpha);
  const double phi = std::arg(alpha);
  for (int n = 0; n <= n_max; ++n) {
    if (a == 0.0) {
      c[static_cast<std::size_t>(n)] = n == 0 ? 1.0 : 0.0;
      continue;
    }
    const double log_mag = -0.5 * a * a + n * std::log(a) - 0.5 * std::lgamma(n + 1.0);
    c[static_cast<std::size_t>(n)] = std::polar(std::exp(log_mag), n * phi);
  }
  return c;
}

std::vector<cplx> displaced_squeezed_amplitudes(cplx alpha, cplx eta, int n_max) {
  const double r = std::abs(eta);
  const int pad = 80 + static_cast<int>(std::ceil(6.0 * std::norm(alpha) + 40.0 * std::exp(2.0 * r)));
  const int dim = n_max + 1 + pad;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const Eigen::MatrixXcd ad = a.adjoint();
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v(0) = 1.0;
  if (r > 0.0) v = apply_unitary_exp(0.5 * (std::conj(eta) * a * a - eta * ad * ad), v);
  if (std::abs(alpha) > 0.0) v = apply_unitary_exp(alpha * ad - std::conj(alpha) * a, v);
  std::vector<cplx> c(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) c[static_cast<std::size_t>(n)] = v(n);
  return c;
}

}  // namespace

void validate(const InputState& state) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Fock>) {
          if (s.n < 0) throw ConfigError("Fock state: n must be >= 0");
        } else if constexpr (std::is_same_v<S, Coherent>) {
          if (!finite(s.alpha)) throw ConfigError("coherent state: alpha must be finite");
        } else if constexpr (std::is_same_v<S, Cat>) {
          if (!finite(s.alpha)) throw ConfigError("cat state: alpha must be finite");
          if (s.parity == Parity::odd && s.alpha == cplx(0.0))
            throw ConfigError("odd cat state: alpha = 0 has no normalizable state");
        } else {
          if (!finite(s.alpha) || !finite(s.eta))
            throw ConfigError("displaced squeezed state: alpha and eta must be finite");
        }
      },
      state);
}

double cat_normalization(cplx alpha, Parity parity) {
  const double e = std::exp(-2.0 * std::norm(alpha));
  const double d = parity == Parity::even ? 1.0 + e : -std::expm1(-2.0 * std::norm(alpha));
  if (d <= 0.0) throw ConfigError("cat state: singular normalization");
  return 1.0 / std::sqrt(2.0 * d);
}

double mean_photon_number(const InputState& state) {
  return std::visit(
      [](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Fock>) {
          return s.n;
        } else if constexpr (std::is_same_v<S, Coherent>) {
          return std::norm(s.alpha);
        } else if constexpr (std::is_same_v<S, Cat>) {
          const double a2 = std::norm(s.alpha);
          if (a2 == 0.0) return 0.0;
          return s.parity == Parity::even ? a2 * std::tanh(a2) : a2 / std::tanh(a2);
        } else {
          const double sh = std::sinh(std::abs(s.eta));
          return std::norm(s.alpha) + sh * sh;
        }
      },
      state);
}

std::vector<cplx> number_amplitudes(const InputState& state, int n_max) {
  if (n_max < 0) throw ConfigError("number_amplitudes: n_max must be >= 0");
  validate(state);
  return std::visit(
      [n_max](const auto& s) -> std::vector<cplx> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Fock>) {
          std::vector<cplx> c(static_cast<std::size_t>(n_max) + 1, 0.0);
          if (s.n <= n_max) c[static_cast<std::size_t>(s.n)] = 1.0;
          return c;
        } else if constexpr (std::is_same_v<S, Coherent>) {
          return coherent_amplitudes(s.alpha, n_max);
        } else if constexpr (std::is_same_v<S, Cat>) {
          auto c = coherent_amplitudes(s.alpha, n_max);
          const double norm2 = 2.0 * cat_normalization(s.alpha, s.parity);
          const int keep = s.parity == Parity::even ? 0 : 1;
          for (int n = 0; n <= n_max; ++n)
            c[static_cast<std::size_t>(n)] *= (n % 2 == keep) ? norm2 : 0.0;
          return c;
        } else {
          return displaced_squeezed_amplitudes(s.alpha, s.eta, n_max);
        }
      },
      state);
}

std::string describe(const InputState& state) {
  std::ostringstream os;
  os.precision(6);
  std::visit(
      [&os](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Fock>)
          os << "fock(n=" << s.n << ")";
        else if constexpr (std::is_same_v<S, Coherent>)
          os << "coherent(alpha=" << s.alpha << ")";
        else if constexpr (std::is_same_v<S, Cat>)
          os << "cat(alpha=" << s.alpha << ", parity=" << (s.parity == Parity::even ? "+" : "-") << ")";
        else
          os << "displaced_squeezed(alpha=" << s.alpha << ", eta=" << s.eta << ")";
      },
      state);
  return os.str();
}

}  // namespace dynres
