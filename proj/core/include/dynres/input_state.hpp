#pragma once

#include <complex>
#include <string>
#include <variant>
#include <vector>

namespace dynres {

using cplx = std::complex<double>;

enum class Parity { even, odd };

/// Number state |n>.
struct Fock {
  int n = 0;
};

/// Coherent state |alpha>.
struct Coherent {
  cplx alpha;
};

/// Cat state N(|alpha> + |-alpha>) for even parity, N(|alpha> - |-alpha>) for odd.
struct Cat {
  cplx alpha;
  Parity parity = Parity::even;
};

/// D(alpha) S(eta) |0> with S(eta) = exp[(eta* a^2 - eta a+^2) / 2], eta = r e^{i phi}.
struct DisplacedSqueezed {
  cplx alpha;
  cplx eta;
};

/// Single-mode state loaded into cavity 1 at t = 0 (cavity 2 starts in vacuum).
using InputState = std::variant<Fock, Coherent, Cat, DisplacedSqueezed>;

/// Throws ConfigError on a negative photon number, non-finite amplitude, or an
/// odd cat with alpha = 0 (singular normalization).
void validate(const InputState& state);

/// Cat normalization 1 / sqrt(2 (1 +- exp(-2|alpha|^2))).
double cat_normalization(cplx alpha, Parity parity);

double mean_photon_number(const InputState& state);

/// Number-basis amplitudes <n|psi> for n = 0..n_max.
std::vector<cplx> number_amplitudes(const InputState& state, int n_max);

std::string describe(const InputState& state);

}  // namespace dynres
