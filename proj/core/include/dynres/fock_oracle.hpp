#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dynres/errors.hpp"
#include "dynres/input_state.hpp"
#include "dynres/params.hpp"

namespace dynres {

/// Basis of the block with N cavity photons: |n1, N - n1> (x) |m>, m <= M_max.
struct BlockBasis {
  int N = 0;
  int M_max = 0;

  std::size_t dim() const {
    return static_cast<std::size_t>(N + 1) * static_cast<std::size_t>(M_max + 1);
  }
  std::size_t index(int n1, int m) const {
    return static_cast<std::size_t>(n1) * static_cast<std::size_t>(M_max + 1) +
           static_cast<std::size_t>(m);
  }
  int n1_of(std::size_t i) const { return static_cast<int>(i / static_cast<std::size_t>(M_max + 1)); }
  int m_of(std::size_t i) const { return static_cast<int>(i % static_cast<std::size_t>(M_max + 1)); }
};

/// Real symmetric block Hamiltonian in CSR form:
///   H = g (a1+ a2 + h.c.) + 2 kappa0 b0 (1 - (b + b+)/(2 b0)) (n1 - n2) + omega_m b+ b.
class BlockHamiltonian {
 public:
  BlockHamiltonian() = default;
  BlockHamiltonian(BlockBasis basis, std::vector<std::size_t> row_ptr, std::vector<std::size_t> col,
                   std::vector<double> val);

  const BlockBasis& basis() const { return basis_; }
  std::size_t dim() const { return basis_.dim(); }
  std::size_t nonzeros() const { return val_.size(); }

  /// y = H x
  void apply(const cplx* x, cplx* y) const;
  double element(std::size_t i, std::size_t j) const;
  /// max |H_ij - H_ji| over stored entries.
  double hermiticity_defect() const;
  std::vector<double> to_dense() const;  ///< row-major dim x dim

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& cols() const { return col_; }
  const std::vector<double>& values() const { return val_; }

 private:
  BlockBasis basis_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_;
  std::vector<double> val_;
};

inline constexpr std::size_t kDefaultNonzeroCap = 2'000'000;

/// Throws ConfigError for N < 0 or M_max < 0, and when the block would hold
/// more than nnz_cap stored entries.
BlockHamiltonian build_hamiltonian(const SystemParams& p, int N, int M_max,
                                   std::size_t nnz_cap = kDefaultNonzeroCap);

/// ceil(4 (2 b)^2 + 10 (2 b) + 20) with b = kappa0 N / omega_m.
int auto_phonon_cutoff(const SystemParams& p, int N);

/// Amplitudes for one photon-number block.
struct BlockState {
  int N = 0;
  std::vector<cplx> amp;
};

/// Cavities (x) mechanics; blocks never mix under the Hamiltonian.
struct QuantumState {
  int M_max = 0;
  std::vector<BlockState> blocks;

  double norm2() const;
};

/// |psi> on cavity 1, vacuum on cavity 2 and on the oscillator. Blocks with
/// weight below 1e-14 are dropped; a tail above 1e-8 beyond N_max throws
/// TruncationError suggesting a larger N_max.
QuantumState prepare_input(const InputState& state, int N_max, int M_max);

/// Smallest N_max whose tail weight is below 1e-8.
int auto_photon_cutoff(const InputState& state);

struct OracleControls {
  int M_max = -1;                ///< < 0: auto_phonon_cutoff at the largest block
  int krylov_dim = 30;
  double krylov_tol = 1e-12;     ///< per-step error estimate bound
  std::size_t dense_below = 500; ///< full diagonalization under this dimension
  double leakage_bound = 1e-6;
  std::size_t nnz_cap = kDefaultNonzeroCap;
  unsigned workers = 1;
};

/// Population in the top two phonon levels.
double phonon_leakage(const QuantumState& psi);

/// exp(-i H t) applied block by block. Throws TruncationError when the
/// phonon leakage at t exceeds ctrl.leakage_bound.
QuantumState evolve(const QuantumState& psi, const SystemParams& p, double t,
                    const OracleControls& ctrl = {});

enum class Target { fixed, moving, initial };

/// <target| Tr_m rho |target>, the target placed on cavity 2 (cavity 1 for
/// `initial`), rotated by e^{i n theta} for `moving`.
double oracle_fidelity(const QuantumState& psi, const InputState& target, Target which,
                       double theta = 0.0);

/// Observables recorded per sample by a sampled oracle run.
struct OracleSample {
  double t = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  cplx b{};          ///< <b>
  double f_fix = 0.0;
  double f_mov = 0.0;
  double leakage = 0.0;
  double norm = 0.0;
};

struct OracleRun {
  int M_max = 0;
  std::vector<int> block_sizes;
  std::vector<OracleSample> samples;
  double max_leakage = 0.0;
  double max_norm_defect = 0.0;
  std::size_t krylov_steps = 0;
};

/// Propagates the prepared input over `times` (non-decreasing, from 0) and
/// records observables; `thetas` (same length, or empty) drives the moving
/// target. Fidelities are against `state` itself.
OracleRun run_oracle(const SystemParams& p, const InputState& state,
                     const std::vector<double>& times, const std::vector<double>& thetas,
                     const OracleControls& ctrl = {});

struct ErrorReport {
  int N_max = 0;
  int M_max = 0;
  double n_bar = 0.0;
  double peak_transfer_oracle = 0.0;
  double peak_transfer_semiclassical = 0.0;
  double peak_transfer_error = 0.0;
  double population_sup_error = 0.0;
  double peak_fidelity_oracle = 0.0;
  double peak_fidelity_closed_form = 0.0;
  double fidelity_gap = 0.0;
  double max_phonon_leakage = 0.0;
  double max_norm_defect = 0.0;
  std::size_t samples = 0;
};

/// Runs the oracle and the semiclassical pipeline on identical parameters
/// (n_bar set to the state's mean photon number) over `samples` evenly spaced
/// times in [0, t_end]. The closed-form fidelity uses the adiabatic solution.
ErrorReport compare_with_semiclassical(const SystemParams& p, const InputState& state,
                                       double t_end, std::size_t samples = 2001,
                                       const OracleControls& ctrl = {},
                                       OracleRun* run_out = nullptr);

std::string to_json(const ErrorReport& report);

/// Oracle populations in the semiclassical CSV schema (b from <b>).
void write_oracle_csv(std::ostream& os, const SystemParams& p, const OracleRun& run);

}  // namespace dynres
