#include "dynres/fock_oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include "json.hpp"
#include <numeric>
#include <ostream>

#include "dynres/adiabatic.hpp"
#include "dynres/csv.hpp"
#include "dynres/fidelity.hpp"
#include "dynres/semiclassical.hpp"

namespace dynres {

BlockHamiltonian::BlockHamiltonian(BlockBasis basis, std::vector<std::size_t> row_ptr,
                                   std::vector<std::size_t> col, std::vector<double> val)
    : basis_(basis), row_ptr_(std::move(row_ptr)), col_(std::move(col)), val_(std::move(val)) {}

void BlockHamiltonian::apply(const cplx* x, cplx* y) const {
  const std::size_t n = dim();
  for (std::size_t i = 0; i < n; ++i) {
    cplx acc{};
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += val_[k] * x[col_[k]];
    y[i] = acc;
  }
}

double BlockHamiltonian::element(std::size_t i, std::size_t j) const {
  const auto b = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto e = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(b, e, j);
  return it != e && *it == j ? val_[static_cast<std::size_t>(it - col_.begin())] : 0.0;
}

double BlockHamiltonian::hermiticity_defect() const {
  double d = 0.0;
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      d = std::max(d, std::abs(val_[k] - element(col_[k], i)));
  return d;
}

std::vector<double> BlockHamiltonian::to_dense() const {
  const std::size_t n = dim();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out[i * n + col_[k]] = val_[k];
  return out;
}

BlockHamiltonian build_hamiltonian(const SystemParams& p, int N, int M_max, std::size_t nnz_cap) {
  p.check_simulable();
  if (N < 0) throw ConfigError("build_hamiltonian: N must be >= 0");
  if (M_max < 0) throw ConfigError("build_hamiltonian: M_max must be >= 0");
  const BlockBasis basis{N, M_max};
  const std::size_t n = basis.dim();
  const std::size_t Nn = static_cast<std::size_t>(N), Mm = static_cast<std::size_t>(M_max);
  const std::size_t bound = n + 2 * Nn * (Mm + 1) + 2 * (Nn + 1) * Mm;
  if (bound > nnz_cap)
    throw ConfigError("build_hamiltonian: block of dimension " + std::to_string(n) +
                      " exceeds the nonzero cap of " + std::to_string(nnz_cap));
  const double split = 2.0 * p.kappa0 * p.b0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col;
  std::vector<double> val;
  row_ptr.reserve(n + 1);
  col.reserve(5 * n);
  val.reserve(5 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const int n1 = basis.n1_of(i);
    const int m = basis.m_of(i);
    const double dn = 2.0 * n1 - N;
    auto push = [&](std::size_t j, double v) {
      if (v != 0.0 || j == i) {
        col.push_back(j);
        val.push_back(v);
      }
    };
    // Column order must be ascending within the row.
    if (n1 > 0) push(basis.index(n1 - 1, m), p.g * std::sqrt(double(n1) * double(N - n1 + 1)));
    if (m > 0) push(basis.index(n1, m - 1), -p.kappa0 * dn * std::sqrt(double(m)));
    push(i, split * dn + p.omega_m * m);
    if (m < M_max) push(basis.index(n1, m + 1), -p.kappa0 * dn * std::sqrt(double(m + 1)));
    if (n1 < N) push(basis.index(n1 + 1, m), p.g * std::sqrt(double(n1 + 1) * double(N - n1)));
    row_ptr.push_back(col.size());
  }
  if (col.size() > nnz_cap)
    throw ConfigError("build_hamiltonian: " + std::to_string(col.size()) +
                      " nonzeros exceed the cap of " + std::to_string(nnz_cap));
  return BlockHamiltonian(basis, std::move(row_ptr), std::move(col), std::move(val));
}

int auto_phonon_cutoff(const SystemParams& p, int N) {
  const double b2 = 2.0 * p.kappa0 * N / p.omega_m;
  return static_cast<int>(std::ceil(4.0 * b2 * b2 + 10.0 * b2 + 20.0));
}

double QuantumState::norm2() const {
  double s = 0.0;
  for (const auto& b : blocks)
    for (const auto& a : b.amp) s += std::norm(a);
  return s;
}

int auto_photon_cutoff(const InputState& state) {
  validate(state);
  if (const auto* f = std::get_if<Fock>(&state)) return f->n;
  const double nbar = mean_photon_number(state);
  const int hi = static_cast<int>(std::ceil(nbar + 12.0 * std::sqrt(nbar + 1.0) + 40.0));
  const auto c = number_amplitudes(state, hi);
  double acc = 0.0;
  for (int n = 0; n <= hi; ++n) {
    acc += std::norm(c[static_cast<std::size_t>(n)]);
    if (1.0 - acc < 1e-8) return n;
  }
  return hi;
}

QuantumState prepare_input(const InputState& state, int N_max, int M_max) {
  validate(state);
  if (N_max < 0) throw ConfigError("prepare_input: N_max must be >= 0");
  if (M_max < 0) throw ConfigError("prepare_input: M_max must be >= 0");
  const auto c = number_amplitudes(state, N_max);
  double kept = 0.0;
  for (const auto& a : c) kept += std::norm(a);
  if (1.0 - kept > 1e-8) {
    throw TruncationError("prepare_input: photon tail " + std::to_string(1.0 - kept) +
                              " beyond N_max = " + std::to_string(N_max),
                          1.0 - kept, auto_photon_cutoff(state));
  }
  QuantumState psi;
  psi.M_max = M_max;
  for (int N = 0; N <= N_max; ++N) {
    const cplx a = c[static_cast<std::size_t>(N)];
    if (std::norm(a) < 1e-14) continue;
    BlockState b;
    b.N = N;
    const BlockBasis basis{N, M_max};
    b.amp.assign(basis.dim(), cplx{});
    b.amp[basis.index(N, 0)] = a;
    psi.blocks.push_back(std::move(b));
  }
  return psi;
}

namespace {

struct BlockObservables {
  double norm = 0.0;
  double n1 = 0.0;
  cplx b{};
  double leakage = 0.0;
};

BlockObservables observe(const BlockBasis& basis, const std::vector<cplx>& v) {
  BlockObservables o;
  const int M = basis.M_max;
  for (int n1 = 0; n1 <= basis.N; ++n1) {
    const cplx* row = v.data() + basis.index(n1, 0);
    double w = 0.0;
    cplx bb{};
    for (int m = 0; m <= M; ++m) {
      w += std::norm(row[m]);
      if (m < M) bb += std::sqrt(double(m + 1)) * std::conj(row[m]) * row[m + 1];
    }
    o.norm += w;
    o.n1 += n1 * w;
    o.b += bb;
    o.leakage += std::norm(row[M]) + (M > 0 ? std::norm(row[M - 1]) : 0.0);
  }
  return o;
}

double leakage_of(const BlockBasis& basis, const std::vector<cplx>& v) {
  return observe(basis, v).leakage;
}

/// exp(-i H t) v at every requested time; obs(k, vector) in time order.
template <class Obs>
std::size_t propagate_block(const BlockHamiltonian& H, std::vector<cplx> psi,
                            const std::vector<double>& times, const OracleControls& ctrl, Obs&& obs) {
  const std::size_t n = H.dim();
  std::size_t steps = 0;
  if (times.empty()) return 0;

  if (n < ctrl.dense_below) {
    const auto dense = H.to_dense();
    Eigen::MatrixXd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dense[i * n + j];
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const Eigen::MatrixXd& Q = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();
    Eigen::VectorXcd x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i)) = psi[i];
    const Eigen::VectorXcd c = Q.transpose().cast<cplx>() * x;
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < times.size(); ++k) {
      Eigen::VectorXcd ct(c.size());
      for (Eigen::Index j = 0; j < c.size(); ++j) ct(j) = std::polar(1.0, -lam(j) * times[k]) * c(j);
      const Eigen::VectorXcd y = Q.cast<cplx>() * ct;
      for (std::size_t i = 0; i < n; ++i) out[i] = y(static_cast<Eigen::Index>(i));
      obs(k, out);
    }
    return 1;
  }

  const int mmax = std::max(2, ctrl.krylov_dim);
  std::vector<std::vector<cplx>> V(static_cast<std::size_t>(mmax), std::vector<cplx>(n));
  std::vector<cplx> w(n);
  std::vector<cplx> out(n);
  double t = 0.0;
  std::size_t k = 0;
  const double t_final = times.back();
  while (k < times.size()) {
    if (times[k] <= t) {
      obs(k, psi);
      ++k;
      continue;
    }
    // Lanczos basis from psi.
    double nrm = 0.0;
    for (const auto& a : psi) nrm += std::norm(a);
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) throw NumericError("oracle: zero state");
    for (std::size_t i = 0; i < n; ++i) V[0][i] = psi[i] / nrm;
    std::vector<double> alpha, beta;
    int m = 0;
    double beta_next = 0.0;
    bool exact = false;
    for (int j = 0; j < mmax; ++j) {
      H.apply(V[static_cast<std::size_t>(j)].data(), w.data());
      if (j > 0) {
        const auto& vp = V[static_cast<std::size_t>(j - 1)];
        const double bp = beta[static_cast<std::size_t>(j - 1)];
        for (std::size_t i = 0; i < n; ++i) w[i] -= bp * vp[i];
      }
      const auto& vj = V[static_cast<std::size_t>(j)];
      cplx a{};
      for (std::size_t i = 0; i < n; ++i) a += std::conj(vj[i]) * w[i];
      for (std::size_t i = 0; i < n; ++i) w[i] -= a * vj[i];
      // Second pass against the last two vectors keeps local orthogonality.
      for (int q = std::max(0, j - 1); q <= j; ++q) {
        const auto& vq = V[static_cast<std::size_t>(q)];
        cplx h{};
        for (std::size_t i = 0; i < n; ++i) h += std::conj(vq[i]) * w[i];
        for (std::size_t i = 0; i < n; ++i) w[i] -= h * vq[i];
        if (q == j) a += h;
      }
      alpha.push_back(a.real());
      double b = 0.0;
      for (const auto& z : w) b += std::norm(z);
      b = std::sqrt(b);
      m = j + 1;
      if (b < 1e-13 * (std::abs(a.real()) + 1.0)) {
        exact = true;  // invariant subspace
        break;
      }
      if (j + 1 < mmax) {
        beta.push_back(b);
        auto& vn = V[static_cast<std::size_t>(j + 1)];
        for (std::size_t i = 0; i < n; ++i) vn[i] = w[i] / b;
      } else {
        beta_next = b;
      }
    }
    Eigen::VectorXd diag(m), off(std::max(0, m - 1));
    for (int j = 0; j < m; ++j) diag(j) = alpha[static_cast<std::size_t>(j)];
    for (int j = 0; j + 1 < m; ++j) off(j) = beta[static_cast<std::size_t>(j)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off);
    const Eigen::MatrixXd& Q = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();
    auto coeffs = [&](double s) {
      Eigen::VectorXcd c(m);
      for (int r = 0; r < m; ++r) {
        cplx acc{};
        for (int j = 0; j < m; ++j) acc += Q(r, j) * std::polar(Q(0, j), -lam(j) * s);
        c(r) = acc;
      }
      return c;
    };
    auto error = [&](double s) {
      if (exact) return 0.0;
      return beta_next * std::abs(coeffs(s)(m - 1)) * nrm;
    };
    const double remaining = t_final - t;
    double tau = remaining;
    if (error(tau) > ctrl.krylov_tol) {
      double lo = 0.0, hi = remaining;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (error(mid) <= ctrl.krylov_tol) lo = mid;
        else hi = mid;
        if (hi - lo <= 1e-3 * hi) break;
      }
      tau = lo;
      if (!(tau > 0.0)) throw NumericError("oracle: Krylov step size underflow");
    }
    auto assemble = [&](double s, std::vector<cplx>& y) {
      const Eigen::VectorXcd c = coeffs(s);
      std::fill(y.begin(), y.end(), cplx{});
      for (int j = 0; j < m; ++j) {
        const cplx cj = c(j) * nrm;
        const auto& vj = V[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < n; ++i) y[i] += cj * vj[i];
      }
    };
    const double t_next = (tau == remaining) ? t_final : t + tau;
    while (k < times.size() && times[k] < t_next) {
      assemble(times[k] - t, out);
      obs(k, out);
      ++k;
    }
    assemble(t_next - t, psi);
    t = t_next;
    ++steps;
  }
  return steps;
}

}  // namespace

double phonon_leakage(const QuantumState& psi) {
  double s = 0.0;
  for (const auto& b : psi.blocks) s += leakage_of(BlockBasis{b.N, psi.M_max}, b.amp);
  return s;
}

QuantumState evolve(const QuantumState& psi, const SystemParams& p, double t,
                    const OracleControls& ctrl) {
  if (!(t >= 0.0)) throw ConfigError("evolve: t must be >= 0");
  QuantumState out;
  out.M_max = psi.M_max;
  for (const auto& b : psi.blocks) {
    const BlockHamiltonian H = build_hamiltonian(p, b.N, psi.M_max, ctrl.nnz_cap);
    BlockState nb;
    nb.N = b.N;
    propagate_block(H, b.amp, {t}, ctrl, [&](std::size_t, const std::vector<cplx>& v) { nb.amp = v; });
    out.blocks.push_back(std::move(nb));
  }
  const double leak = phonon_leakage(out);
  if (leak > ctrl.leakage_bound)
    throw TruncationError("evolve: phonon leakage " + std::to_string(leak) + " above bound", leak,
                          2 * psi.M_max);
  return out;
}

namespace {

// Target amplitude for block N, including the moving-frame rotation.
cplx target_amp(const std::vector<cplx>& c, int N, Target which, double theta) {
  if (static_cast<std::size_t>(N) >= c.size()) return {};
  const cplx a = c[static_cast<std::size_t>(N)];
  return which == Target::moving ? a * std::polar(1.0, N * theta) : a;
}

}  // namespace

double oracle_fidelity(const QuantumState& psi, const InputState& target, Target which,
                       double theta) {
  int n_max = 0;
  for (const auto& b : psi.blocks) n_max = std::max(n_max, b.N);
  const auto c = number_amplitudes(target, n_max);
  const int M = psi.M_max;
  std::vector<cplx> acc(static_cast<std::size_t>(M + 1));
  for (const auto& b : psi.blocks) {
    const BlockBasis basis{b.N, M};
    const cplx t = std::conj(target_amp(c, b.N, which, theta));
    const int n1 = which == Target::initial ? b.N : 0;
    for (int m = 0; m <= M; ++m) acc[static_cast<std::size_t>(m)] += t * b.amp[basis.index(n1, m)];
  }
  double f = 0.0;
  for (const auto& a : acc) f += std::norm(a);
  return f;
}

OracleRun run_oracle(const SystemParams& p, const InputState& state,
                     const std::vector<double>& times, const std::vector<double>& thetas,
                     const OracleControls& ctrl) {
  validate(state);
  if (!thetas.empty() && thetas.size() != times.size())
    throw ConfigError("run_oracle: thetas and times differ in length");
  for (std::size_t k = 0; k < times.size(); ++k)
    if (!(times[k] >= 0.0) || (k > 0 && times[k] < times[k - 1]))
      throw ConfigError("run_oracle: times must be non-negative and non-decreasing");

  const int N_max = auto_photon_cutoff(state);
  const int M = ctrl.M_max >= 0 ? ctrl.M_max : auto_phonon_cutoff(p, N_max);
  const QuantumState psi0 = prepare_input(state, N_max, M);
  const auto c = number_amplitudes(state, N_max);
  const std::size_t S = times.size();
  const std::size_t B = psi0.blocks.size();
  const bool single = B == 1;
  if (!single && S * B * static_cast<std::size_t>(M + 1) > 40'000'000)
    throw ConfigError("run_oracle: too many samples for a multi-block state");

  struct BlockResult {
    std::vector<BlockObservables> obs;
    std::vector<double> f_fix, f_mov;           // single-block shortcut
    std::vector<std::vector<cplx>> s_fix, s_mov;  // per-sample target slices
    std::size_t steps = 0;
  };
  std::vector<BlockResult> results(B);

  auto run_block = [&](std::size_t bi) {
    const BlockState& blk = psi0.blocks[bi];
    const BlockBasis basis{blk.N, M};
    const BlockHamiltonian H = build_hamiltonian(p, blk.N, M, ctrl.nnz_cap);
    BlockResult& r = results[bi];
    r.obs.resize(S);
    if (single) {
      r.f_fix.resize(S);
      r.f_mov.resize(S);
    } else {
      r.s_fix.resize(S);
      r.s_mov.resize(S);
    }
    const cplx tf = std::conj(target_amp(c, blk.N, Target::fixed, 0.0));
    r.steps = propagate_block(H, blk.amp, times, ctrl, [&](std::size_t k, const std::vector<cplx>& v) {
      r.obs[k] = observe(basis, v);
      const double th = thetas.empty() ? 0.0 : thetas[k];
      const cplx tm = std::conj(target_amp(c, blk.N, Target::moving, th));
      if (single) {
        double ff = 0.0;
        for (int m = 0; m <= M; ++m) ff += std::norm(v[basis.index(0, m)]);
        r.f_fix[k] = std::norm(tf) * ff;
        r.f_mov[k] = std::norm(tm) * ff;
      } else {
        auto& sf = r.s_fix[k];
        auto& sm = r.s_mov[k];
        sf.resize(static_cast<std::size_t>(M + 1));
        sm.resize(static_cast<std::size_t>(M + 1));
        for (int m = 0; m <= M; ++m) {
          const cplx a = v[basis.index(0, m)];
          sf[static_cast<std::size_t>(m)] = tf * a;
          sm[static_cast<std::size_t>(m)] = tm * a;
        }
      }
    });
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(ctrl.workers, static_cast<unsigned>(B)));
  if (workers <= 1) {
    for (std::size_t bi = 0; bi < B; ++bi) run_block(bi);
  } else {
    std::vector<std::future<void>> futs;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < workers; ++w)
      futs.push_back(std::async(std::launch::async, [&] {
        for (std::size_t bi = next++; bi < B; bi = next++) run_block(bi);
      }));
    for (auto& f : futs) f.get();
  }

  OracleRun run;
  run.M_max = M;
  for (const auto& b : psi0.blocks) run.block_sizes.push_back(b.N);
  run.samples.resize(S);
  std::vector<cplx> af, am;
  for (std::size_t k = 0; k < S; ++k) {
    OracleSample& o = run.samples[k];
    o.t = times[k];
    if (!single) {
      af.assign(static_cast<std::size_t>(M + 1), cplx{});
      am.assign(static_cast<std::size_t>(M + 1), cplx{});
    }
    for (std::size_t bi = 0; bi < B; ++bi) {
      const BlockObservables& ob = results[bi].obs[k];
      const int N = psi0.blocks[bi].N;
      o.norm += ob.norm;
      o.n1 += ob.n1;
      o.n2 += N * ob.norm - ob.n1;
      o.b += ob.b;
      o.leakage += ob.leakage;
      if (single) {
        o.f_fix = results[bi].f_fix[k];
        o.f_mov = results[bi].f_mov[k];
      } else {
        for (int m = 0; m <= M; ++m) {
          af[static_cast<std::size_t>(m)] += results[bi].s_fix[k][static_cast<std::size_t>(m)];
          am[static_cast<std::size_t>(m)] += results[bi].s_mov[k][static_cast<std::size_t>(m)];
        }
      }
    }
    if (!single) {
      for (const auto& a : af) o.f_fix += std::norm(a);
      for (const auto& a : am) o.f_mov += std::norm(a);
    }
    run.max_leakage = std::max(run.max_leakage, o.leakage);
    run.max_norm_defect = std::max(run.max_norm_defect, std::abs(o.norm - psi0.norm2()));
  }
  for (const auto& r : results) run.krylov_steps += r.steps;
  if (run.max_leakage > ctrl.leakage_bound)
    throw TruncationError("run_oracle: phonon leakage " + std::to_string(run.max_leakage) +
                              " above bound at M_max = " + std::to_string(M),
                          run.max_leakage, 2 * M);
  return run;
}

ErrorReport compare_with_semiclassical(const SystemParams& p_in, const InputState& state,
                                       double t_end, std::size_t samples,
                                       const OracleControls& ctrl, OracleRun* run_out) {
  validate(state);
  if (!(t_end > 0.0)) throw ConfigError("compare_with_semiclassical: t_end must be > 0");
  if (samples < 2) throw ConfigError("compare_with_semiclassical: need at least 2 samples");
  SystemParams p = p_in;
  p.n_bar = mean_photon_number(state);

  IntegratorControls ic;
  ic.sample_count = samples;
  const Trajectory traj = integrate(p, t_end, ic);
  const AdiabaticSolution adia = adiabatic_trajectory(p, t_end, ic);

  std::vector<double> times, thetas;
  for (const auto& q : traj.points) {
    times.push_back(q.t);
    thetas.push_back(q.theta);
  }
  const OracleRun run = run_oracle(p, state, times, thetas, ctrl);

  ErrorReport rep;
  rep.N_max = auto_photon_cutoff(state);
  rep.M_max = run.M_max;
  rep.n_bar = p.n_bar;
  rep.samples = times.size();
  const double nb = p.n_bar > 0.0 ? p.n_bar : 1.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double no = run.samples[k].n2 / nb;
    const double ns = traj.points[k].n2 / nb;
    rep.peak_transfer_oracle = std::max(rep.peak_transfer_oracle, no);
    rep.peak_transfer_semiclassical = std::max(rep.peak_transfer_semiclassical, ns);
    rep.population_sup_error = std::max(rep.population_sup_error, std::abs(no - ns));
    rep.peak_fidelity_oracle = std::max(rep.peak_fidelity_oracle, run.samples[k].f_fix);
    const auto& a = adia.points[k];
    rep.peak_fidelity_closed_form =
        std::max(rep.peak_fidelity_closed_form, fidelity(state, a.T.t21, a.theta).fixed);
  }
  rep.peak_transfer_error = std::abs(rep.peak_transfer_oracle - rep.peak_transfer_semiclassical);
  rep.fidelity_gap = std::abs(rep.peak_fidelity_oracle - rep.peak_fidelity_closed_form);
  rep.max_phonon_leakage = run.max_leakage;
  rep.max_norm_defect = run.max_norm_defect;
  if (run_out) *run_out = run;
  return rep;
}

std::string to_json(const ErrorReport& r) {
  nlohmann::ordered_json j;
  j["N_max"] = r.N_max;
  j["M_max"] = r.M_max;
  j["n_bar"] = r.n_bar;
  j["samples"] = r.samples;
  j["peak_transfer_oracle"] = r.peak_transfer_oracle;
  j["peak_transfer_semiclassical"] = r.peak_transfer_semiclassical;
  j["peak_transfer_error"] = r.peak_transfer_error;
  j["population_sup_error"] = r.population_sup_error;
  j["peak_fidelity_oracle"] = r.peak_fidelity_oracle;
  j["peak_fidelity_closed_form"] = r.peak_fidelity_closed_form;
  j["fidelity_gap"] = r.fidelity_gap;
  j["max_phonon_leakage"] = r.max_phonon_leakage;
  j["max_norm_defect"] = r.max_norm_defect;
  return j.dump(2);
}

void write_oracle_csv(std::ostream& os, const SystemParams& p, const OracleRun& run) {
  const double unit = time_unit(p);
  const double dw = p.delta_omega > 0.0 ? p.delta_omega : 1.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CsvWriter w(os, {"t_over_2pi_g", "re_b_over_b0", "im_b_over_b0", "omega_over_dw", "n1_over_nbar",
                   "n2_over_nbar", "abs_T21", "arg_T21", "xi"});
  for (const auto& s : run.samples) {
    const double total = s.n1 + s.n2;
    const double nb = total > 0.0 ? total : 1.0;
    w.row({s.t / unit, s.b.real() / p.b0, s.b.imag() / p.b0, detuning(p, s.b) / dw, s.n1 / nb,
           s.n2 / nb, std::sqrt(std::max(0.0, s.n2 / nb)), nan, nan});
  }
}

}  // namespace dynres
