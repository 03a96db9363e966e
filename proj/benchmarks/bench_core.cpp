#include <benchmark/benchmark.h>

#include <vector>

#include "dynres/fidelity.hpp"
#include "dynres/fock_oracle.hpp"
#include "dynres/semiclassical.hpp"

using namespace dynres;

namespace {

SystemParams reference() { return from_dimensionless(1.0, 1e-2, 1e-3, 5.0, 100.0); }

void BM_Drift(benchmark::State& st) {
  const SystemParams p = reference();
  OscillatorState b{cplx(0.3 * p.b0, 0.1 * p.b0)};
  Transmittance T{cplx(0.6, 0.0), cplx(0.0, -0.8), cplx(0.0, -0.8), cplx(0.6, 0.0)};
  for (auto _ : st) benchmark::DoNotOptimize(drift(0.0, b, T, p));
}
BENCHMARK(BM_Drift);

void BM_IntegrateTransfer(benchmark::State& st) {
  // Window around the first transfer, where the step size is smallest.
  const SystemParams p = reference();
  IntegratorControls c;
  c.sample_count = 2;
  for (auto _ : st) benchmark::DoNotOptimize(integrate(p, 1100.0, c));
}
BENCHMARK(BM_IntegrateTransfer)->Unit(benchmark::kMillisecond);

void BM_FidelityCat(benchmark::State& st) {
  const cplx t21 = std::polar(0.9995, 0.3);
  for (auto _ : st) benchmark::DoNotOptimize(fidelity_cat(t21, 0.3, cplx(10.0, 0.0), Parity::even));
}
BENCHMARK(BM_FidelityCat);

void BM_FidelityDs(benchmark::State& st) {
  const cplx t21 = std::polar(0.9995, 0.3);
  for (auto _ : st) benchmark::DoNotOptimize(fidelity_ds(t21, 0.3, cplx(0.93, 0.0), cplx(1.0, 0.0)));
}
BENCHMARK(BM_FidelityDs);

void BM_HamiltonianApply(benchmark::State& st) {
  const SystemParams p = from_dimensionless(1.0, 0.1, 0.05, 3.0, 6.0);
  const int N = static_cast<int>(st.range(0));
  const BlockHamiltonian H = build_hamiltonian(p, N, auto_phonon_cutoff(p, N));
  std::vector<cplx> x(H.dim(), cplx(1.0, 0.0)), y(H.dim());
  for (auto _ : st) {
    H.apply(x.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * H.nonzeros()));
}
BENCHMARK(BM_HamiltonianApply)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
