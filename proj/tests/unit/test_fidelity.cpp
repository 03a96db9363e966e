#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dynres/errors.hpp"
#include "dynres/fidelity.hpp"
#include "two_mode_oracle.hpp"

using namespace dynres;

namespace {

constexpr double kPi = std::numbers::pi;

cplx random_disk(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0), ph(-kPi, kPi);
  return std::polar(std::sqrt(u(rng)), ph(rng));
}

}  // namespace

TEST(FidelityFock, Examples) {
  for (int n : {0, 1, 7, 100}) {
    const FidelityPair f = fidelity_fock(std::polar(1.0, 0.3), n);
    EXPECT_NEAR(f.fixed, 1.0, 1e-13);
    EXPECT_EQ(f.fixed, f.moving);
  }
  const FidelityPair vac = fidelity_fock(0.0, 0);
  EXPECT_EQ(vac.fixed, 1.0);
  EXPECT_EQ(vac.moving, 1.0);
  // |T21|^2 = 1 - (g/dw)^2 cos^2 xi with g/dw = 1e-2, cos^2 xi = 1.
  const FidelityPair f = fidelity_fock(std::sqrt(1.0 - 1e-4), 100);
  EXPECT_NEAR(f.fixed, std::pow(1.0 - 1e-4, 100), 1e-14);
  EXPECT_NEAR(f.fixed, 0.990049, 1e-6);
}

TEST(FidelityFock, MonotoneInPhotonNumber) {
  for (double m : {0.1, 0.5, 0.9, 0.999}) {
    double prev = 2.0;
    for (int n = 0; n <= 500; n += 7) {
      const double f = fidelity_fock(m, n).fixed;
      if (prev > 0.0) EXPECT_LT(f, prev);
      else EXPECT_EQ(f, 0.0);  // underflow
      prev = f;
    }
  }
  EXPECT_THROW(fidelity_fock(0.5, -1), ConfigError);
}

TEST(FidelityCat, PerfectTransfer) {
  for (auto par : {Parity::even, Parity::odd}) {
    const FidelityPair f = fidelity_cat(1.0, 0.0, cplx(3.0, 1.0), par);
    EXPECT_NEAR(f.fixed, 1.0, 1e-13);
    EXPECT_NEAR(f.moving, 1.0, 1e-13);
  }
}

TEST(FidelityCat, SmallOddCatTendsToSinglePhoton) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const cplx t = random_disk(rng);
    const FidelityPair f = fidelity_cat(t, std::arg(t), 1e-4, Parity::odd);
    EXPECT_NEAR(f.fixed, fidelity_fock(t, 1).fixed, 1e-7);
  }
}

TEST(FidelityCat, OddVacuumRejected) { EXPECT_THROW(fidelity_cat(0.5, 0.0, 0.0, Parity::odd), ConfigError); }

TEST(FidelityCat, StableAtLargeAmplitude) {
  std::mt19937_64 rng(2);
  for (double a : {10.0, 15.0, 20.0, 30.0}) {
    for (int k = 0; k < 500; ++k) {
      const cplx t = random_disk(rng);
      const double th = std::uniform_real_distribution<double>(-10.0, 10.0)(rng);
      for (auto par : {Parity::even, Parity::odd}) {
        const FidelityPair f = fidelity_cat(t, th, std::polar(a, 0.3), par);
        ASSERT_TRUE(std::isfinite(f.fixed) && std::isfinite(f.moving));
        EXPECT_GE(f.fixed, 0.0);
        EXPECT_LE(f.fixed, 1.0 + 1e-12);
        EXPECT_GE(f.moving, 0.0);
        EXPECT_LE(f.moving, 1.0 + 1e-12);
      }
    }
    // Near-perfect transfer at large amplitude stays close to one.
    EXPECT_NEAR(fidelity_cat(std::polar(1.0 - 1e-6, 0.0), 0.0, a, Parity::even).moving,
                std::exp(-2.0 * a * a * 1e-6), 1e-6);
  }
}

TEST(DsTransform, SqueezingFreeReduction) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const cplx t = random_disk(rng), a = 3.0 * random_disk(rng);
    const DsTransform d = ds_transform(t, 0.4, a, 0.0);
    EXPECT_EQ(std::abs(d.eta_p), 0.0);
    EXPECT_EQ(d.beta_p, cplx(0.0));
    EXPECT_NEAR(std::abs(d.alpha_p - t * a), 0.0, 1e-15);
    EXPECT_NEAR(d.C, std::exp(-std::norm(a) * (1.0 - std::norm(t))), 1e-14);
  }
}

TEST(DsTransform, PerfectTransferKeepsSqueezing) {
  const DsTransform d = ds_transform(std::polar(1.0, 0.2), 0.2, cplx(1.0, 2.0), std::polar(0.8, 1.0));
  EXPECT_NEAR(std::abs(d.eta_p), 0.8, 1e-12);
  EXPECT_NEAR(std::abs(d.beta), 0.0, 1e-15);
  EXPECT_NEAR(d.C, 1.0, 1e-12);
}

TEST(DsTransform, RegressionVector) {
  // alpha = 0.93, r = 1, |T21|^2 = 1/2, theta = 0; 40-digit evaluation of
  // the transform formulas.
  const DsTransform d = ds_transform(std::sqrt(0.5), 0.0, 0.93, 1.0);
  EXPECT_NEAR(std::abs(d.eta_p), 0.4009915814270068756, 1e-14);
  EXPECT_NEAR(d.beta.real(), 0.2708196233177135191, 1e-14);
  EXPECT_NEAR(d.beta_p.real(), 0.1813559040364666351, 1e-14);
  EXPECT_NEAR(d.alpha_p.real(), 0.8389652105399558673, 1e-14);
  EXPECT_NEAR(d.C, 0.4036684103462101001, 1e-14);
  EXPECT_NEAR(fidelity_ds(std::sqrt(0.5), 0.0, 0.93, 1.0).fixed, 0.3311589274584809153, 1e-13);
}

TEST(DsInnerProduct, Examples) {
  const cplx a(0.4, -1.1), e = std::polar(0.7, 0.9);
  EXPECT_NEAR(std::abs(ds_inner_product(a, e, a, e) - 1.0), 0.0, 1e-14);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    const cplx a1 = 2.0 * random_disk(rng), a2 = 2.0 * random_disk(rng);
    const cplx coh = std::exp(-0.5 * std::norm(a1) - 0.5 * std::norm(a2) + std::conj(a1) * a2);
    EXPECT_NEAR(std::abs(ds_inner_product(a1, 0.0, a2, 0.0) - coh), 0.0, 1e-14);
  }
  for (double r : {0.1, 0.5, 1.0, 2.0}) {
    const cplx v = ds_inner_product(0.0, r, 0.0, std::polar(r, kPi));
    EXPECT_NEAR(std::abs(v), std::pow(std::cosh(2.0 * r), -0.5), 1e-14);
  }
}

TEST(DsInnerProduct, BoundedAndMatchesNumberBasis) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const cplx a1 = random_disk(rng), a2 = random_disk(rng);
    const cplx e1 = 0.6 * random_disk(rng), e2 = 0.6 * random_disk(rng);
    const cplx v = ds_inner_product(a1, e1, a2, e2);
    EXPECT_LE(std::abs(v), 1.0 + 1e-14);
    const auto p1 = oracle2::displaced_squeezed_amplitudes(a1, e1, 80);
    const auto p2 = oracle2::displaced_squeezed_amplitudes(a2, e2, 80);
    cplx s = 0.0;
    for (int n = 0; n <= 80; ++n) s += std::conj(p1[n]) * p2[n];
    EXPECT_NEAR(std::abs(v - s), 0.0, 1e-10);
  }
}

TEST(FidelityDs, PerfectTransfer) {
  const FidelityPair f = fidelity_ds(1.0, 0.0, cplx(0.93, 0.0), 1.0);
  EXPECT_NEAR(f.fixed, 1.0, 1e-12);
  EXPECT_NEAR(f.moving, 1.0, 1e-12);
}

TEST(FidelityDs, ZeroSqueezingIsCoherentClosedForm) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ph(-kPi, kPi);
  for (int k = 0; k < 10000; ++k) {
    // theta is the lifted arg T21, so any branch offset is allowed.
    const double th = ph(rng) + 2.0 * kPi * (k % 3 - 1);
    const cplx t = std::polar(std::abs(random_disk(rng)), th), a = 10.0 * random_disk(rng);
    const FidelityPair d = fidelity_ds(t, th, a, 0.0);
    const FidelityPair c = fidelity_coherent(t, th, a);
    EXPECT_NEAR(d.fixed, c.fixed, 1e-12);
    EXPECT_NEAR(d.moving, c.moving, 1e-12);
  }
}

TEST(FidelityCoherent, Examples) {
  FidelityPair f = fidelity_coherent(1.0, 0.0, 10.0);
  EXPECT_EQ(f.fixed, 1.0);
  EXPECT_EQ(f.moving, 1.0);
  f = fidelity_coherent(std::polar(1.0, kPi), kPi, 10.0);
  EXPECT_NEAR(f.fixed, std::exp(-400.0), 1e-180);
  EXPECT_NEAR(f.moving, 1.0, 1e-14);
}

TEST(Fidelity, RangeAndOrderingProperties) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ph(-kPi, kPi), amp(0.0, 6.0), rr(0.0, 1.5);
  for (int k = 0; k < 5000; ++k) {
    const double th = ph(rng);
    const cplx t = std::polar(std::abs(random_disk(rng)), th);
    const cplx a = std::polar(amp(rng), ph(rng));
    const cplx e = std::polar(rr(rng), ph(rng));
    const std::vector<InputState> states{Fock{k % 40}, Coherent{a}, Cat{a + 0.1, Parity::even},
                                         Cat{a + 0.1, Parity::odd}, DisplacedSqueezed{a, e}};
    for (const auto& s : states) {
      const FidelityPair f = fidelity(s, t, th);
      EXPECT_GE(f.fixed, 0.0);
      EXPECT_LE(f.fixed, 1.0 + 1e-12);
      EXPECT_GE(f.moving, 0.0);
      EXPECT_LE(f.moving, 1.0 + 1e-12);
      // theta = arg T21 = 0: both targets coincide.
      const FidelityPair z = fidelity(s, std::abs(t), 0.0);
      EXPECT_NEAR(z.fixed, z.moving, 1e-12);
    }
    const FidelityPair c = fidelity_coherent(t, th, a);
    EXPECT_GE(c.moving, c.fixed);
    const FidelityPair fk = fidelity_fock(t, k % 40);
    EXPECT_EQ(fk.fixed, fk.moving);
  }
}

TEST(Fidelity, SmallStatesMatchTwoModeBruteForce) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ph(-kPi, kPi), amp(0.05, 1.5);
  const int cutoff = 30;
  for (int k = 0; k < 300; ++k) {
    const double th = ph(rng);
    const cplx t = std::polar(std::abs(random_disk(rng)), th);
    const Eigen::Matrix2cd T = oracle2::unitary_with_t21(t, ph(rng), ph(rng));
    const cplx a = std::polar(amp(rng), ph(rng));

    for (int n = 0; n <= 4; ++n) {
      oracle2::Vec psi(cutoff + 1, 0.0);
      psi[n] = 1.0;
      const auto bf = oracle2::evaluate(psi, T, th);
      const FidelityPair f = fidelity_fock(t, n);
      EXPECT_NEAR(f.fixed, bf.fixed, 1e-8);
      EXPECT_NEAR(f.moving, bf.moving, 1e-8);
    }
    {
      const auto bf = oracle2::evaluate(oracle2::coherent_amplitudes(a, cutoff), T, th);
      const FidelityPair f = fidelity_coherent(t, th, a);
      EXPECT_NEAR(f.fixed, bf.fixed, 1e-8);
      EXPECT_NEAR(f.moving, bf.moving, 1e-8);
    }
    for (bool even : {true, false}) {
      const auto bf = oracle2::evaluate(oracle2::cat_amplitudes(a, even, cutoff), T, th);
      const FidelityPair f = fidelity_cat(t, th, a, even ? Parity::even : Parity::odd);
      EXPECT_NEAR(f.fixed, bf.fixed, 1e-8);
      EXPECT_NEAR(f.moving, bf.moving, 1e-8);
    }
    {
      const cplx e = std::polar(0.5 * amp(rng) / 1.5, ph(rng));
      const auto bf = oracle2::evaluate(oracle2::displaced_squeezed_amplitudes(a, e, cutoff), T, th);
      const FidelityPair f = fidelity_ds(t, th, a, e);
      EXPECT_NEAR(f.fixed, bf.fixed, 1e-8);
      EXPECT_NEAR(f.moving, bf.moving, 1e-8);
    }
  }
}

TEST(Fidelity, NumberAmplitudesAgreeWithHermiteForm) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    const cplx a = 1.5 * random_disk(rng), e = 0.8 * random_disk(rng);
    const auto lib = number_amplitudes(DisplacedSqueezed{a, e}, 40);
    const auto ref = oracle2::displaced_squeezed_amplitudes(a, e, 40);
    for (int n = 0; n <= 40; ++n) EXPECT_NEAR(std::abs(lib[n] - ref[n]), 0.0, 1e-12);
  }
}

TEST(FidelityTrace, CsvSchema) {
  FidelityTrace tr;
  tr.time_unit = 2.0 * kPi;
  tr.t = {0.0, 2.0 * kPi};
  tr.abs_t21 = {0.0, 1.0};
  tr.theta = {-0.5 * kPi, 0.0};
  tr.f_fix = {0.0, 1.0};
  tr.f_mov = {0.0, 1.0};
  std::ostringstream os;
  write_fidelity_csv(os, tr);
  EXPECT_EQ(os.str(),
            "t_over_2pi_g,abs_T21,theta,F_fix,F_mov\r\n"
            "0,0,-1.5707963267948966,0,0\r\n"
            "1,1,0,1,1\r\n");
}
