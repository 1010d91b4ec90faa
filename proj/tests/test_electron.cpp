#include <gtest/gtest.h>

#include <cmath>

#include "qeels/electron.hpp"
#include "qeels/verify/quadrature.hpp"

namespace {

using namespace qeels;
using cplx = std::complex<double>;

TEST(Monochromatic, CentralWavenumber) {
    auto w = monochromatic(0.02);
    EXPECT_NEAR(w.k0(), 51.79, 0.005);
    EXPECT_NEAR(w.k0(), 510998.95 * 0.02 / 197.3269804, 1e-6);
    EXPECT_EQ(w.size(), 1u);
    EXPECT_DOUBLE_EQ(w.norm_squared(), 1.0);
    auto d = delta_n(populations(w), populations(w));
    for (const auto& e : d.entries) EXPECT_EQ(e.second, 0.0);
}

TEST(Comb, OverlapAtModulationPeriod) {
    const double q = 0.52;
    auto w = comb(0.02, q, 100, 0.0);
    EXPECT_EQ(w.size(), 101u);
    EXPECT_NEAR(w.norm_squared(), 1.0, 1e-14);
    EXPECT_LT(std::abs(comb_overlap(w, q) - 100.0 / 101.0), 1e-14);
    EXPECT_LT(std::abs(comb_overlap(w, 2.0 * q) - 99.0 / 101.0), 1e-14);
    EXPECT_LT(std::abs(comb_overlap(w, 0.37 * q)), 1e-15);
    EXPECT_LT(std::abs(comb_overlap(w, 0.0) - 1.0), 1e-14);
}

TEST(Comb, RunningPhase) {
    const double q = 0.4, xi = 0.7;
    auto w = comb(0.05, q, 10, xi);
    // B(k) conj(B(k - q)) = e^{i xi} / (N + 1) for each overlapping pair.
    EXPECT_LT(std::abs(comb_overlap(w, q) - std::polar(10.0 / 11.0, xi)), 1e-14);
}

TEST(Comb, ZeroTeethIsMonochromatic) {
    auto w = comb(0.1, 0.5, 0, 1.0);
    auto m = monochromatic(0.1);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w.entries()[0].offset, m.entries()[0].offset);
    EXPECT_NEAR(std::abs(w.entries()[0].amplitude - m.entries()[0].amplitude), 0.0, 1e-15);
}

TEST(Comb, RejectsOddTeeth) {
    EXPECT_THROW(comb(0.02, 0.5, 3), std::invalid_argument);
    EXPECT_THROW(comb(0.02, 0.5, -2), std::invalid_argument);
    EXPECT_THROW(comb(0.02, 0.0, 2), std::invalid_argument);
}

TEST(DeltaN, RejectsNormMismatch) {
    MomentumDistribution a{1.0, {}, {{0.0, 1.0}}};
    MomentumDistribution b{1.0, {}, {{0.0, 0.5}}};
    EXPECT_THROW(delta_n(a, b), std::invalid_argument);
}

TEST(EnergyChange, ZeroAndSingleLoss) {
    KDistribution zero{51.79, 1.0, {}, {}};
    EXPECT_EQ(energy_change(zero, 2.0).eV, 0.0);
    const double v = 0.02;
    const double k0 = units::central_wavenumber(v);
    const double q = 2.0 / units::hbar_v(v);
    KDistribution single{k0, q, {}, {{-q, 1.0}, {0.0, -1.0}}};
    const auto de = energy_change(single, 2.0);
    // hbar^2 k0 / m = hbar v0, so E(k0 - q) - E(k0) = -hbar omega (1 - q / 2k0).
    EXPECT_NEAR(de.eV, -2.0 * (1.0 - q / (2.0 * k0)), 1e-12);
    EXPECT_NEAR(de.in_hbar_omega_c, -(1.0 - q / (2.0 * k0)), 1e-12);
    EXPECT_LT(std::abs(de.in_hbar_omega_c + 1.0), 0.01);
}

TEST(Broadening, MomentsPreserved) {
    KDistribution d{50.0, 1.0, {}, {{-0.53, 0.2}, {-0.48, 0.15}, {0.0, -0.4}, {0.5, 0.05}}};
    const double gamma = 0.005;
    // Exact integration piecewise between every kink (line +- 40 gamma).
    std::vector<double> cuts;
    for (const auto& [k, n] : d.entries) {
        cuts.push_back(k - 40 * gamma);
        cuts.push_back(k);
        cuts.push_back(k + 40 * gamma);
    }
    std::sort(cuts.begin(), cuts.end());
    double m0 = 0.0, m1 = 0.0;
    verify::QuadOptions opt;
    opt.abs_tol = 1e-15;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] < 1e-15) continue;
        m0 += verify::integrate<double>([&](double x) { return d.broadened(x, gamma); }, cuts[i], cuts[i + 1], 8, opt).value;
        m1 += verify::integrate<double>([&](double x) { return x * d.broadened(x, gamma); }, cuts[i], cuts[i + 1], 8, opt).value;
    }
    double e0 = 0.0, e1 = 0.0;
    for (const auto& [k, n] : d.entries) {
        e0 += n;
        e1 += k * n;
    }
    EXPECT_NEAR(m0, e0, 1e-9);
    EXPECT_NEAR(m1, e1, 1e-9);
}

TEST(Broadening, BinnedConservesSum) {
    KDistribution d{50.0, 1.0, {}, {{-0.53, 0.2}, {-0.48, 0.15}, {0.0, -0.35}}};
    std::vector<double> centres;
    for (int i = -10; i <= 10; ++i) centres.push_back(0.1 * i);
    auto b = d.binned(centres, 0.1);
    double s = 0.0;
    for (double x : b) s += x;
    EXPECT_NEAR(s, 0.0, 1e-15);
    EXPECT_THROW(d.broadened(0.0, 0.0), std::invalid_argument);
}

TEST(Wavepacket, InnerProductToleranceMatching) {
    Wavepacket a(10.0), b(10.0);
    a.add(0.5, 1.0);
    b.add(0.5 + 1e-14, cplx(0.0, 1.0));
    EXPECT_LT(std::abs(inner(a, b) - cplx(0.0, 1.0)), 1e-15);
    b.add(0.6, 1.0);
    EXPECT_LT(std::abs(inner(a, b) - cplx(0.0, 1.0)), 1e-15);
    EXPECT_THROW(a.add(INFINITY, 1.0), std::invalid_argument);
}

}  // namespace
