#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qeels/couplings.hpp"
#include "qeels/verify/coupling_oracles.hpp"

namespace {

using namespace qeels;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TEST(CouplingCQE, DefaultValue) {
    const PhysicalParams p;
    EXPECT_NEAR(coupling_g_c_qe(p), 0.07947572756340032, 1e-14);
    EXPECT_NEAR(coupling_g_c_qe(p), 0.080, 1e-3);
}

TEST(CouplingCQE, ZeroDipoleAndDistanceScaling) {
    PhysicalParams p;
    p.mu_qe = 0.0;
    EXPECT_EQ(coupling_g_c_qe(p), 0.0);
    PhysicalParams a;
    PhysicalParams b = a;
    b.collinear = false;
    b.b_c_qe *= 2.0;
    EXPECT_NEAR(coupling_g_c_qe(a) / coupling_g_c_qe(b), 8.0, 1e-12);
    b.b_c_qe *= 2.0;
    EXPECT_NEAR(coupling_g_c_qe(a) / coupling_g_c_qe(b), 64.0, 1e-12);
}

TEST(CouplingEC, FrozenValuesAtOpticalMomentum) {
    const PhysicalParams p;
    const double q = p.hbar_omega_c / p.hbar_v0();
    EXPECT_NEAR(q, 0.5067730716548338, 1e-14);
    EXPECT_LT(rel(reduced_g_ec(q, CavityAxis::x, p), 0.08629021021639142), 1e-12);
    EXPECT_LT(rel(reduced_g_ec(q, CavityAxis::z, p), 0.07943910933941845), 1e-12);
}

TEST(CouplingEC, LimitsAndSymmetry) {
    const PhysicalParams p;
    EXPECT_EQ(reduced_g_ec(0.0, CavityAxis::x, p), 0.0);
    EXPECT_EQ(reduced_g_ec(0.0, CavityAxis::z, p), 0.0);
    EXPECT_EQ(reduced_g_ec(0.3, CavityAxis::y, p), 0.0);
    EXPECT_LT(reduced_g_ec(1e-9, CavityAxis::x, p), 1e-6);
    EXPECT_EQ(reduced_g_ec(1e3, CavityAxis::x, p), 0.0);
    for (double q : {0.01, 0.2, 1.3, 4.0}) {
        EXPECT_EQ(reduced_g_ec(q, CavityAxis::x, p), reduced_g_ec(-q, CavityAxis::x, p));
        EXPECT_EQ(reduced_g_eqe(q, p), reduced_g_eqe(-q, p));
        const double ratio = reduced_g_ec(q, CavityAxis::x, p) / reduced_g_ec(q, CavityAxis::z, p);
        EXPECT_NEAR(ratio, bessel::k1(q * p.b_e_c) / bessel::k0(q * p.b_e_c), 1e-13);
    }
}

TEST(CouplingEQE, FrozenValueAndLimits) {
    PhysicalParams p;
    const double q = p.hbar_omega_qe / p.hbar_v0();
    EXPECT_LT(rel(reduced_g_eqe(q, p), 2.376194454275891), 1e-12);
    EXPECT_EQ(reduced_g_eqe(0.0, p), 0.0);
    p.mu_qe = 0.0;
    EXPECT_EQ(reduced_g_eqe(q, p), 0.0);
}

TEST(CouplingEQE, PhaseIsUnimodular) {
    PhysicalParams p;
    EXPECT_EQ(qe_phase(0.7, p), std::complex<double>(1.0, 0.0));
    p.z_qe = 3.0;
    EXPECT_NEAR(std::abs(qe_phase(0.7, p)), 1.0, 1e-15);
    EXPECT_NEAR(std::arg(qe_phase(0.1, p)), 0.3, 1e-14);
}

TEST(CouplingMonotone, DecreasesWithImpactParameter) {
    for (double q : {0.05, 0.5, 2.0}) {
        double prev_x = INFINITY, prev_z = INFINITY, prev_e = INFINITY;
        for (double b = 0.5; b < 30.0; b *= 1.2) {
            PhysicalParams p;
            p.collinear = false;
            p.b_e_c = b;
            p.b_e_qe = b;
            const double gx = reduced_g_ec(q, CavityAxis::x, p);
            const double gz = reduced_g_ec(q, CavityAxis::z, p);
            const double ge = reduced_g_eqe(q, p);
            EXPECT_LT(gx, prev_x);
            EXPECT_LT(gz, prev_z);
            EXPECT_LT(ge, prev_e);
            prev_x = gx;
            prev_z = gz;
            prev_e = ge;
        }
    }
}

TEST(IntegralFamily, FrozenQuadratureValues) {
    // Frozen from extended-precision oscillatory quadrature of the defining integrals.
    struct Row {
        double phi, i0, i1, i2;
    };
    const Row rows[] = {
        {0.01, 1.333300004574847, 0.006664926274416319, 0.6661778777929541},
        {1.0, 1.083225932423452, 0.4012714867981564, 0.1205885279710175},
        {3.7, 0.2296207960556808, 0.160885200366291, -0.0991733362992286},
        {10.0, 0.001433987800462185, 0.001243251563588372, -0.001061012331385673},
    };
    for (const auto& r : rows) {
        EXPECT_LT(rel(i_n_closed(0, r.phi).real(), r.i0), 1e-10);
        EXPECT_LT(rel(i_n_closed(1, r.phi).imag(), r.i1), 1e-10);
        EXPECT_LT(rel(i_n_closed(2, r.phi).real(), r.i2), 1e-10);
        EXPECT_LT(rel(i_n_closed(1, -r.phi).imag(), r.i1), 1e-10);
    }
    EXPECT_NEAR(i_n_closed(1, 1.0).imag(), 0.4012715, 1e-7);
}

TEST(IntegralFamily, PurelyImaginaryOddMember) {
    for (double phi = 0.01; phi < 50.0; phi *= 1.5) {
        EXPECT_EQ(i_n_closed(1, phi).real(), 0.0);
        EXPECT_EQ(i_n_closed(0, phi).imag(), 0.0);
        EXPECT_EQ(i_n_closed(2, phi).imag(), 0.0);
    }
}

TEST(IntegralFamily, RecurrenceCombination) {
    for (double phi = 0.01; phi < 50.0; phi *= 1.5) {
        const double lhs = (i_n_closed(0, phi) - 2.0 * i_n_closed(2, phi)).real();
        EXPECT_NEAR(lhs, i0_minus_2i2(phi), 1e-12 * std::abs(i0_minus_2i2(phi)) + 1e-15);
    }
}

TEST(IntegralFamily, RejectsZero) {
    EXPECT_THROW(i_n_closed(0, 0.0), std::domain_error);
    EXPECT_THROW(i_n_closed(3, 1.0), std::domain_error);
}

TEST(IntegralFamily, MatchesQuadratureOracle) {
    for (double phi : {0.02, 0.1, 0.5, 1.0, 2.5, 6.0}) {
        for (int n = 0; n <= 2; ++n) {
            const auto closed = i_n_closed(n, phi);
            const auto oracle = verify::i_n_oracle(n, phi);
            EXPECT_LT(std::abs(closed - oracle) / std::abs(closed), 1e-8) << "n=" << n << " phi=" << phi;
        }
    }
}

TEST(CouplingOracle, ElectronCavityOnLogGrid) {
    for (double q : {0.05, 0.2, 0.5067730716548338}) {
        for (double b : {1.0, 4.0, 11.0}) {
            PhysicalParams p;
            p.collinear = false;
            p.b_e_c = b;
            for (auto [axis, id] : {std::pair{CavityAxis::x, 0}, std::pair{CavityAxis::z, 2}}) {
                const double closed = reduced_g_ec(q, axis, p);
                const double oracle = verify::reduced_g_ec_oracle(q, id, p);
                EXPECT_LT(rel(closed, oracle), 1e-8) << "q=" << q << " b=" << b << " axis=" << id;
            }
        }
    }
}

TEST(CouplingOracle, ElectronEmitterIncludingPhase) {
    PhysicalParams p;
    const double q = p.hbar_omega_qe / p.hbar_v0();
    EXPECT_LT(rel(reduced_g_eqe(q, p), std::abs(verify::reduced_g_eqe_oracle(q, p))), 1e-8);
    p.z_qe = 2.0;
    const auto o = verify::reduced_g_eqe_oracle(q, p);
    const auto unshifted = verify::reduced_g_eqe_oracle(q, with_b_e_qe([] {
        PhysicalParams d;
        return d;
    }(), 1.0));
    EXPECT_LT(std::abs(o - qe_phase(q, p) * unshifted), 1e-8 * std::abs(o));
}

TEST(ClassicalLimit, QuantumToClassicalRatio) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> speed(0.01, 0.5), dist(10.5, 40.0);
    for (int i = 0; i < 10; ++i) {
        PhysicalParams p;
        p.collinear = false;
        p.v0_over_c = speed(rng);
        p.b_e_c = dist(rng);
        EXPECT_LT(rel(quantum_first_order_loss(p) / classical_eels_loss(p), units::pi * units::pi / 9.0), 1e-9);
    }
}

TEST(ClassicalLimit, FrozenValueAndScaling) {
    PhysicalParams p;
    EXPECT_LT(rel(classical_eels_loss(p), 0.0008054156659183265), 1e-12);
    PhysicalParams big = p;
    big.radius_r *= 2.0;
    big.collinear = false;
    EXPECT_NEAR(classical_eels_loss(big) / classical_eels_loss(p), 8.0, 1e-12);
    PhysicalParams far = p;
    far.collinear = false;
    far.b_e_c = 1e5;
    EXPECT_EQ(classical_eels_loss(far), 0.0);
}

TEST(InducedDipole, RatioNearForty) {
    PhysicalParams p;
    EXPECT_NEAR(induced_dipole_ratio(p), 39.02722903149751, 1e-10);
    EXPECT_NEAR(induced_dipole_ratio(p), 40.0, 1.0);
    PhysicalParams small = p;
    small.radius_r = 2.5;
    EXPECT_NEAR(induced_dipole_ratio(p) / induced_dipole_ratio(small), 8.0, 1e-12);
    small.radius_r = 1e-12;
    EXPECT_LT(induced_dipole_ratio(small), 1e-15);
}

}  // namespace
