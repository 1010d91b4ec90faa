#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qeels/bessel.hpp"
#include "qeels/verify/coupling_oracles.hpp"

namespace {

using qeels::bessel::bessel_k;

struct Reference {
    double x, k0, k1, k2;
};

// Frozen from 30-digit evaluations.
const std::vector<Reference> kReference = {
    {1e-6, 13.931442073626419, 999999.99999278428, 1999999999999.5},
    {0.1, 2.4270690247020166, 9.8538447808706061, 199.50396464211414},
    {1.0, 0.42102443824070833, 0.60190723019723457, 1.6248388986351775},
    {2.0, 0.11389387274953344, 0.13986588181652243, 0.25375975456605586},
    {2.5, 0.062347553200366186, 0.073890816347747064, 0.12146020627856384},
    {10.0, 1.7780062316167652e-5, 1.8648773453825585e-5, 2.1509817006932769e-5},
    {50.0, 3.4101677497894955e-23, 3.4441022267175556e-23, 3.5479318388581977e-23},
    {300.0, 3.7236948548891433e-132, 3.7298958583323727e-132, 3.7485608272780257e-132},
    {700.0, 4.6697764316853769e-306, 4.6731107967079661e-306, 4.6831281768188282e-306},
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TEST(Bessel, FrozenReferenceValues) {
    for (const auto& r : kReference) {
        EXPECT_LT(rel(bessel_k(0, r.x), r.k0), 1e-12) << "K0 at " << r.x;
        EXPECT_LT(rel(bessel_k(1, r.x), r.k1), 1e-12) << "K1 at " << r.x;
        EXPECT_LT(rel(bessel_k(2, r.x), r.k2), 1e-12) << "K2 at " << r.x;
    }
}

TEST(Bessel, KnownValuesAtOne) {
    EXPECT_NEAR(qeels::bessel::k0(1.0), 0.4210244382, 1e-10);
    EXPECT_NEAR(qeels::bessel::k1(1.0), 0.6019072302, 1e-10);
}

TEST(Bessel, MatchesIntegralRepresentationOracle) {
    for (double x = 1e-6; x <= 700.0; x *= 1.7) {
        for (int n = 0; n <= 2; ++n) {
            const double oracle = qeels::verify::bessel_k_scaled_oracle(n, x);
            const double scaled = bessel_k(n, x) * std::exp(x);
            EXPECT_LT(rel(scaled, oracle), 1e-10) << "n=" << n << " x=" << x;
        }
    }
}

TEST(Bessel, AgreesWithStandardLibrary) {
    for (double x = 1e-5; x < 600.0; x *= 1.3) {
        for (int n = 0; n <= 2; ++n) {
            EXPECT_LT(rel(bessel_k(n, x), std::cyl_bessel_k(double(n), x)), 1e-12)
                << "n=" << n << " x=" << x;
        }
    }
}

TEST(Bessel, RecurrenceResidual) {
    for (double x = 1e-6; x <= 700.0; x *= 1.11) {
        const double k2 = bessel_k(2, x);
        const double residual = k2 - bessel_k(0, x) - 2.0 * bessel_k(1, x) / x;
        EXPECT_LE(std::abs(residual), 1e-10 * k2) << x;
    }
}

TEST(Bessel, PositiveAndDecreasing) {
    double prev[3] = {INFINITY, INFINITY, INFINITY};
    for (double x = 1e-6; x <= 700.0; x *= 1.05) {
        for (int n = 0; n <= 2; ++n) {
            const double v = bessel_k(n, x);
            EXPECT_GT(v, 0.0);
            EXPECT_LT(v, prev[n]);
            prev[n] = v;
        }
    }
}

TEST(Bessel, ContinuousAcrossSeriesSwitch) {
    auto below = qeels::bessel::k01(std::nextafter(2.0, 0.0));
    auto above = qeels::bessel::k01(std::nextafter(2.0, 3.0));
    EXPECT_LT(rel(below.first, above.first), 1e-13);
    EXPECT_LT(rel(below.second, above.second), 1e-13);
}

TEST(Bessel, UnderflowsBeyondRange) {
    EXPECT_EQ(bessel_k(0, 800.0), 0.0);
    EXPECT_EQ(bessel_k(1, 1e4), 0.0);
    auto [s0, s1] = qeels::bessel::k01_scaled(1e4);
    EXPECT_NEAR(s0, std::sqrt(qeels::units::pi / 2e4) * (1.0 - 1.0 / 8e4 + 9.0 / 1.28e10), 1e-14);
    EXPECT_GT(s1, s0);
}

TEST(Bessel, RejectsInvalidInput) {
    EXPECT_THROW(bessel_k(0, 0.0), std::domain_error);
    EXPECT_THROW(bessel_k(1, -1.0), std::domain_error);
    EXPECT_THROW(bessel_k(3, 1.0), std::domain_error);
    EXPECT_THROW(bessel_k(0, std::nan("")), std::domain_error);
}

}  // namespace
