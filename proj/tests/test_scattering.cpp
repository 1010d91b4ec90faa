#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qeels/scattering.hpp"

namespace {

using namespace qeels;

struct Fixture {
    PhysicalParams p;
    TargetSpace space;
    ProbeConfig probe;
    std::size_t g, p1, m1, z1;
    explicit Fixture(PhysicalParams params = {}, Caps caps = {})
        : p(params), space(build_space(params, caps)), probe(ProbeConfig::from(params)) {
        g = space.index(0, 0, Branch::ground);
        p1 = space.index(0, 1, Branch::plus);
        m1 = space.index(0, 1, Branch::minus);
        z1 = space.find({1, 0, Branch::ground}).value_or(0);
    }
};

TEST(Interaction, GroundToFirstManifoldElements) {
    Fixture f;
    const double hv = f.p.hbar_v0();
    const double qz = f.p.hbar_omega_c / hv;
    EXPECT_NEAR(matrix_element_h(f.space, f.probe, f.g, f.z1).real(),
                reduced_g_ec(qz, CavityAxis::z, f.p) / hv, 1e-15);
    for (auto [idx, sign] : {std::pair{f.p1, 1.0}, std::pair{f.m1, -1.0}}) {
        const double q = f.space.energy(idx) / hv;
        const double expected =
            (reduced_g_ec(q, CavityAxis::x, f.p) + sign * reduced_g_eqe(q, f.p)) / (std::sqrt(2.0) * hv);
        EXPECT_NEAR(matrix_element_h(f.space, f.probe, f.g, idx).real(), expected, 1e-14);
        EXPECT_NEAR(matrix_element_h(f.space, f.probe, idx, f.g).real(), expected, 1e-14);
    }
}

TEST(Interaction, FrozenValuesAtDefault) {
    Fixture f;
    EXPECT_NEAR(matrix_element_h(f.space, f.probe, f.g, f.p1).real(), 0.45076, 1e-5);
    EXPECT_NEAR(matrix_element_h(f.space, f.probe, f.g, f.m1).real(), -0.395237, 1e-6);
    EXPECT_NEAR(matrix_element_h(f.space, f.probe, f.g, f.z1).real(), 0.0201288, 1e-7);
}

TEST(Interaction, HermitianRealZeroDiagonal) {
    Fixture f(with_half_detuning(PhysicalParams{}, 0.05));
    auto in = build_interaction(f.space, f.probe);
    const std::size_t d = f.space.dim();
    for (std::size_t i = 0; i < d; ++i) {
        EXPECT_TRUE(in.h(i, i).empty());
        for (std::size_t j = 0; j < d; ++j) {
            EXPECT_EQ(in.value(i, j).imag(), 0.0);
            EXPECT_EQ(in.value(j, i), std::conj(in.value(i, j)));
            EXPECT_EQ(in.q(j, i), -in.q(i, j));
            if (!in.h(i, j).empty()) {
                ASSERT_EQ(in.h(i, j).size(), 1u);
                EXPECT_EQ(in.h(i, j).terms()[0].q, in.q(i, j));
            }
        }
    }
}

TEST(Interaction, EmitterPhaseKeepsHermiticity) {
    PhysicalParams p;
    p.z_qe = 1.7;
    Fixture f(p);
    auto in = build_interaction(f.space, f.probe);
    EXPECT_GT(std::abs(in.value(f.p1, f.g).imag()), 0.0);
    EXPECT_LT((in.value - in.value.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT(unitarity_defect(scattering_matrix(f.space, f.probe).s), 1e-10);
}

TEST(Interaction, AllChannelsOff) {
    Fixture f;
    f.probe.ec_x = f.probe.ec_z = f.probe.e_qe = false;
    auto in = build_interaction(f.space, f.probe);
    EXPECT_EQ(amplitude_norm(in.h), 0.0);
    auto s = scattering_matrix(f.space, f.probe);
    EXPECT_EQ(s.s, ShiftMatrix::identity(f.space.dim()));
}

TEST(Interaction, ZModeNegligibleAtLowSpeed) {
    Fixture f;
    EXPECT_GT(std::abs(matrix_element_h(f.space, f.probe, f.g, f.p1)),
              10.0 * std::abs(matrix_element_h(f.space, f.probe, f.g, f.z1)));
}

TEST(Interaction, LowerPolaritonZeroCrossing) {
    auto hm = [](double v) {
        Fixture f(with_speed(PhysicalParams{}, v));
        return matrix_element_h(f.space, f.probe, f.g, f.m1).real();
    };
    EXPECT_LT(hm(0.05), 0.0);
    EXPECT_GT(hm(0.12), 0.0);
    double lo = 0.05, hi = 0.12;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (hm(mid) < 0.0 ? lo : hi) = mid;
    }
    EXPECT_NEAR(lo, 0.06732, 2e-5);
}

TEST(Interaction, BoundedOverFigureBox) {
    for (double b = 1.0; b <= 5.0; b += 0.5)
        for (double v = 0.02; v <= 0.2001; v += 0.01) {
            Fixture f(with_speed(with_b_e_qe(PhysicalParams{}, b), v));
            for (auto idx : {f.p1, f.m1, f.z1}) {
                EXPECT_LE(std::abs(matrix_element_h(f.space, f.probe, f.g, idx)), 1.0) << b << " " << v;
            }
        }
}

TEST(Interaction, IndexOutOfRange) {
    Fixture f;
    EXPECT_THROW(matrix_element_h(f.space, f.probe, 0, 999), std::out_of_range);
}

TEST(Interaction, NonrecoilGuardWarns) {
    Fixture slow(with_speed(PhysicalParams{}, 0.001));
    EXPECT_FALSE(build_interaction(slow.space, slow.probe).warnings.empty());
    Fixture f;
    EXPECT_TRUE(build_interaction(f.space, f.probe).warnings.empty());
}

TEST(Interaction, TruncationWarningsForEdgeStates) {
    Fixture f;
    EXPECT_TRUE(truncation_warnings(f.space, f.probe, {f.g, f.p1}).empty());
    const auto top = f.space.index(0, 4, Branch::plus);
    EXPECT_EQ(truncation_warnings(f.space, f.probe, {top}).size(), 1u);
}

TEST(Scattering, UnitarityWithDefaultCaps) {
    for (double v : {0.02, 0.08, 0.2}) {
        Fixture f(with_speed(PhysicalParams{}, v));
        auto sc = scattering_matrix(f.space, f.probe);
        EXPECT_LE(unitarity_defect(sc.s), 1e-10) << v;
    }
}

TEST(Scattering, EntriesStaySingleShift) {
    Fixture f;
    auto sc = scattering_matrix(f.space, f.probe);
    for (std::size_t i = 0; i < f.space.dim(); ++i)
        for (std::size_t j = 0; j < f.space.dim(); ++j) {
            EXPECT_LE(sc.s(i, j).size(), 1u);
            if (!sc.s(i, j).empty()) {
                EXPECT_TRUE(MergeTolerance{}.same(sc.s(i, j).terms()[0].q, sc.interaction.q(i, j)));
            }
        }
}

TEST(Scattering, PerturbativeConsistency) {
    for (double v : {0.02, 0.08, 0.2}) {
        Fixture f(with_speed(PhysicalParams{}, v));
        auto sc = scattering_matrix(f.space, f.probe);
        const auto& h = sc.interaction.h;
        auto first = mat_add(ShiftMatrix::identity(h.dim()), mat_scale(h, cplx(0.0, -1.0)));
        const double resid = amplitude_norm(mat_add(sc.s, mat_scale(first, -1.0)));
        const double hn = amplitude_norm(h);
        EXPECT_LE(resid, 0.5 * hn * hn) << v;
    }
}

TEST(Scattering, FirstOrderForWeakCoupling) {
    PhysicalParams p = with_speed(with_b_e_qe(PhysicalParams{}, 6.0), 0.6);
    p.mu_qe = 0.1;
    p.collinear = false;
    p.b_e_c = 40.0;
    Fixture f(p);
    auto sc = scattering_matrix(f.space, f.probe);
    const double hn = sc.interaction.value.cwiseAbs().maxCoeff();
    ASSERT_LT(hn, 0.05);
    for (std::size_t i = 0; i < f.space.dim(); ++i)
        for (std::size_t j = 0; j < f.space.dim(); ++j) {
            const cplx expected = (i == j ? cplx(1.0) : cplx(0.0)) - cplx(0.0, 1.0) * sc.interaction.value(i, j);
            const double q = sc.interaction.q(i, j);
            EXPECT_LE(std::abs(sc.s(i, j).coefficient(q) - expected), 20.0 * hn * hn);
        }
}

TEST(Oracle, ThreeStateRabiClosedForm) {
    Fixture f(PhysicalParams{}, make_caps(0, 1));
    const auto in = build_interaction(f.space, f.probe);
    const auto grid = transfer_grid(in);
    const auto o = joint_space_oracle(f.space, f.probe, grid);
    const double hp = in.value(f.p1, f.g).real(), hm = in.value(f.m1, f.g).real();
    const double om = std::hypot(hp, hm);
    const std::size_t src = *grid.find(0.0);
    EXPECT_NEAR(std::abs(o.unitary(o.index(f.g, src), o.index(f.g, src)) - std::cos(om)), 0.0, 1e-13);
    const auto bp = *grid.find(-in.q(f.p1, f.g));
    const auto bm = *grid.find(-in.q(f.m1, f.g));
    EXPECT_LT(std::abs(o.unitary(o.index(f.p1, bp), o.index(f.g, src)) - cplx(0.0, -hp / om * std::sin(om))), 1e-13);
    EXPECT_LT(std::abs(o.unitary(o.index(f.m1, bm), o.index(f.g, src)) - cplx(0.0, -hm / om * std::sin(om))), 1e-13);
    auto sc = scattering_matrix(f.space, f.probe);
    EXPECT_LT(oracle_mismatch(o, sc.s), 1e-12);
}

TEST(Oracle, ZeroCouplingIsIdentity) {
    Fixture f(PhysicalParams{}, make_caps(1, 1));
    f.probe.ec_x = f.probe.ec_z = f.probe.e_qe = false;
    const auto grid = transfer_grid(build_interaction(f.space, f.probe));
    const auto o = joint_space_oracle(f.space, f.probe, grid);
    EXPECT_LT((o.unitary - Eigen::MatrixXcd::Identity(o.unitary.rows(), o.unitary.cols())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Oracle, RandomizedConfigurations) {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> speed(0.02, 0.2), dist(1.0, 5.0), det(-0.2, 0.2);
    const Caps choices[] = {make_caps(2, 1), make_caps(1, 1), make_caps(0, 2), make_caps(0, 3)};
    for (int t = 0; t < 6; ++t) {
        PhysicalParams p = with_half_detuning(with_speed(with_b_e_qe(PhysicalParams{}, dist(rng)), speed(rng)), det(rng));
        Fixture f(p, choices[t % 4]);
        const auto sc = scattering_matrix(f.space, f.probe);
        const auto grid = transfer_grid(sc.interaction);
        ASSERT_LE(grid.offsets.size(), 64u);
        ASSERT_LE(f.space.dim(), 9u);
        EXPECT_LT(oracle_mismatch(joint_space_oracle(f.space, f.probe, grid), sc.s), 1e-10) << t;
    }
}

TEST(Oracle, RejectsOpenGrid) {
    Fixture f(PhysicalParams{}, make_caps(0, 1));
    JointGrid g{{0.0, 0.1}, {}};
    EXPECT_THROW(joint_space_oracle(f.space, f.probe, g), std::invalid_argument);
}

TEST(Oracle, DenseExponentialMatchesEigenDecomposition) {
    Fixture f(PhysicalParams{}, make_caps(1, 1));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXcd h(12, 12);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) h(i, j) = {n(rng), n(rng)};
    h = (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phase = (es.eigenvalues().cast<cplx>() * cplx(0.0, -1.0)).array().exp();
    Eigen::MatrixXcd ref = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
    EXPECT_LT((dense_exp_minus_i(h) - ref).cwiseAbs().maxCoeff(), 1e-11);
}

}  // namespace
