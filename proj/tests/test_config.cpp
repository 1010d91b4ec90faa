#include <gtest/gtest.h>

#include "qeels/config.hpp"

namespace {

using namespace qeels;

TEST(Config, EmptyFileGivesReferenceDefaults) {
    const auto c = parse_config("");
    EXPECT_EQ(c.kind, Experiment::custom);
    EXPECT_EQ(c.params.hbar_omega_c, 2.0);
    EXPECT_EQ(c.params.hbar_omega_qe, 2.0);
    EXPECT_EQ(c.params.mu_qe, 1.0);
    EXPECT_EQ(c.params.radius_r, 10.0);
    EXPECT_EQ(c.params.b_c_qe, 10.0);
    EXPECT_EQ(c.params.sigma, 0.02);
    EXPECT_EQ(c.n_comb, 100);
    ASSERT_EQ(c.b_e_qe.size(), 1u);
    EXPECT_EQ(c.point(c.v0_over_c[0], c.b_e_qe[0]).b_e_c, 11.0);
    EXPECT_EQ(c.point(c.v0_over_c[0], c.b_e_qe[0]).b_e_qe, 1.0);
    EXPECT_EQ(c.caps.n_z_max, 2);
    EXPECT_EQ(c.caps.manifold_max, 4);
}

TEST(Config, ScalarOverridesSweep) {
    const auto c = parse_config("[probe]\nv0_over_c = 0.08\n", {Experiment::fig6, {}, {}, {}, {}, {}});
    ASSERT_EQ(c.v0_over_c.size(), 1u);
    EXPECT_EQ(c.v0_over_c[0], 0.08);
    EXPECT_EQ(c.b_e_qe.size(), 40u);
}

TEST(Config, RangeErrorNamesKey) {
    try {
        parse_config("[target]\nradius_r = -1\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("radius_r"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    EXPECT_THROW(parse_config("[probe]\nv0_over_c = 1.2\n"), ConfigError);
    EXPECT_THROW(parse_config("[state]\nf = 0.5, 2\n"), ConfigError);
    EXPECT_THROW(parse_config("[beam]\nn_comb = 3\n"), ConfigError);
}

TEST(Config, SyntaxErrorsCarryLineNumbers) {
    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message("# c\n[probe]\nv0_over_c 0.3\n").find("line 3"), std::string::npos);
    EXPECT_NE(message("[nowhere]\n").find("unknown section"), std::string::npos);
    EXPECT_NE(message("[target]\nmu = 1\n").find("unknown key 'mu'"), std::string::npos);
    EXPECT_NE(message("v0_over_c = 1\n").find("outside any"), std::string::npos);
    EXPECT_NE(message("[probe]\nb_e_qe = 1\nb_e_qe = 2\n").find("duplicate"), std::string::npos);
    EXPECT_NE(message("[probe]\nb_e_qe = two\n").find("b_e_qe"), std::string::npos);
}

TEST(Config, ListsRangesAndPi) {
    const auto c = parse_config(
        "[state]\ntheta = -pi/2, pi/2, 3*pi/4\n[probe]\nv0_over_c = linspace(0.02, 0.1, 5), 0.2\n"
        "b_e_qe = logspace(1, 100, 3)\n");
    ASSERT_EQ(c.theta.size(), 3u);
    EXPECT_DOUBLE_EQ(c.theta[0], -units::pi / 2);
    EXPECT_DOUBLE_EQ(c.theta[2], 0.75 * units::pi);
    ASSERT_EQ(c.v0_over_c.size(), 6u);
    EXPECT_DOUBLE_EQ(c.v0_over_c[1], 0.04);
    EXPECT_DOUBLE_EQ(c.v0_over_c[5], 0.2);
    ASSERT_EQ(c.b_e_qe.size(), 3u);
    EXPECT_NEAR(c.b_e_qe[1], 10.0, 1e-12);
}

TEST(Config, CollinearGeometry) {
    auto c = parse_config("[probe]\nb_e_qe = 2\n");
    EXPECT_EQ(c.point(0.02, 2.0).b_e_c, 12.0);
    EXPECT_THROW(parse_config("[probe]\nb_e_qe = 2\nb_e_c = 11\n"), ConfigError);
    c = parse_config("[target]\ncollinear = false\n[probe]\nb_e_qe = 2\nb_e_c = 11\n");
    EXPECT_EQ(c.point(0.02, 2.0).b_e_c, 11.0);
}

TEST(Config, OverridesAndDetuning) {
    ConfigOverrides ov;
    ov.kind = Experiment::validate;
    ov.suite = "joint";
    ov.n_z_max = 1;
    ov.manifold_max = 3;
    ov.normalization = Normalization::i0;
    const auto c = parse_config("[experiment]\nkind = fig2\n[target]\nhalf_detuning = 0.1\n", ov);
    EXPECT_EQ(c.kind, Experiment::validate);
    EXPECT_EQ(c.suite, "joint");
    EXPECT_EQ(c.caps.n_z_max, 1);
    EXPECT_EQ(c.caps.manifold_max, 3);
    EXPECT_EQ(c.normalization, Normalization::i0);
    EXPECT_NEAR(c.params.hbar_omega_qe, 1.8, 1e-15);
    EXPECT_THROW(parse_config("[target]\nhalf_detuning = 0.1\nhbar_omega_qe = 2\n"), ConfigError);
    EXPECT_THROW(parse_config("[experiment]\nkind = fig9\n"), ConfigError);
}

TEST(Config, EchoIsStableAndCompact) {
    const auto a = parse_config("", {Experiment::fig6, {}, {}, {}, {}, {}});
    const auto b = parse_config("", {Experiment::fig6, {}, {}, {}, {}, {}});
    EXPECT_EQ(a.echo(), b.echo());
    bool found = false;
    for (const auto& [k, v] : a.echo())
        if (k == "probe.v0_over_c") {
            EXPECT_EQ(v, "linspace(0.02, 0.2, 40)");
            found = true;
        }
    EXPECT_TRUE(found);
}

}  // namespace
