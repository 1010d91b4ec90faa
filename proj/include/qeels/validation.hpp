#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "qeels/bessel.hpp"
#include "qeels/couplings.hpp"
#include "qeels/observables.hpp"
#include "qeels/verify/coupling_oracles.hpp"

// Self-checks against independent oracles, shared by `qeels validate`
// and the acceptance binary.
namespace qeels::validation {

struct Check {
    std::string suite;
    std::string label;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct CouplingRow {
    std::string channel;
    double q = 0.0;
    double b = 0.0;
    double closed_form = 0.0;
    double oracle = 0.0;
    double rel_err = 0.0;
};

struct SuiteResult {
    std::vector<Check> checks;
    std::vector<CouplingRow> couplings;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return !checks.empty();
    }
    double worst(const std::string& suite) const {
        double w = 0.0;
        for (const auto& c : checks)
            if (c.suite == suite) w = std::max(w, c.value);
        return w;
    }
    void add(std::string suite, std::string label, double value, double threshold) {
        checks.push_back({std::move(suite), std::move(label), value, threshold, value <= threshold});
    }
    void append(const SuiteResult& o) {
        checks.insert(checks.end(), o.checks.begin(), o.checks.end());
        couplings.insert(couplings.end(), o.couplings.begin(), o.couplings.end());
    }
};

inline std::string fixed(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline std::vector<double> log_grid(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a * std::pow(b / a, n == 1 ? 0.0 : double(i) / (n - 1)));
    return v;
}

/// Closed-form couplings and I_n against quadrature, plus the Bessel recurrence.
inline SuiteResult couplings_suite(int grid_points = 4) {
    SuiteResult r;
    const double tol = 1e-8;
    // Pairs with q b above this are skipped: the couplings there are e^{-qb}
    // small and the oscillatory oracle is limited by cancellation, not by
    // the closed form.
    const double max_qb = 12.0;
    for (double q : log_grid(0.03, 1.0, grid_points)) {
        for (double b : log_grid(10.5, 30.0, grid_points)) {
            if (q * b > max_qb) continue;
            PhysicalParams p;
            p.collinear = false;
            p.b_e_c = b;
            for (auto [axis, id, tag] : {std::tuple{CavityAxis::x, 0, "e-c x"}, std::tuple{CavityAxis::z, 2, "e-c z"}}) {
                const double c = reduced_g_ec(q, axis, p);
                const double o = verify::reduced_g_ec_oracle(q, id, p);
                r.couplings.push_back({tag, q, b, c, o, rel_err(c, o)});
            }
        }
        for (double b : log_grid(0.5, 20.0, grid_points)) {
            if (q * b > max_qb) continue;
            PhysicalParams p;
            p.collinear = false;
            p.b_e_qe = b;
            const double c = reduced_g_eqe(q, p);
            const double o = std::abs(verify::reduced_g_eqe_oracle(q, p));
            r.couplings.push_back({"e-qe", q, b, c, o, rel_err(c, o)});
        }
    }
    double worst = 0.0;
    for (const auto& row : r.couplings) worst = std::max(worst, row.rel_err);
    r.add("couplings", "coupling closed form vs quadrature (max rel err)", worst, tol);

    double worst_in = 0.0;
    for (double phi : log_grid(0.02, 8.0, grid_points + 2))
        for (int n = 0; n <= 2; ++n) {
            const auto c = i_n_closed(n, phi);
            const auto o = verify::i_n_oracle(n, phi);
            worst_in = std::max(worst_in, std::abs(c - o) / std::abs(c));
        }
    r.add("couplings", "I_n closed form vs quadrature (max rel err)", worst_in, tol);

    double worst_rec = 0.0;
    for (double x : log_grid(1e-3, 500.0, 40)) {
        // K2 = K0 + (2/x) K1, compared on the exponentially scaled values.
        const auto [k0s, k1s] = bessel::k01_scaled(x);
        const double k2s = bessel::k2(x) * std::exp(x);
        worst_rec = std::max(worst_rec, std::abs(k2s - k0s - 2.0 / x * k1s) / std::abs(k2s));
    }
    r.add("couplings", "Bessel recurrence residual", worst_rec, 1e-10);
    return r;
}

/// Shift-algebra S against the dense joint-space exponential.
inline SuiteResult joint_suite(int configs = 4, unsigned long seed = 20240601) {
    SuiteResult r;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> speed(0.02, 0.2), dist(0.5, 5.0), det(-0.2, 0.2);
    const Caps choices[] = {make_caps(2, 1), make_caps(1, 1), make_caps(0, 2), make_caps(0, 3)};
    for (int t = 0; t < configs; ++t) {
        const double v = speed(rng), b = dist(rng), d = det(rng);
        PhysicalParams p = with_half_detuning(with_speed(with_b_e_qe(PhysicalParams{}, b), v), d);
        const auto space = build_space(p, choices[t % 4]);
        const auto probe = ProbeConfig::from(p);
        const auto sc = scattering_matrix(space, probe);
        const auto grid = transfer_grid(sc.interaction);
        const bool small = space.dim() <= 9 && grid.offsets.size() <= 64;
        const double mismatch = small ? oracle_mismatch(joint_space_oracle(space, probe, grid), sc.s) : 1.0;
        char label[160];
        std::snprintf(label, sizeof label, "joint oracle v0=%.4f b_e_qe=%.3f delta=%.3f dim=%zu momenta=%zu", v, b,
                      d, space.dim(), grid.offsets.size());
        r.add("joint", label, mismatch, 1e-10);
    }
    return r;
}

/// Unitarity of S at default caps across the speed range.
inline SuiteResult unitarity_suite(const std::vector<double>& speeds = {0.02, 0.08, 0.2}) {
    SuiteResult r;
    for (double v : speeds) {
        const PhysicalParams p = with_speed(PhysicalParams{}, v);
        const auto space = build_space(p);
        const auto sc = scattering_matrix(space, ProbeConfig::from(p));
        r.add("unitarity", "unitarity defect v0=" + fixed(v), unitarity_defect(sc.s), 1e-10);
    }
    return r;
}

/// Algebraic populations against the two-state closed form.
inline SuiteResult two_state_suite(int tuples = 20, unsigned long seed = 17) {
    SuiteResult r;
    r.add("two_state", "comb overlap N=100 vs 100/101",
          std::abs(comb_overlap(comb(0.02, 0.5, 100), 0.5) - 100.0 / 101.0), 1e-14);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < tuples; ++t) {
        const double v = 0.02 + 0.18 * u(rng);
        const PhysicalParams p = with_speed(PhysicalParams{}, v);
        const auto space = build_space(p);
        const auto probe = ProbeConfig::from(p);
        const auto sc = scattering_matrix(space, probe);
        const std::size_t m1 = 0;
        const std::size_t m2 = space.index(0, 1, t % 2 ? Branch::plus : Branch::minus);
        const double phi = units::pi * u(rng), theta = 2 * units::pi * u(rng);
        // q_mod at the transition, a subharmonic, or detuned from it.
        const double scale[] = {1.0, 0.5, 0.37};
        const double q_mod = sc.interaction.q(m2, m1) * scale[t % 3];
        const auto w = comb(v, q_mod, 100, 0.0);
        TargetVector c = TargetVector::Zero(space.dim());
        c(m1) = std::cos(phi);
        c(m2) = std::polar(std::sin(phi), theta);
        const auto rho = reduce_target(scatter(space, sc, c, w, probe));
        for (std::size_t s = 0; s < space.dim(); ++s)
            worst = std::max(worst, std::abs(rho.population(s) - two_level_population(sc, s, m1, m2, phi, theta, w)));
    }
    r.add("two_state", "populations vs two-state closed form (" + std::to_string(tuples) + " tuples)", worst, 1e-10);
    return r;
}

}  // namespace qeels::validation
