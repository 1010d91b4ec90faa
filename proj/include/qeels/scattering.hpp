#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qeels/couplings.hpp"
#include "qeels/hilbert.hpp"
#include "qeels/shift_algebra.hpp"

namespace qeels {

/// Electron trajectory and the interaction channels it may use.
struct ProbeConfig {
    double v0_over_c = 0.02;
    double b_e_c = 11.0;   // nm
    double b_e_qe = 1.0;   // nm
    bool ec_x = true;
    bool ec_z = true;
    bool e_qe = true;

    static ProbeConfig from(const PhysicalParams& p) { return {p.v0_over_c, p.b_e_c, p.b_e_qe}; }
};

inline void validate(const ProbeConfig& c) {
    require_param(std::isfinite(c.v0_over_c) && c.v0_over_c > 0 && c.v0_over_c < 1, "v0_over_c",
                  "must lie in (0, 1)");
    require_param(std::isfinite(c.b_e_c) && c.b_e_c > 0, "b_e_c", "must be > 0");
    require_param(std::isfinite(c.b_e_qe) && c.b_e_qe > 0, "b_e_qe", "must be > 0");
}

/// Target parameters with the probe's speed and impact parameters.
inline PhysicalParams probe_params(const TargetSpace& space, const ProbeConfig& probe) {
    validate(probe);
    PhysicalParams p = space.params();
    p.v0_over_c = probe.v0_over_c;
    p.b_e_c = probe.b_e_c;
    p.b_e_qe = probe.b_e_qe;
    p.collinear = false;
    return p;
}

/// Energies closer than this are treated as degenerate (elastic, q = 0).
inline constexpr double degeneracy_tol_eV = 1e-9;

struct Interaction {
    ShiftMatrix h;           // dimensionless entries h_ij b_{q_ij}
    Eigen::MatrixXd q;       // q_ij = (E_i - E_j) / hbar v0, 1/nm
    Eigen::MatrixXcd value;  // h_ij amplitudes
    double hbar_v0 = 0.0;
    double k0 = 0.0;
    std::vector<std::string> warnings;
};

namespace detail {

inline cplx interaction_entry(const TargetSpace& space, const ProbeConfig& probe, const PhysicalParams& pp,
                              std::size_t i, std::size_t j, double q) {
    const auto& ax = space.a_x();
    const auto& az = space.a_z();
    const auto& sm = space.sigma();
    const double hv = pp.hbar_v0();
    const double sgn = q > 0 ? 1.0 : -1.0;
    cplx v = 0.0;
    // <i| a^dagger - a |j> for a real ladder operator A is A(j,i) - A(i,j).
    if (probe.ec_x) {
        const double m = ax(j, i) - ax(i, j);
        if (m != 0.0) v += reduced_g_ec(q, CavityAxis::x, pp) * m;
    }
    if (probe.ec_z) {
        const double m = az(j, i) - az(i, j);
        if (m != 0.0) v += reduced_g_ec(q, CavityAxis::z, pp) * m;
    }
    if (probe.e_qe) {
        const double m = sm(j, i) - sm(i, j);
        if (m != 0.0) v += reduced_g_eqe(q, pp) * qe_phase(q, pp) * m;
    }
    return sgn * v / hv;
}

}  // namespace detail

/// Single entry h_ij of the dimensionless interaction matrix.
inline cplx matrix_element_h(const TargetSpace& space, const ProbeConfig& probe, std::size_t i, std::size_t j) {
    if (i >= space.dim() || j >= space.dim()) throw std::out_of_range("matrix_element_h: index out of range");
    const PhysicalParams pp = probe_params(space, probe);
    const double de = space.energy(i) - space.energy(j);
    if (std::abs(de) <= degeneracy_tol_eV) return 0.0;
    return detail::interaction_entry(space, probe, pp, i, j, de / pp.hbar_v0());
}

inline Interaction build_interaction(const TargetSpace& space, const ProbeConfig& probe,
                                     MergeTolerance tol = {}) {
    const PhysicalParams pp = probe_params(space, probe);
    const std::size_t d = space.dim();
    Interaction out;
    out.hbar_v0 = pp.hbar_v0();
    out.k0 = pp.k0();
    out.h = ShiftMatrix(d, tol);
    out.q = Eigen::MatrixXd::Zero(d, d);
    out.value = Eigen::MatrixXcd::Zero(d, d);
    const double q_scale = space.params().hbar_omega_c / out.hbar_v0;
    double worst_q = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double de = space.energy(i) - space.energy(j);
            const double q = de / out.hbar_v0;
            out.q(i, j) = q;
            if (std::abs(de) <= degeneracy_tol_eV) continue;
            const cplx v = detail::interaction_entry(space, probe, pp, i, j, q);
            if (v == 0.0) continue;
            out.value(i, j) = v;
            out.h(i, j) = ShiftPoly(v, q, tol);
            worst_q = std::max(worst_q, std::abs(q));
        }
    }
    if (worst_q > 10.0 * q_scale || (worst_q > 0 && out.k0 / worst_q < 10.0)) {
        std::ostringstream os;
        os << "nonrecoil guard: max |q| = " << worst_q << " 1/nm against omega_c/v0 = " << q_scale
           << " and k0 = " << out.k0;
        out.warnings.push_back(os.str());
    }
    return out;
}

/// Estimated coupling from state j to the nearest state removed by the caps.
inline double truncation_coupling(const TargetSpace& space, const ProbeConfig& probe, std::size_t j) {
    if (!space.on_edge(j)) return 0.0;
    const PhysicalParams pp = probe_params(space, probe);
    const auto& s = space.state(j);
    const double q = space.params().hbar_omega_c / pp.hbar_v0();
    double c = 0.0;
    if (probe.ec_z) c = std::max(c, reduced_g_ec(q, CavityAxis::z, pp) * std::sqrt(s.n_z + 1.0));
    const double n1 = std::sqrt(s.manifold_n + 1.0);
    if (probe.ec_x) c = std::max(c, reduced_g_ec(q, CavityAxis::x, pp) * n1);
    if (probe.e_qe) c = std::max(c, reduced_g_eqe(q, pp));
    return c / pp.hbar_v0();
}

/// Warnings for populated states that couple out of the truncated space.
inline std::vector<std::string> truncation_warnings(const TargetSpace& space, const ProbeConfig& probe,
                                                    const std::vector<std::size_t>& populated) {
    std::vector<std::string> out;
    for (std::size_t j : populated) {
        const double c = truncation_coupling(space, probe, j);
        if (c > 1e-8) {
            std::ostringstream os;
            os << "truncation: populated state " << label(space.state(j)) << " couples out of the caps with |h| ~ "
               << c;
            out.push_back(os.str());
        }
    }
    return out;
}

struct Scattering {
    Interaction interaction;
    ShiftMatrix s;
    ExpInfo exp_info;
};

inline Scattering scattering_matrix(const TargetSpace& space, const ProbeConfig& probe,
                                    const ExpOptions& opt = {}, MergeTolerance tol = {}) {
    Scattering out;
    out.interaction = build_interaction(space, probe, tol);
    out.s = mat_exp(out.interaction.h, cplx(0.0, -1.0), opt, &out.exp_info);
    return out;
}

/// Amplitude norm of S^dagger S - 1.
inline double unitarity_defect(const ShiftMatrix& s) { return distance_from_identity(mat_mul(dagger_transpose(s), s)); }

// Brute-force oracle on target x explicit electron momenta.

struct JointGrid {
    std::vector<double> offsets;  // electron momenta k - k0, 1/nm
    MergeTolerance tol{};

    std::optional<std::size_t> find(double offset) const {
        for (std::size_t m = 0; m < offsets.size(); ++m)
            if (tol.same(offsets[m], offset)) return m;
        return std::nullopt;
    }
};

/// Grid of every distinct -q_ij (and 0). Closed for any single source momentum 0.
inline JointGrid transfer_grid(const Interaction& in, MergeTolerance tol = {}) {
    JointGrid g{{0.0}, tol};
    for (Eigen::Index i = 0; i < in.q.rows(); ++i)
        for (Eigen::Index j = 0; j < in.q.cols(); ++j)
            if (!g.find(-in.q(i, j))) g.offsets.push_back(-in.q(i, j));
    std::sort(g.offsets.begin(), g.offsets.end());
    return g;
}

struct JointOracle {
    Eigen::MatrixXcd unitary;  // index = target * M + momentum
    std::size_t target_dim = 0;
    JointGrid grid;

    std::size_t index(std::size_t target, std::size_t momentum) const {
        return target * grid.offsets.size() + momentum;
    }
};

/// Dense exponential exp(-i H) by scaled Taylor series and repeated squaring.
inline Eigen::MatrixXcd dense_exp_minus_i(const Eigen::MatrixXcd& h) {
    const Eigen::Index n = h.rows();
    double norm = h.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    const Eigen::MatrixXcd x = cplx(0.0, -std::ldexp(1.0, -squarings)) * h;
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd term = sum;
    for (int k = 1; k <= 60; ++k) {
        term = (term * x) / double(k);
        sum += term;
        if (term.cwiseAbs().sum() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

/// Builds H_I on target x grid with Kronecker-delta energy conservation and
/// exponentiates it. Every source momentum in `sources` must reach only grid
/// momenta: s - q_ij must exist for all target pairs with nonzero coupling.
inline JointOracle joint_space_oracle(const TargetSpace& space, const ProbeConfig& probe, const JointGrid& grid,
                                      const std::vector<double>& sources = {0.0}) {
    if (grid.offsets.size() > 64) throw std::invalid_argument("joint_space_oracle: at most 64 momenta");
    const Interaction in = build_interaction(space, probe, grid.tol);
    const std::size_t d = space.dim();
    for (double s : sources) {
        if (!grid.find(s)) throw std::invalid_argument("joint_space_oracle: source momentum not on the grid");
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t i = 0; i < d; ++i)
                if (!grid.find(s - in.q(i, j)))
                    throw std::invalid_argument("joint_space_oracle: grid not shift-closed");
    }
    JointOracle out;
    out.target_dim = d;
    out.grid = grid;
    const std::size_t m = grid.offsets.size();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d * m, d * m);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            if (in.value(i, j) == 0.0) continue;
            for (std::size_t a = 0; a < m; ++a) {
                auto b = grid.find(grid.offsets[a] - in.q(i, j));
                if (b) h(out.index(i, *b), out.index(j, a)) = in.value(i, j);
            }
        }
    out.unitary = dense_exp_minus_i(h);
    return out;
}

/// Largest deviation between <i, s - q | U | j, s> of the oracle and the
/// amplitude S_ij applies to a momentum eigenstate at s, over all i, j, grid
/// momenta and sources.
inline double oracle_mismatch(const JointOracle& o, const ShiftMatrix& s, const std::vector<double>& sources = {0.0}) {
    double worst = 0.0;
    const std::size_t d = o.target_dim;
    for (double src : sources) {
        const std::size_t a = *o.grid.find(src);
        Wavepacket w(0.0, o.grid.tol);
        w.add(src, 1.0);
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t i = 0; i < d; ++i) {
                const Wavepacket out = apply_poly(s(i, j), w);
                for (std::size_t b = 0; b < o.grid.offsets.size(); ++b) {
                    const cplx oracle = o.unitary(o.index(i, b), o.index(j, a));
                    const cplx algebra = out.at_offset(o.grid.offsets[b]);
                    worst = std::max(worst, std::abs(oracle - algebra));
                }
            }
    }
    return worst;
}

}  // namespace qeels
