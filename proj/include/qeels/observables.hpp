#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qeels/couplings.hpp"
#include "qeels/electron.hpp"
#include "qeels/hilbert.hpp"
#include "qeels/scattering.hpp"
#include "qeels/shift_algebra.hpp"

namespace qeels {

using TargetVector = Eigen::VectorXcd;

/// |0>_z [sqrt(1 - f^2)|0>_x + f|1>_x] |g>, in the polariton basis.
inline TargetVector pinem_initial(const TargetSpace& space, double f) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("pinem_initial: f must lie in [0, 1]");
    return bare_to_polariton(space, {{BareState{0, 0, false}, std::sqrt(1.0 - f * f)}, {BareState{0, 1, false}, f}});
}

/// (1/2)|0>_z [sqrt(3)|0>_x + e^{i theta}|1>_x] |g>, in the polariton basis.
inline TargetVector superposition_initial(const TargetSpace& space, double theta) {
    return bare_to_polariton(space, {{BareState{0, 0, false}, std::sqrt(3.0) / 2.0},
                                     {BareState{0, 1, false}, std::polar(0.5, theta)}});
}

inline TargetVector basis_state(const TargetSpace& space, std::size_t i) {
    TargetVector v = TargetVector::Zero(space.dim());
    v(i) = 1.0;
    return v;
}

/// sum_i |psi_i> (x) |w_i>.
struct JointState {
    std::vector<Wavepacket> parts;
    std::vector<std::string> warnings;

    double norm_squared() const {
        double s = 0.0;
        for (const auto& w : parts) s += w.norm_squared();
        return s;
    }
};

/// Indices with |c_i| above threshold.
inline std::vector<std::size_t> support(const TargetVector& c, double threshold = 1e-14) {
    std::vector<std::size_t> out;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        if (std::abs(c(i)) > threshold) out.push_back(static_cast<std::size_t>(i));
    return out;
}

/// Throws unless every populated state keeps one spare excitation of both
/// ladders inside the caps.
inline void require_padding(const TargetSpace& space, const std::vector<std::size_t>& populated) {
    for (std::size_t j : populated)
        if (space.on_edge(j))
            throw std::invalid_argument("scatter: populated state " + label(space.state(j)) +
                                        " has no padding manifold inside the caps");
}

/// w_i = sum_j S_ij c_j applied to w.
inline JointState scatter(const TargetSpace& space, const Scattering& sc, const TargetVector& c,
                          const Wavepacket& w, const ProbeConfig& probe) {
    if (static_cast<std::size_t>(c.size()) != space.dim() || sc.s.dim() != space.dim())
        throw std::invalid_argument("scatter: dimension mismatch");
    const auto populated = support(c);
    require_padding(space, populated);
    JointState js;
    js.warnings = sc.interaction.warnings;
    for (auto& m : truncation_warnings(space, probe, populated)) js.warnings.push_back(std::move(m));
    const Wavepacket win = w.canonical();
    js.parts.assign(space.dim(), Wavepacket(win.k0(), win.tolerance()));
    for (std::size_t i = 0; i < space.dim(); ++i) {
        for (std::size_t j : populated) {
            const auto& p = sc.s(i, j);
            if (p.empty()) continue;
            js.parts[i].accumulate(apply_poly(p, win), c(j));
        }
        js.parts[i].canonicalize();
    }
    return js;
}

struct TargetDensity {
    Eigen::MatrixXcd rho;

    double trace() const { return rho.trace().real(); }
    double population(std::size_t i) const { return rho(i, i).real(); }
    Eigen::VectorXd populations() const { return rho.diagonal().real(); }
};

/// Hermiticity, unit trace and positivity within tolerance.
inline void check_density(const TargetDensity& d, double herm_tol = 1e-12, double trace_tol = 1e-10,
                          double psd_floor = -1e-10) {
    if ((d.rho - d.rho.adjoint()).cwiseAbs().maxCoeff() > herm_tol)
        throw std::domain_error("density matrix is not Hermitian");
    if (std::abs(d.trace() - 1.0) > trace_tol) throw std::domain_error("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d.rho);
    if (es.eigenvalues().minCoeff() < psd_floor) throw std::domain_error("density matrix is not positive");
}

inline TargetDensity pure_density(const TargetVector& c) { return {c * c.adjoint()}; }

/// rho_ij = <w_j | w_i>.
inline TargetDensity reduce_target(const JointState& js) {
    const std::size_t d = js.parts.size();
    TargetDensity out{Eigen::MatrixXcd::Zero(d, d)};
    std::vector<Wavepacket> c;
    c.reserve(d);
    for (const auto& w : js.parts) c.push_back(w.canonical());
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            const cplx v = inner(c[j], c[i]);
            out.rho(i, j) = v;
            out.rho(j, i) = std::conj(v);
        }
    for (std::size_t i = 0; i < d; ++i) out.rho(i, i) = out.rho(i, i).real();
    return out;
}

/// Electron momentum populations with the target traced out.
inline MomentumDistribution reduce_electron(const JointState& js) {
    if (js.parts.empty()) return {};
    const auto& tol = js.parts.front().tolerance();
    std::vector<std::pair<double, double>> pts;
    for (const auto& w : js.parts) {
        const Wavepacket c = w.canonical();
        for (const auto& e : c.entries()) pts.push_back({e.offset, std::norm(e.amplitude)});
    }
    return {js.parts.front().k0(), tol, merge_points(std::move(pts), tol)};
}

/// Mixed-state input: propagates each eigen-component of rho and sums.
inline TargetDensity scatter_density(const TargetSpace& space, const Scattering& sc, const TargetDensity& rho0,
                                     const Wavepacket& w, const ProbeConfig& probe,
                                     MomentumDistribution* electron = nullptr) {
    if ((rho0.rho - rho0.rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::domain_error("scatter_density: input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho0.rho);
    TargetDensity out{Eigen::MatrixXcd::Zero(space.dim(), space.dim())};
    std::vector<std::pair<double, double>> pts;
    for (Eigen::Index k = es.eigenvalues().size() - 1; k >= 0; --k) {
        const double p = es.eigenvalues()(k);
        if (p <= 1e-15) continue;
        const JointState js = scatter(space, sc, es.eigenvectors().col(k), w, probe);
        out.rho += p * reduce_target(js).rho;
        if (electron)
            for (const auto& [x, n] : reduce_electron(js).entries) pts.push_back({x, p * n});
    }
    if (electron) *electron = {w.k0(), w.tolerance(), merge_points(std::move(pts), w.tolerance())};
    return out;
}

/// mu_c (a_x + a_z) in the polariton basis (lowering part).
inline Eigen::MatrixXd dipole_operator(const TargetSpace& space) {
    return induced_dipole_moment(space.params()) * (space.a_x() + space.a_z());
}

struct SpectrumLine {
    double omega = 0.0;     // eV (hbar omega)
    double weight = 0.0;    // (e nm)^2
    std::size_t lower = 0;  // index of the final state
    std::vector<std::size_t> upper;
};

enum class Normalization { raw, i0 };

inline const char* to_string(Normalization n) { return n == Normalization::raw ? "raw" : "i0"; }

struct SpectrumLines {
    std::vector<SpectrumLine> lines;
    double sigma = 0.0;  // eV
    Normalization mode = Normalization::raw;
    double scale = 1.0;  // intensities are divided by this

    double total_weight() const {
        double s = 0.0;
        for (const auto& l : lines) s += l.weight;
        return s;
    }

    /// I(omega) with Lorentzian lines (sigma/2pi) / (omega^2 + sigma^2/4).
    double sample(double omega) const {
        if (!(sigma > 0.0)) throw std::invalid_argument("SpectrumLines: sampling needs sigma > 0");
        double s = 0.0;
        for (const auto& l : lines) {
            const double d = omega - l.omega;
            s += l.weight * (sigma / (2.0 * units::pi)) / (d * d + 0.25 * sigma * sigma);
        }
        return s / scale;
    }

    std::vector<double> sample(const std::vector<double>& omegas) const {
        std::vector<double> out;
        out.reserve(omegas.size());
        for (double w : omegas) out.push_back(sample(w));
        return out;
    }
};

/// Groups state indices (sorted by energy) into chains closer than tol.
inline std::vector<std::vector<std::size_t>> degeneracy_classes(std::span<const double> energies,
                                                                double tol = degeneracy_tol_eV) {
    std::vector<std::size_t> order(energies.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return energies[a] < energies[b]; });
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k > 0 && energies[order[k]] - energies[order[k - 1]] <= tol)
            out.back().push_back(order[k]);
        else
            out.push_back({order[k]});
    }
    return out;
}

/// Secular power spectrum of the dipole operator for density rho. Energies
/// are taken from `energies` so tests can perturb degeneracies.
inline SpectrumLines power_spectrum(const TargetDensity& rho, const Eigen::MatrixXd& xi,
                                    std::span<const double> energies, double sigma) {
    const std::size_t d = energies.size();
    if (static_cast<std::size_t>(rho.rho.rows()) != d || static_cast<std::size_t>(xi.rows()) != d)
        throw std::invalid_argument("power_spectrum: dimension mismatch");
    if ((rho.rho - rho.rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::domain_error("power_spectrum: density matrix is not Hermitian");
    SpectrumLines out;
    out.sigma = sigma;
    const auto classes = degeneracy_classes(energies);
    for (std::size_t b = 0; b < d; ++b) {
        for (const auto& cls : classes) {
            const double omega = energies[cls.front()] - energies[b];
            if (omega <= degeneracy_tol_eV) continue;
            cplx w = 0.0;
            bool coupled = false;
            for (std::size_t a : cls) {
                if (xi(b, a) == 0.0) continue;
                coupled = true;
                for (std::size_t a2 : cls) w += xi(b, a) * rho.rho(a, a2) * xi(b, a2);
            }
            if (!coupled) continue;
            out.lines.push_back({omega, w.real(), b, cls});
        }
    }
    return out;
}

inline SpectrumLines power_spectrum(const TargetDensity& rho, const TargetSpace& space, double sigma) {
    return power_spectrum(rho, dipole_operator(space), space.energies(), sigma);
}

/// Tr(xi rho_sec xi^dagger) over positive-frequency pairs: the sum rule the
/// line weights must satisfy.
inline double spectrum_sum_rule(const TargetDensity& rho, const Eigen::MatrixXd& xi, std::span<const double> energies) {
    const auto classes = degeneracy_classes(energies);
    std::vector<std::size_t> cls_of(energies.size());
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (std::size_t a : classes[c]) cls_of[a] = c;
    cplx s = 0.0;
    for (std::size_t b = 0; b < energies.size(); ++b)
        for (std::size_t a = 0; a < energies.size(); ++a)
            for (std::size_t a2 = 0; a2 < energies.size(); ++a2) {
                if (cls_of[a] != cls_of[a2]) continue;
                if (energies[a] - energies[b] <= degeneracy_tol_eV) continue;
                s += xi(b, a) * rho.rho(a, a2) * xi(b, a2);
            }
    return s.real();
}

inline std::vector<double> peak_heights(const SpectrumLines& lines, const std::vector<double>& targets) {
    return lines.sample(targets);
}

/// Closed-form population of |s> for the initial state cos(phi)|m1> +
/// e^{i theta} sin(phi)|m2> and electron w, using the single-shift entries of S.
inline double two_level_population(const Scattering& sc, std::size_t s, std::size_t m1, std::size_t m2, double phi,
                                   double theta, const Wavepacket& w) {
    const auto& q = sc.interaction.q;
    const cplx s1 = sc.s(s, m1).coefficient(q(s, m1));
    const cplx s2 = sc.s(s, m2).coefficient(q(s, m2));
    const double c = std::cos(phi), sn = std::sin(phi);
    const cplx overlap = comb_overlap(w, q(m2, m1));
    return c * c * std::norm(s1) + sn * sn * std::norm(s2) +
           (std::polar(1.0, -theta) * std::sin(2.0 * phi) * s1 * std::conj(s2) * overlap).real();
}

}  // namespace qeels
