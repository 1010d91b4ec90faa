#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qeels/units.hpp"
#include "qeels/wavepacket.hpp"

namespace qeels {

/// Single plane wave at k0 = m_e v0 / hbar.
inline Wavepacket monochromatic(double v0_over_c, MergeTolerance tol = {}) {
    Wavepacket w(units::central_wavenumber(v0_over_c), tol);
    w.add(0.0, 1.0);
    return w;
}

/// Comb of n_teeth + 1 equal peaks at k0 + n q_mod, n in [-N/2, N/2], with
/// running phase e^{i n xi}.
inline Wavepacket comb(double v0_over_c, double q_mod, int n_teeth, double xi = 0.0, MergeTolerance tol = {}) {
    if (n_teeth < 0 || n_teeth % 2 != 0) throw std::invalid_argument("comb: n_teeth must be even and >= 0");
    if (n_teeth > 0 && !(std::isfinite(q_mod) && q_mod != 0.0))
        throw std::invalid_argument("comb: q_mod must be finite and nonzero");
    Wavepacket w(units::central_wavenumber(v0_over_c), tol);
    const double a = 1.0 / std::sqrt(n_teeth + 1.0);
    for (int n = -n_teeth / 2; n <= n_teeth / 2; ++n) w.add(n * q_mod, std::polar(a, n * xi));
    w.canonicalize();
    return w;
}

/// sum_k B(k) conj(B(k - q)).
inline std::complex<double> comb_overlap(const Wavepacket& w, double q) {
    Wavepacket shifted(w.k0(), w.tolerance());
    for (const auto& e : w.entries()) shifted.add(e.offset + q, e.amplitude);
    return inner(shifted, w);
}

/// Momentum populations on a sparse set of offsets from k0.
struct MomentumDistribution {
    double k0 = 0.0;
    MergeTolerance tol{};
    std::vector<std::pair<double, double>> entries;  // (k - k0, population), sorted

    double total() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.second;
        return s;
    }
};

inline MomentumDistribution populations(const Wavepacket& w) {
    MomentumDistribution d{w.k0(), w.tolerance(), {}};
    const Wavepacket c = w.canonical();
    for (const auto& e : c.entries()) d.entries.push_back({e.offset, std::norm(e.amplitude)});
    return d;
}

/// Merges sorted-or-not (offset, value) pairs within tolerance.
inline std::vector<std::pair<double, double>> merge_points(std::vector<std::pair<double, double>> v,
                                                           const MergeTolerance& tol) {
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<double, double>> out;
    double anchor = 0.0;
    for (const auto& p : v) {
        if (!out.empty() && tol.same(anchor, p.first)) {
            out.back().second += p.second;
        } else {
            out.push_back(p);
            anchor = p.first;
        }
    }
    return out;
}

/// Delta n_k, with Lorentzian broadening available for plotting.
struct KDistribution {
    double k0 = 0.0;
    double q_unit = 1.0;  // omega_c / v0 in 1/nm, for the (k - k0) v0 / omega_c axis
    MergeTolerance tol{};
    std::vector<std::pair<double, double>> entries;  // (k - k0, delta n)

    double sum() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.second;
        return s;
    }

    /// Value at offset (tolerance-matched), zero when absent.
    double at(double offset) const {
        for (const auto& e : entries)
            if (tol.same(e.first, offset)) return e.second;
        return 0.0;
    }

    /// Lorentzian-broadened density in 1/(1/nm) at offset x, with FWHM gamma
    /// in 1/nm. Each line is cut at +-40 gamma and renormalized to unit area.
    double broadened(double x, double gamma) const {
        if (!(gamma > 0.0)) throw std::invalid_argument("KDistribution: broadening width must be > 0");
        const double cut = 40.0 * gamma;
        const double area = 2.0 / units::pi * std::atan(2.0 * cut / gamma);
        double s = 0.0;
        for (const auto& [k, dn] : entries) {
            const double d = x - k;
            if (std::abs(d) > cut) continue;
            s += dn * (gamma / (2.0 * units::pi)) / (d * d + 0.25 * gamma * gamma);
        }
        return s / area;
    }

    /// Sums entries into bins of width `width` centred on `centres`.
    std::vector<double> binned(const std::vector<double>& centres, double width) const {
        std::vector<double> out(centres.size(), 0.0);
        for (const auto& [k, dn] : entries)
            for (std::size_t i = 0; i < centres.size(); ++i)
                if (k >= centres[i] - 0.5 * width && k < centres[i] + 0.5 * width) {
                    out[i] += dn;
                    break;
                }
        return out;
    }
};

/// after - before, pointwise. Both marginals must carry the same norm.
inline KDistribution delta_n(const MomentumDistribution& before, const MomentumDistribution& after,
                             double q_unit = 1.0) {
    if (std::abs(before.total() - after.total()) > 1e-9)
        throw std::invalid_argument("delta_n: marginals have different normalizations");
    std::vector<std::pair<double, double>> pts;
    pts.reserve(before.entries.size() + after.entries.size());
    // Subtract first so merged clusters accumulate in a fixed order.
    for (const auto& [k, n] : before.entries) pts.push_back({k, -n});
    for (const auto& [k, n] : after.entries) pts.push_back({k, n});
    KDistribution d{after.k0, q_unit, after.tol, merge_points(std::move(pts), after.tol)};
    return d;
}

struct EnergyChange {
    double eV = 0.0;
    double in_hbar_omega_c = 0.0;
};

/// Sum_k E_k Delta n_k with E_k = (hbar k)^2 / 2m_e, expanded around k0 so
/// that the large E_k0 term only multiplies sum(Delta n).
inline EnergyChange energy_change(const KDistribution& dist, double hbar_omega_c) {
    const double k0 = dist.k0;
    double s = 0.0, total = 0.0;
    for (const auto& [d, dn] : dist.entries) {
        s += (2.0 * k0 * d + d * d) * dn;
        total += dn;
    }
    const double e = units::hbar2_over_2me * s + units::kinetic_energy(k0) * total;
    return {e, e / hbar_omega_c};
}

}  // namespace qeels
