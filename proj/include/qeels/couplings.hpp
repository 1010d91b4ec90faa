#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "qeels/bessel.hpp"
#include "qeels/params.hpp"
#include "qeels/units.hpp"

// Closed-form probe-target couplings in the quasi-static limit.
//
// Electron couplings are returned "reduced": multiplied by hbar and by the
// quantization length L, so they carry units of eV*nm and never reference L.
// Dividing by hbar*v0 (eV*nm) gives the dimensionless scattering amplitude.
namespace qeels {

enum class CavityAxis { x, y, z };

/// hbar g^{c-QE}_x in eV for an x-oriented emitter on the x axis.
inline double coupling_g_c_qe(const PhysicalParams& p) {
    validate(p);
    const double ratio3 = std::pow(p.radius_r / p.b_c_qe, 3);
    const double inner = 0.5 * units::pi * ratio3 * p.mu_qe * p.mu_qe * units::e2_over_eps0 /
                         (p.hbar_omega_c * std::pow(p.b_c_qe, 3));
    return p.hbar_omega_qe / 3.0 * std::sqrt(inner);
}

/// Shared prefactor sqrt(e^2 pi R^3 / (2 eps0 hbar omega_c)) in nm^2.
inline double cavity_mode_strength(const PhysicalParams& p) {
    return std::sqrt(units::e2_over_eps0 * units::pi * std::pow(p.radius_r, 3) /
                     (2.0 * p.hbar_omega_c));
}

/// L*hbar*g^{e-c}_{q,axis} in eV*nm. Exactly zero at q = 0 and identically
/// zero for the y mode (the electron moves in the xz plane).
inline double reduced_g_ec(double q, CavityAxis axis, const PhysicalParams& p) {
    if (axis == CavityAxis::y || q == 0.0) return 0.0;
    const double x = std::abs(q) * p.b_e_c;
    if (x > 740.0) return 0.0;
    auto [k0, k1] = bessel::k01(x);
    const double kn = (axis == CavityAxis::x) ? k1 : k0;
    return p.hbar_v0() / 3.0 * q * q * kn * cavity_mode_strength(p);
}

/// |L*hbar*g^{e-QE}_q| in eV*nm for an x-oriented emitter dipole.
/// The e^{i q z_qe} phase and the sign(q) of the Hamiltonian are attached by
/// the scattering assembly, see qe_phase().
inline double reduced_g_eqe(double q, const PhysicalParams& p) {
    if (q == 0.0 || p.mu_qe == 0.0) return 0.0;
    const double x = std::abs(q) * p.b_e_qe;
    if (x > 740.0) return 0.0;
    // e k0 q^2 mu / (2 pi m eps0 omega) * hbar * L  ->  hbar v0 * (e^2/eps0) mu q^2 / (2 pi hbar omega)
    return p.hbar_v0() * units::e2_over_eps0 * p.mu_qe * q * q * bessel::k1(x) /
           (2.0 * units::pi * p.hbar_omega_qe);
}

inline std::complex<double> qe_phase(double q, const PhysicalParams& p) {
    if (p.z_qe == 0.0) return 1.0;
    return std::polar(1.0, q * p.z_qe);
}

/// Closed forms of I_n(phi) = \int dz z^n e^{i|phi|z} / (1+z^2)^{5/2}.
inline std::complex<double> i_n_closed(int n, double phi) {
    if (phi == 0.0 || !std::isfinite(phi)) throw std::domain_error("i_n_closed: phi must be nonzero");
    const double a = std::abs(phi);
    auto [k0, k1] = bessel::k01(a);
    switch (n) {
        case 0: return 2.0 / 3.0 * a * a * (k0 + 2.0 * k1 / a);
        case 1: return {0.0, 2.0 / 3.0 * a * a * k1};
        case 2: return 2.0 / 3.0 * (a * k1 - a * a * k0);
        default: throw std::domain_error("i_n_closed: n must be 0, 1 or 2");
    }
}

/// I_0 - 2 I_2 = 2 |phi|^2 K0(|phi|).
inline double i0_minus_2i2(double phi) {
    const double a = std::abs(phi);
    return 2.0 * a * a * bessel::k0(a);
}

/// Classical nonretarded EELS loss probability of the sphere in the
/// lossless (delta-function) limit, impact parameter b_e_c.
inline double classical_eels_loss(const PhysicalParams& p) {
    validate(p);
    const double q = p.hbar_omega_c / p.hbar_v0();
    const double x = q * p.b_e_c;
    auto [k0, k1] = bessel::k01(x);
    return units::e2_over_eps0 / (units::pi * units::pi * p.hbar_omega_c) * std::pow(q, 4) *
           (k0 * k0 + k1 * k1) * units::pi * std::pow(p.radius_r, 3) / 2.0;
}

/// First-order single-photon loss probability |h_x|^2 + |h_z|^2 at q = omega_c/v0.
inline double quantum_first_order_loss(const PhysicalParams& p) {
    validate(p);
    const double q = p.hbar_omega_c / p.hbar_v0();
    const double hx = reduced_g_ec(q, CavityAxis::x, p) / p.hbar_v0();
    const double hz = reduced_g_ec(q, CavityAxis::z, p) / p.hbar_v0();
    return hx * hx + hz * hz;
}

/// Dipole moment induced in the cavity mode, |mu_c| = (2 pi/3) sqrt(pi R^3 hbar omega eps0), in e*nm.
inline double induced_dipole_moment(const PhysicalParams& p) {
    return 2.0 * units::pi / 3.0 *
           std::sqrt(units::pi * std::pow(p.radius_r, 3) * p.hbar_omega_c / units::e2_over_eps0);
}

inline double induced_dipole_ratio(const PhysicalParams& p) {
    if (p.mu_qe <= 0.0) throw std::invalid_argument("induced_dipole_ratio: mu_qe must be > 0");
    return induced_dipole_moment(p) / p.mu_qe;
}

}  // namespace qeels
