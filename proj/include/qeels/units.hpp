#pragma once

#include <numbers>

// Fixed unit system: energies in eV, lengths in nm, times in fs.
// Charges enter only through e^2/(4 pi eps0), dipoles are given in e*nm.
namespace qeels::units {

inline constexpr double pi = std::numbers::pi;

inline constexpr double hbar_eV_fs = 0.6582119569;
inline constexpr double c_nm_per_fs = 299.792458;
inline constexpr double hbar_c = hbar_eV_fs * c_nm_per_fs;   // eV*nm
inline constexpr double coulomb = 1.43996454;                // e^2/(4 pi eps0), eV*nm
inline constexpr double e2_over_eps0 = 4.0 * pi * coulomb;   // e^2/eps0, eV*nm
inline constexpr double electron_rest_energy = 510998.95;    // m_e c^2, eV

/// hbar^2 / (2 m_e) in eV*nm^2.
inline constexpr double hbar2_over_2me = hbar_c * hbar_c / (2.0 * electron_rest_energy);

/// hbar*v in eV*nm for a speed given in units of c.
constexpr double hbar_v(double v_over_c) { return hbar_c * v_over_c; }

/// Nonrelativistic central wave number k0 = m_e v0 / hbar in 1/nm.
constexpr double central_wavenumber(double v_over_c) {
    return electron_rest_energy * v_over_c / hbar_c;
}

/// Free-electron kinetic energy (hbar k)^2 / 2m_e in eV.
constexpr double kinetic_energy(double k) { return hbar2_over_2me * k * k; }

}  // namespace qeels::units
