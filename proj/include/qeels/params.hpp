#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "qeels/units.hpp"

namespace qeels {

/// Physical description of the cavity/emitter target and the probing electron.
/// Defaults are the reference configuration: resonant 2 eV dipolar cavity
/// mode of a 10 nm sphere, a 1 e*nm emitter 10 nm from the sphere center,
/// and an aloof 0.02c electron passing 1 nm beyond the emitter.
struct PhysicalParams {
    double hbar_omega_c = 2.0;    // eV
    double hbar_omega_qe = 2.0;   // eV
    double mu_qe = 1.0;           // e*nm
    double radius_r = 10.0;       // nm
    double b_c_qe = 10.0;         // nm, measured from the sphere center
    double b_e_c = 11.0;          // nm
    double b_e_qe = 1.0;          // nm
    double v0_over_c = 0.02;
    double sigma = 0.02;          // eV, phenomenological line width
    double z_qe = 0.0;            // nm, longitudinal emitter position (phase e^{iqz})
    bool collinear = true;        // enforce b_e_c = b_c_qe + b_e_qe

    double hbar_v0() const { return units::hbar_v(v0_over_c); }
    double k0() const { return units::central_wavenumber(v0_over_c); }
    /// Half detuning (omega_c - omega_qe)/2 in eV.
    double half_detuning() const { return 0.5 * (hbar_omega_c - hbar_omega_qe); }
};

inline void require_param(bool ok, const char* name, const std::string& what) {
    if (!ok) throw std::invalid_argument(std::string(name) + ": " + what);
}

/// Throws std::invalid_argument naming the first offending field.
inline void validate(const PhysicalParams& p) {
    auto finite = [](double x) { return std::isfinite(x); };
    require_param(finite(p.hbar_omega_c) && p.hbar_omega_c > 0, "hbar_omega_c", "must be > 0");
    require_param(finite(p.hbar_omega_qe) && p.hbar_omega_qe > 0, "hbar_omega_qe", "must be > 0");
    require_param(finite(p.mu_qe) && p.mu_qe >= 0, "mu_qe", "must be >= 0");
    require_param(finite(p.radius_r) && p.radius_r > 0, "radius_r", "must be > 0");
    require_param(finite(p.b_c_qe) && p.b_c_qe > 0, "b_c_qe", "must be > 0");
    require_param(finite(p.b_e_c) && p.b_e_c > 0, "b_e_c", "must be > 0");
    require_param(finite(p.b_e_qe) && p.b_e_qe > 0, "b_e_qe", "must be > 0");
    require_param(finite(p.v0_over_c) && p.v0_over_c > 0 && p.v0_over_c < 1, "v0_over_c",
                  "must lie in (0, 1)");
    require_param(finite(p.sigma) && p.sigma >= 0, "sigma", "must be >= 0");
    require_param(finite(p.z_qe), "z_qe", "must be finite");
    if (p.collinear) {
        double expected = p.b_c_qe + p.b_e_qe;
        require_param(std::abs(p.b_e_c - expected) <= 1e-9 * expected, "b_e_c",
                      "collinear geometry requires b_e_c = b_c_qe + b_e_qe (set collinear = false "
                      "to override)");
    }
}

/// Moves the electron to a new emitter impact parameter, dragging b_e_c along
/// when the collinear geometry is selected.
inline PhysicalParams with_b_e_qe(PhysicalParams p, double b_e_qe) {
    p.b_e_qe = b_e_qe;
    if (p.collinear) p.b_e_c = p.b_c_qe + b_e_qe;
    return p;
}

inline PhysicalParams with_speed(PhysicalParams p, double v0_over_c) {
    p.v0_over_c = v0_over_c;
    return p;
}

/// Sets omega_qe from the half detuning Delta = (omega_c - omega_qe)/2.
inline PhysicalParams with_half_detuning(PhysicalParams p, double delta) {
    p.hbar_omega_qe = p.hbar_omega_c - 2.0 * delta;
    return p;
}

}  // namespace qeels
