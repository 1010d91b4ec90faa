#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

#include "qeels/params.hpp"
#include "qeels/units.hpp"
#include "qeels/verify/quadrature.hpp"

// Quadrature oracles for the closed-form couplings. Everything here starts
// from the real-space Green's-function integrands and integrates them
// numerically; nothing calls into qeels::bessel.
namespace qeels::verify {

using cplx = std::complex<double>;

/// e^x K_n(x) from  K_n(x) = \int_0^inf exp(-x cosh t) cosh(n t) dt.
inline double bessel_k_scaled_oracle(int n, double x) {
    if (!(x > 0.0)) throw std::domain_error("bessel_k_scaled_oracle: x must be > 0");
    auto f = [n, x](double t) { return std::exp(-x * (std::cosh(t) - 1.0)) * std::cosh(n * t); };
    // Cut where x (cosh t - 1) - n t exceeds ln(1e16) + margin.
    double t_max = 1.0;
    while (x * (std::cosh(t_max) - 1.0) - n * t_max < 40.0) t_max *= 1.25;
    QuadOptions opt;
    opt.abs_tol = 0.0;
    opt.rel_tol = 1e-14;
    auto r = integrate<double>(f, 0.0, t_max, 16, opt);
    return r.value;
}

inline double bessel_k_oracle(int n, double x) { return std::exp(-x) * bessel_k_scaled_oracle(n, x); }

/// Fourier integral \int_{-Z}^{Z} f(z) e^{i q z} dz, folded onto [0, Z] and
/// cut into pieces of about half an oscillation period.
template <class F>
cplx fourier_line(const F& f, double q, double z_max, const QuadOptions& opt) {
    auto folded = [&](double z) {
        const cplx e = std::polar(1.0, q * z);
        return cplx(f(z)) * e + cplx(f(-z)) * std::conj(e);
    };
    const double periods = std::abs(q) * z_max / units::pi;
    const std::size_t pieces = static_cast<std::size_t>(std::max(64.0, std::ceil(periods)));
    QuadOptions local = opt;
    local.max_intervals = std::max(opt.max_intervals, 2 * pieces + 100000);
    auto r = integrate<cplx>(folded, 0.0, z_max, pieces, local);
    if (!r.converged) throw std::runtime_error("fourier_line: quadrature did not converge");
    return r.value;
}

/// Smallest t with envelope t^p / (1+t^2)^{5/2} below `floor`, for p < 5.
inline double algebraic_cutoff(int p, double floor) {
    double t = 1.0;
    while (std::pow(t, p) / std::pow(1.0 + t * t, 2.5) > floor) t *= 1.1;
    return t;
}

/// I_n(phi) = \int dt t^n e^{i|phi| t} / (1+t^2)^{5/2} by direct quadrature.
inline cplx i_n_oracle(int n, double phi) {
    if (n < 0 || n > 2) throw std::domain_error("i_n_oracle: n must be 0, 1 or 2");
    if (phi == 0.0) throw std::domain_error("i_n_oracle: phi must be nonzero");
    auto f = [n](double t) { return std::pow(t, n) / std::pow(1.0 + t * t, 2.5); };
    QuadOptions opt;
    opt.abs_tol = 1e-15;
    opt.rel_tol = 1e-14;
    return fourier_line(f, std::abs(phi), algebraic_cutoff(n, 1e-16), opt);
}

/// Field-projection integral of the sphere's quasi-static dipole dyadic along
/// the trajectory (b, 0, z): \int dz d_i(x_axis / r^3) e^{iqz}, i = z.
/// axis 0 is the x mode, axis 2 the z mode. Units 1/nm^2.
inline cplx sphere_dyadic_integral(int axis, double q, double b) {
    if (axis != 0 && axis != 2) throw std::domain_error("sphere_dyadic_integral: axis must be 0 or 2");
    auto f = [axis, b](double z) {
        const double x[3] = {b, 0.0, z};
        const double r2 = b * b + z * z;
        const double r5 = std::pow(r2, 2.5);
        // d_i (x_k / r^3) = (r^2 delta_ik - 3 x_i x_k) / r^5 with i = z, k = axis
        return ((axis == 2 ? r2 : 0.0) - 3.0 * x[2] * x[axis]) / r5;
    };
    QuadOptions opt;
    opt.abs_tol = 1e-15 / (b * b);
    opt.rel_tol = 1e-14;
    const int p = (axis == 2) ? 2 : 1;
    return fourier_line(f, q, b * algebraic_cutoff(p, 1e-16), opt);
}

/// |L hbar g^{e-c}| in eV*nm from the sphere dyadic. The mode normalization
/// (e^2/eps0)/(hbar omega) * pi R^3 / 72 turns |J|^2 into (L hbar g)^2.
inline double reduced_g_ec_oracle(double q, int axis, const PhysicalParams& p) {
    if (q == 0.0) return 0.0;
    const cplx j = sphere_dyadic_integral(axis, q, p.b_e_c);
    const double norm = units::e2_over_eps0 / p.hbar_omega_c * units::pi * std::pow(p.radius_r, 3) / 72.0;
    return p.hbar_v0() * std::sqrt(norm) * std::abs(j);
}

/// \int dz e^{iqz} [3 u_x u_z / R^3], R = -(b, 0, z - z_qe): the zx element
/// of the vacuum near-field dyadic (-1 + 3 u u)/R^3. Units 1/nm^2.
inline cplx vacuum_dyadic_integral(double q, double b, double z_qe) {
    auto f = [b](double s) {
        const double rx = -b, rz = -s;
        const double r2 = rx * rx + rz * rz;
        return 3.0 * rx * rz / std::pow(r2, 2.5);
    };
    QuadOptions opt;
    opt.abs_tol = 1e-15 / (b * b);
    opt.rel_tol = 1e-14;
    // Shifting z -> s + z_qe factors out the emitter phase exactly.
    return std::polar(1.0, q * z_qe) * fourier_line(f, q, b * algebraic_cutoff(1, 1e-16), opt);
}

/// L hbar g^{e-QE} including the e^{iqz_qe} phase, in eV*nm.
inline cplx reduced_g_eqe_oracle(double q, const PhysicalParams& p) {
    if (q == 0.0) return 0.0;
    const cplx j = vacuum_dyadic_integral(q, p.b_e_qe, p.z_qe);
    return p.hbar_v0() * p.mu_qe * units::coulomb / p.hbar_omega_qe * j;
}

}  // namespace qeels::verify
