#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

// Modified Bessel functions of the second kind for integer orders 0..2.
//
// Below x = 2 the ascending series are summed directly; above, K0 and K1 come
// from Steed's evaluation of the second continued fraction (Temme's CF2), which
// converges in O(1/x) iterations and is accurate to a few ulps. The exponential
// factor is kept separate so the scaled forms e^x K_n(x) stay finite for all x.
namespace qeels::bessel {

namespace detail {

inline constexpr double series_switch = 2.0;
inline constexpr double euler_gamma = std::numbers::egamma;

// Returns {K0(x), K1(x)} for 0 < x <= 2.
inline std::pair<double, double> k01_series(double x) {
    const double t = 0.25 * x * x;
    const double log_half = std::log(0.5 * x);

    // K0 = -(ln(x/2) + gamma) I0 + sum_k H_k t^k / (k!)^2
    double term = 1.0;  // t^k / (k!)^2
    double i0 = 1.0;
    double harmonic = 0.0;
    double s0 = 0.0;
    // K1 = 1/x + ln(x/2) I1 - (x/4) sum_k [psi(k+1) + psi(k+2)] t^k / (k!(k+1)!)
    double term1 = 1.0;  // t^k / (k! (k+1)!)
    double i1_sum = 1.0;
    double psi_k1 = -euler_gamma;        // psi(k+1)
    double psi_k2 = 1.0 - euler_gamma;   // psi(k+2)
    double s1 = psi_k1 + psi_k2;
    for (int k = 1; k < 60; ++k) {
        const double dk = k;
        term *= t / (dk * dk);
        harmonic += 1.0 / dk;
        i0 += term;
        s0 += term * harmonic;

        term1 *= t / (dk * (dk + 1.0));
        psi_k1 += 1.0 / dk;
        psi_k2 += 1.0 / (dk + 1.0);
        i1_sum += term1;
        s1 += term1 * (psi_k1 + psi_k2);
        if (term < 1e-18 * i0 && term1 < 1e-18 * i1_sum) break;
    }
    const double k0 = -(log_half + euler_gamma) * i0 + s0;
    const double i1 = 0.5 * x * i1_sum;
    const double k1 = 1.0 / x + log_half * i1 - 0.25 * x * s1;
    return {k0, k1};
}

// Returns {e^x K0(x), e^x K1(x)} for x > 2 (Steed's CF2 with order mu = 0).
inline std::pair<double, double> k01_scaled_cf2(double x) {
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 1; i < 10000; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < 1e-17) break;
    }
    h *= a1;
    const double k0s = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    const double k1s = k0s * (x + 0.5 - h) / x;
    return {k0s, k1s};
}

inline void check_argument(double x) {
    if (!(x > 0.0)) throw std::domain_error("bessel_k: argument must be > 0");
}

}  // namespace detail

/// {K0(x), K1(x)}.
inline std::pair<double, double> k01(double x) {
    detail::check_argument(x);
    if (x <= detail::series_switch) return detail::k01_series(x);
    auto [k0s, k1s] = detail::k01_scaled_cf2(x);
    const double e = std::exp(-x);
    return {k0s * e, k1s * e};
}

/// {e^x K0(x), e^x K1(x)}.
inline std::pair<double, double> k01_scaled(double x) {
    detail::check_argument(x);
    if (x <= detail::series_switch) {
        auto [k0, k1] = detail::k01_series(x);
        const double e = std::exp(x);
        return {k0 * e, k1 * e};
    }
    return detail::k01_scaled_cf2(x);
}

inline double k0(double x) { return k01(x).first; }
inline double k1(double x) { return k01(x).second; }

/// K2 from the upward recurrence K2 = K0 + (2/x) K1.
inline double k2(double x) {
    auto [a, b] = k01(x);
    return a + 2.0 * b / x;
}

/// K_n(x) for n in {0, 1, 2}.
inline double bessel_k(int n, double x) {
    switch (n) {
        case 0: return k0(x);
        case 1: return k1(x);
        case 2: return k2(x);
        default: throw std::domain_error("bessel_k: order must be 0, 1 or 2");
    }
}

}  // namespace qeels::bessel
