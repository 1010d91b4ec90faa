#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <vector>

// Globally adaptive Gauss-Kronrod (7/15) quadrature. Used as the independent
// oracle for the closed-form Bessel-function couplings, so it deliberately
// shares no code with them.
namespace qeels::verify {

template <class T>
struct QuadResult {
    T value{};
    double error = 0.0;
    std::size_t intervals = 0;
    bool converged = false;
};

struct QuadOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-13;
    std::size_t max_intervals = 200000;
};

namespace detail {

inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& x) { return std::abs(x); }

template <class T>
struct Segment {
    double a, b;
    T value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class T, class F>
Segment<T> gk15(const F& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const T fc = f(centre);
    T kronrod = fc * wgk[7];
    T gauss = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        const T sum = f(centre - dx) + f(centre + dx);
        kronrod += sum * wgk[j];
        if (j % 2 == 1) gauss += sum * wg[j / 2];
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, magnitude(kronrod - gauss)};
}

}  // namespace detail

/// Integrates f over [a, b], starting from `pieces` equal sub-intervals.
/// Stops when the summed error estimate is below max(abs_tol, rel_tol*|I|).
template <class T, class F>
QuadResult<T> integrate(const F& f, double a, double b, std::size_t pieces = 1,
                        const QuadOptions& opt = {}) {
    if (!(b > a)) throw std::invalid_argument("integrate: need b > a");
    pieces = std::max<std::size_t>(pieces, 1);
    std::priority_queue<detail::Segment<T>> queue;
    T total{};
    double error = 0.0;
    const double width = (b - a) / static_cast<double>(pieces);
    for (std::size_t i = 0; i < pieces; ++i) {
        const double lo = a + width * static_cast<double>(i);
        const double hi = (i + 1 == pieces) ? b : lo + width;
        auto s = detail::gk15<T>(f, lo, hi);
        total += s.value;
        error += s.error;
        queue.push(s);
    }
    QuadResult<T> out;
    while (true) {
        const double target = std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total));
        if (error <= target) {
            out.converged = true;
            break;
        }
        if (queue.size() >= opt.max_intervals) break;
        auto worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gk15<T>(f, worst.a, mid);
        auto right = detail::gk15<T>(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
    }
    // Re-sum to shed the drift of the incremental updates.
    T resum{};
    double err_sum = 0.0;
    out.intervals = queue.size();
    while (!queue.empty()) {
        resum += queue.top().value;
        err_sum += queue.top().error;
        queue.pop();
    }
    out.value = resum;
    out.error = err_sum;
    return out;
}

}  // namespace qeels::verify
