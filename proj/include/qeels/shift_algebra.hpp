#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qeels/wavepacket.hpp"

// Ring of momentum-shift operators. b_q moves electron amplitude from k to
// k - q; the family commutes and b_p b_q = b_{p+q}, so a polynomial in them
// is a list of (amplitude, q) terms.
namespace qeels {

using cplx = std::complex<double>;

struct ShiftTerm {
    cplx amplitude;
    double q;  // 1/nm
};

class ShiftPoly {
public:
    ShiftPoly() = default;
    explicit ShiftPoly(MergeTolerance tol) : tol_(tol) {}
    ShiftPoly(cplx amplitude, double q, MergeTolerance tol = {}) : tol_(tol) {
        terms_.push_back({amplitude, q});
        canonicalize();
    }

    static ShiftPoly one(MergeTolerance tol = {}) { return ShiftPoly(1.0, 0.0, tol); }

    /// Builds from raw terms and canonicalizes.
    static ShiftPoly from_terms(std::vector<ShiftTerm> terms, MergeTolerance tol = {}) {
        ShiftPoly p(tol);
        p.terms_ = std::move(terms);
        p.canonicalize();
        return p;
    }

    const std::vector<ShiftTerm>& terms() const { return terms_; }
    const MergeTolerance& tolerance() const { return tol_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    /// Sum of |amplitude| over terms.
    double amplitude_norm() const {
        double s = 0.0;
        for (const auto& t : terms_) s += std::abs(t.amplitude);
        return s;
    }

    /// Amplitude of the term matching q (zero when absent).
    cplx coefficient(double q) const {
        cplx s = 0.0;
        for (const auto& t : terms_)
            if (tol_.same(t.q, q)) s += t.amplitude;
        return s;
    }

    friend bool operator==(const ShiftPoly& a, const ShiftPoly& b) {
        if (a.terms_.size() != b.terms_.size()) return false;
        for (std::size_t i = 0; i < a.terms_.size(); ++i)
            if (a.terms_[i].q != b.terms_[i].q || a.terms_[i].amplitude != b.terms_[i].amplitude) return false;
        return true;
    }

    ShiftPoly& operator+=(const ShiftPoly& o) {
        terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
        canonicalize();
        return *this;
    }
    ShiftPoly& operator*=(cplx f) {
        for (auto& t : terms_) t.amplitude *= f;
        std::erase_if(terms_, [this](const ShiftTerm& t) { return std::abs(t.amplitude) <= tol_.drop; });
        return *this;
    }

    // Sort by (q, re, im) so that the summation order inside a merged cluster
    // depends only on the multiset of terms, not on how it was produced.
    void canonicalize() {
        std::sort(terms_.begin(), terms_.end(), [](const ShiftTerm& a, const ShiftTerm& b) {
            return std::make_tuple(a.q, a.amplitude.real(), a.amplitude.imag()) <
                   std::make_tuple(b.q, b.amplitude.real(), b.amplitude.imag());
        });
        std::vector<ShiftTerm> out;
        out.reserve(terms_.size());
        double anchor = 0.0;
        for (const auto& t : terms_) {
            if (!out.empty() && tol_.same(anchor, t.q)) {
                out.back().amplitude += t.amplitude;
            } else {
                out.push_back(t);
                anchor = t.q;
            }
        }
        std::erase_if(out, [this](const ShiftTerm& t) { return std::abs(t.amplitude) <= tol_.drop; });
        terms_ = std::move(out);
    }

private:
    std::vector<ShiftTerm> terms_;
    MergeTolerance tol_{};
};

inline ShiftPoly poly_add(const ShiftPoly& a, const ShiftPoly& b) {
    ShiftPoly r = a;
    r += b;
    return r;
}

inline ShiftPoly poly_scale(const ShiftPoly& a, cplx f) {
    ShiftPoly r = a;
    r *= f;
    return r;
}

inline ShiftPoly poly_mul(const ShiftPoly& a, const ShiftPoly& b) {
    std::vector<ShiftTerm> out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a.terms())
        for (const auto& y : b.terms()) out.push_back({x.amplitude * y.amplitude, x.q + y.q});
    return ShiftPoly::from_terms(std::move(out), a.tolerance());
}

/// (alpha, q) -> (conj(alpha), -q).
inline ShiftPoly poly_dagger(const ShiftPoly& a) {
    std::vector<ShiftTerm> out;
    out.reserve(a.size());
    for (const auto& t : a.terms()) out.push_back({std::conj(t.amplitude), -t.q});
    return ShiftPoly::from_terms(std::move(out), a.tolerance());
}

/// Dense square matrix of shift polynomials, row-major.
class ShiftMatrix {
public:
    ShiftMatrix() = default;
    explicit ShiftMatrix(std::size_t n, MergeTolerance tol = {})
        : n_(n), tol_(tol), data_(n * n, ShiftPoly(tol)) {}

    static ShiftMatrix identity(std::size_t n, MergeTolerance tol = {}) {
        ShiftMatrix m(n, tol);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = ShiftPoly::one(tol);
        return m;
    }

    std::size_t dim() const { return n_; }
    const MergeTolerance& tolerance() const { return tol_; }
    ShiftPoly& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    const ShiftPoly& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    ShiftPoly& at(std::size_t i, std::size_t j) {
        check(i, j);
        return (*this)(i, j);
    }
    const ShiftPoly& at(std::size_t i, std::size_t j) const {
        check(i, j);
        return (*this)(i, j);
    }

    friend bool operator==(const ShiftMatrix& a, const ShiftMatrix& b) {
        return a.n_ == b.n_ && a.data_ == b.data_;
    }

private:
    void check(std::size_t i, std::size_t j) const {
        if (i >= n_ || j >= n_) throw std::out_of_range("ShiftMatrix: index out of range");
    }

    std::size_t n_ = 0;
    MergeTolerance tol_{};
    std::vector<ShiftPoly> data_;
};

/// Sum over entries of the entry amplitude norms.
inline double amplitude_norm(const ShiftMatrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) s += m(i, j).amplitude_norm();
    return s;
}

inline ShiftMatrix mat_mul(const ShiftMatrix& a, const ShiftMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("mat_mul: dimension mismatch");
    const std::size_t n = a.dim();
    ShiftMatrix c(n, a.tolerance());
    std::vector<ShiftTerm> buf;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            buf.clear();
            for (std::size_t k = 0; k < n; ++k) {
                const auto& x = a(i, k);
                if (x.empty()) continue;
                const auto& y = b(k, j);
                for (const auto& s : x.terms())
                    for (const auto& t : y.terms()) buf.push_back({s.amplitude * t.amplitude, s.q + t.q});
            }
            if (!buf.empty()) c(i, j) = ShiftPoly::from_terms(buf, a.tolerance());
        }
    }
    return c;
}

inline ShiftMatrix mat_add(const ShiftMatrix& a, const ShiftMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("mat_add: dimension mismatch");
    ShiftMatrix c = a;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j)
            if (!b(i, j).empty()) c(i, j) += b(i, j);
    return c;
}

inline ShiftMatrix mat_scale(const ShiftMatrix& a, cplx f) {
    ShiftMatrix c = a;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j) c(i, j) *= f;
    return c;
}

/// (M^dagger)_ij = dagger(M_ji).
inline ShiftMatrix dagger_transpose(const ShiftMatrix& m) {
    ShiftMatrix c(m.dim(), m.tolerance());
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) c(i, j) = poly_dagger(m(j, i));
    return c;
}

/// Amplitude norm of m - identity.
inline double distance_from_identity(const ShiftMatrix& m) {
    return amplitude_norm(mat_add(m, mat_scale(ShiftMatrix::identity(m.dim(), m.tolerance()), -1.0)));
}

struct ExpOptions {
    double term_tol = 1e-14;
    int max_terms = 200;
    int squarings = 0;  // scale by 2^-s, then square s times
};

struct ExpInfo {
    int terms = 0;
    double last_term_norm = 0.0;
};

/// exp(scale * m) by Taylor series.
inline ShiftMatrix mat_exp(const ShiftMatrix& m, cplx scale, const ExpOptions& opt = {},
                           ExpInfo* info = nullptr) {
    if (opt.squarings < 0) throw std::invalid_argument("mat_exp: squarings must be >= 0");
    const std::size_t n = m.dim();
    const ShiftMatrix x = mat_scale(m, scale * std::ldexp(1.0, -opt.squarings));
    ShiftMatrix sum = ShiftMatrix::identity(n, m.tolerance());
    ShiftMatrix term = sum;
    double residual = 0.0;
    int used = 0;
    bool converged = amplitude_norm(x) == 0.0;
    for (int k = 1; k <= opt.max_terms && !converged; ++k) {
        term = mat_scale(mat_mul(term, x), 1.0 / k);
        sum = mat_add(sum, term);
        residual = amplitude_norm(term);
        used = k;
        if (residual < opt.term_tol) converged = true;
    }
    if (!converged)
        throw std::runtime_error("mat_exp: Taylor series did not converge within " +
                                 std::to_string(opt.max_terms) + " terms (last term norm " +
                                 std::to_string(residual) + ")");
    for (int s = 0; s < opt.squarings; ++s) sum = mat_mul(sum, sum);
    if (info) *info = {used, residual};
    return sum;
}

/// out(k) = sum_terms alpha * w(k + q).
inline Wavepacket apply_poly(const ShiftPoly& p, const Wavepacket& w) {
    Wavepacket out(w.k0(), w.tolerance());
    for (const auto& t : p.terms())
        for (const auto& e : w.entries()) out.add(e.offset - t.q, t.amplitude * e.amplitude);
    out.canonicalize();
    return out;
}

}  // namespace qeels
