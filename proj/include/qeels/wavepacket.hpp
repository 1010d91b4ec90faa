#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qeels {

/// Tolerance used to identify two momenta (or two shift labels) as equal.
struct MergeTolerance {
    double abs = 1e-12;   // 1/nm
    double rel = 1e-9;
    double drop = 1e-16;  // amplitudes at or below this are discarded

    bool same(double a, double b) const {
        return std::abs(a - b) <= std::max(abs, rel * std::max(std::abs(a), std::abs(b)));
    }

    static MergeTolerance exact() { return {0.0, 0.0, 0.0}; }
};

/// Electron state on a sparse set of momenta. Momenta are stored as offsets
/// from the central wave number k0 so that shifts of order 1/nm are kept
/// exactly even when k0 is large.
class Wavepacket {
public:
    using cplx = std::complex<double>;
    struct Entry {
        double offset;  // k - k0, 1/nm
        cplx amplitude;
    };

    Wavepacket() = default;
    explicit Wavepacket(double k0, MergeTolerance tol = {}) : k0_(k0), tol_(tol) {}

    double k0() const { return k0_; }
    const MergeTolerance& tolerance() const { return tol_; }
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    void add(double offset, cplx amplitude) {
        if (!std::isfinite(offset)) throw std::invalid_argument("Wavepacket: momentum must be finite");
        entries_.push_back({offset, amplitude});
        canonical_ = false;
    }

    /// Sorts by momentum, merges entries within tolerance of a cluster's first
    /// momentum and drops negligible amplitudes.
    Wavepacket& canonicalize() {
        if (canonical_) return *this;
        std::stable_sort(entries_.begin(), entries_.end(),
                         [](const Entry& a, const Entry& b) { return a.offset < b.offset; });
        std::vector<Entry> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) {
            if (!out.empty() && tol_.same(out.back().offset, e.offset))
                out.back().amplitude += e.amplitude;
            else
                out.push_back(e);
        }
        std::erase_if(out, [this](const Entry& e) { return std::abs(e.amplitude) <= tol_.drop; });
        entries_ = std::move(out);
        canonical_ = true;
        return *this;
    }

    Wavepacket canonical() const {
        Wavepacket w = *this;
        w.canonicalize();
        return w;
    }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& e : entries_) s += std::norm(e.amplitude);
        return s;
    }

    Wavepacket& normalize() {
        const double n = std::sqrt(norm_squared());
        if (n == 0.0) throw std::domain_error("Wavepacket: cannot normalize an empty state");
        for (auto& e : entries_) e.amplitude /= n;
        return *this;
    }

    Wavepacket& scale(cplx f) {
        for (auto& e : entries_) e.amplitude *= f;
        return *this;
    }

    /// Appends every entry of `other` times f (same k0 assumed).
    Wavepacket& accumulate(const Wavepacket& other, cplx f = 1.0) {
        for (const auto& e : other.entries_) entries_.push_back({e.offset, f * e.amplitude});
        canonical_ = false;
        return *this;
    }

    /// Amplitude at offset, tolerance-matched; zero when absent.
    cplx at_offset(double offset) const {
        for (const auto& e : entries_)
            if (tol_.same(e.offset, offset)) return e.amplitude;
        return 0.0;
    }

private:
    double k0_ = 0.0;
    MergeTolerance tol_{};
    std::vector<Entry> entries_;
    bool canonical_ = true;
};

/// <a|b> = sum_k conj(a(k)) b(k), momenta tolerance-matched. Inputs need
/// not be canonical.
inline std::complex<double> inner(const Wavepacket& a, const Wavepacket& b) {
    const Wavepacket ca = a.canonical();
    const Wavepacket cb = b.canonical();
    const auto& ea = ca.entries();
    const auto& eb = cb.entries();
    const MergeTolerance& tol = a.tolerance();
    std::complex<double> s = 0.0;
    std::size_t j = 0;
    for (const auto& x : ea) {
        while (j < eb.size() && eb[j].offset < x.offset && !tol.same(eb[j].offset, x.offset)) ++j;
        for (std::size_t m = j; m < eb.size() && tol.same(eb[m].offset, x.offset); ++m)
            s += std::conj(x.amplitude) * eb[m].amplitude;
    }
    return s;
}

}  // namespace qeels
