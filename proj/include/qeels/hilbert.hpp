#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qeels/couplings.hpp"
#include "qeels/params.hpp"

// Truncated target Hilbert space: z-mode Fock ladder times the polariton
// ladder of the x mode coupled to the two-level emitter.
namespace qeels {

enum class Branch { ground = 0, minus = 1, plus = 2 };

inline const char* to_string(Branch b) {
    switch (b) {
        case Branch::ground: return "G";
        case Branch::minus: return "-";
        case Branch::plus: return "+";
    }
    return "?";
}

struct BareState {
    int n_z = 0;
    int n_x = 0;
    bool qe_excited = false;
    friend bool operator==(const BareState&, const BareState&) = default;
    friend auto operator<=>(const BareState&, const BareState&) = default;
};

struct PolaritonState {
    int n_z = 0;
    int manifold_n = 0;
    Branch branch = Branch::ground;
    friend bool operator==(const PolaritonState&, const PolaritonState&) = default;
};

/// "G", "1z", "1+", "2-", "1z1+", ...
inline std::string label(const PolaritonState& s) {
    std::string out;
    if (s.n_z > 0) out += std::to_string(s.n_z) + "z";
    if (s.manifold_n > 0) out += std::to_string(s.manifold_n) + to_string(s.branch);
    return out.empty() ? "G" : out;
}

struct Caps {
    int n_z_max = 2;
    int manifold_max = 4;
    // Drops every (n_z, N) block whose lower branch lies above this energy.
    std::optional<double> energy_max;
    std::size_t hard_limit = 512;
};

inline Caps make_caps(int n_z_max, int manifold_max) {
    Caps c;
    c.n_z_max = n_z_max;
    c.manifold_max = manifold_max;
    return c;
}

/// Eigen-decomposition of the N-th manifold block over {|N>_x|g>, |N-1>_x|e>}.
/// plus = (cos t, sin t), minus = (sin t, -cos t).
struct PolaritonSplit {
    double e_plus = 0.0;
    double e_minus = 0.0;
    double cos_t = 1.0;
    double sin_t = 0.0;
};

inline PolaritonSplit polariton_energies(int n, const PhysicalParams& p, double g) {
    if (n < 1) throw std::invalid_argument("polariton_energies: manifold index must be >= 1");
    const double sn = std::sqrt(static_cast<double>(n));
    const double mean = n * p.hbar_omega_c + 0.5 * (p.hbar_omega_qe - p.hbar_omega_c);
    const double delta = p.half_detuning();
    const double off = sn * g;
    PolaritonSplit out;
    if (delta == 0.0) {
        out.e_plus = n * p.hbar_omega_c + off;
        out.e_minus = n * p.hbar_omega_c - off;
    } else {
        const double split = std::hypot(delta, off);
        out.e_plus = mean + split;
        out.e_minus = mean - split;
    }
    const double theta = (off == 0.0 && delta == 0.0) ? 0.25 * units::pi : 0.5 * std::atan2(off, delta);
    out.cos_t = std::cos(theta);
    out.sin_t = std::sin(theta);
    return out;
}

/// Immutable truncated eigenbasis of the free target Hamiltonian.
class TargetSpace {
public:
    using Matrix = Eigen::MatrixXd;

    const PhysicalParams& params() const { return params_; }
    const Caps& caps() const { return caps_; }
    double g_c_qe() const { return g_; }
    std::size_t dim() const { return states_.size(); }
    const std::vector<PolaritonState>& states() const { return states_; }
    const PolaritonState& state(std::size_t i) const { return states_.at(i); }
    const std::vector<double>& energies() const { return energies_; }
    double energy(std::size_t i) const { return energies_.at(i); }
    const std::vector<BareState>& bare_states() const { return bare_; }

    /// Columns are polariton states written in the bare basis.
    const Matrix& transform() const { return u_; }
    /// Ladder operators in the polariton basis.
    const Matrix& a_x() const { return a_x_; }
    const Matrix& a_z() const { return a_z_; }
    const Matrix& sigma() const { return sigma_; }

    std::optional<std::size_t> find(const PolaritonState& s) const {
        for (std::size_t i = 0; i < states_.size(); ++i)
            if (states_[i] == s) return i;
        return std::nullopt;
    }
    std::size_t index(const PolaritonState& s) const {
        auto i = find(s);
        if (!i) throw std::out_of_range("TargetSpace: state " + label(s) + " outside caps");
        return *i;
    }
    std::size_t index(int n_z, int manifold, Branch b) const { return index({n_z, manifold, b}); }
    std::optional<std::size_t> find_bare(const BareState& s) const {
        auto it = bare_index_.find(s);
        if (it == bare_index_.end()) return std::nullopt;
        return it->second;
    }

    /// True when the state sits on the outer shell of the truncation, i.e.
    /// one more excitation of either ladder leaves the space.
    bool on_edge(std::size_t i) const {
        const auto& s = states_.at(i);
        if (s.n_z >= caps_.n_z_max || s.manifold_n >= caps_.manifold_max) return true;
        return !find({s.n_z + 1, s.manifold_n, s.branch}) ||
               !find({s.n_z, s.manifold_n + 1, s.manifold_n == 0 ? Branch::plus : s.branch});
    }

private:
    friend TargetSpace build_space(const PhysicalParams&, const Caps&);

    PhysicalParams params_;
    Caps caps_;
    double g_ = 0.0;
    std::vector<PolaritonState> states_;
    std::vector<double> energies_;
    std::vector<BareState> bare_;
    std::map<BareState, std::size_t> bare_index_;
    Matrix u_, a_x_, a_z_, sigma_;
};

inline TargetSpace build_space(const PhysicalParams& p, const Caps& caps) {
    validate(p);
    if (caps.manifold_max < 1) throw std::invalid_argument("caps: manifold_max must be >= 1");
    if (caps.n_z_max < 0) throw std::invalid_argument("caps: n_z_max must be >= 0");
    const std::size_t expected = static_cast<std::size_t>(caps.n_z_max + 1) *
                                 static_cast<std::size_t>(1 + 2 * caps.manifold_max);
    if (expected > caps.hard_limit)
        throw std::invalid_argument("caps: dimension " + std::to_string(expected) +
                                    " exceeds hard limit " + std::to_string(caps.hard_limit));

    TargetSpace s;
    s.params_ = p;
    s.caps_ = caps;
    s.g_ = coupling_g_c_qe(p);

    std::vector<PolaritonSplit> splits(caps.manifold_max + 1);
    for (int n = 1; n <= caps.manifold_max; ++n) splits[n] = polariton_energies(n, p, s.g_);

    struct Entry {
        PolaritonState st;
        double e;
    };
    std::vector<Entry> entries;
    for (int nz = 0; nz <= caps.n_z_max; ++nz) {
        const double ez = nz * p.hbar_omega_c;
        if (!caps.energy_max || ez <= *caps.energy_max) entries.push_back({{nz, 0, Branch::ground}, ez});
        for (int n = 1; n <= caps.manifold_max; ++n) {
            if (caps.energy_max && ez + splits[n].e_minus > *caps.energy_max) continue;
            entries.push_back({{nz, n, Branch::minus}, ez + splits[n].e_minus});
            entries.push_back({{nz, n, Branch::plus}, ez + splits[n].e_plus});
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        auto key = [](const Entry& x) {
            return std::make_tuple(x.st.n_z + x.st.manifold_n, x.e, static_cast<int>(x.st.branch), x.st.n_z);
        };
        return key(a) < key(b);
    });
    for (const auto& e : entries) {
        s.states_.push_back(e.st);
        s.energies_.push_back(e.e);
    }
    const std::size_t d = s.states_.size();

    // Bare basis in the same block order: ground -> |0 g>, minus -> |N-1 e>, plus -> |N g>.
    for (const auto& st : s.states_) {
        BareState b{st.n_z, st.manifold_n, false};
        if (st.branch == Branch::minus) b = {st.n_z, st.manifold_n - 1, true};
        s.bare_index_[b] = s.bare_.size();
        s.bare_.push_back(b);
    }

    s.u_ = TargetSpace::Matrix::Zero(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        const auto& st = s.states_[j];
        if (st.branch == Branch::ground) {
            s.u_(s.bare_index_.at({st.n_z, 0, false}), j) = 1.0;
            continue;
        }
        const auto& sp = splits[st.manifold_n];
        const std::size_t ig = s.bare_index_.at({st.n_z, st.manifold_n, false});
        const std::size_t ie = s.bare_index_.at({st.n_z, st.manifold_n - 1, true});
        if (st.branch == Branch::plus) {
            s.u_(ig, j) = sp.cos_t;
            s.u_(ie, j) = sp.sin_t;
        } else {
            s.u_(ig, j) = sp.sin_t;
            s.u_(ie, j) = -sp.cos_t;
        }
    }

    TargetSpace::Matrix ax = TargetSpace::Matrix::Zero(d, d);
    TargetSpace::Matrix az = ax, sm = ax;
    for (std::size_t j = 0; j < d; ++j) {
        const auto& b = s.bare_[j];
        if (b.n_x > 0)
            if (auto i = s.find_bare({b.n_z, b.n_x - 1, b.qe_excited})) ax(*i, j) = std::sqrt(double(b.n_x));
        if (b.n_z > 0)
            if (auto i = s.find_bare({b.n_z - 1, b.n_x, b.qe_excited})) az(*i, j) = std::sqrt(double(b.n_z));
        if (b.qe_excited)
            if (auto i = s.find_bare({b.n_z, b.n_x, false})) sm(*i, j) = 1.0;
    }
    s.a_x_ = s.u_.transpose() * ax * s.u_;
    s.a_z_ = s.u_.transpose() * az * s.u_;
    s.sigma_ = s.u_.transpose() * sm * s.u_;
    return s;
}

inline TargetSpace build_space(const PhysicalParams& p) { return build_space(p, Caps{}); }

/// Bare-basis amplitudes (ordered as space.bare_states()) -> polariton amplitudes.
inline Eigen::VectorXcd bare_to_polariton(const TargetSpace& space, const Eigen::VectorXcd& bare) {
    if (static_cast<std::size_t>(bare.size()) != space.dim())
        throw std::invalid_argument("bare_to_polariton: vector dimension does not match the space");
    return space.transform().transpose().cast<std::complex<double>>() * bare;
}

/// Sparse bare-state amplitudes -> polariton amplitudes. Throws for any
/// bare component that lies outside the truncation.
inline Eigen::VectorXcd bare_to_polariton(
    const TargetSpace& space, const std::vector<std::pair<BareState, std::complex<double>>>& bare) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(space.dim());
    for (const auto& [b, amp] : bare) {
        auto i = space.find_bare(b);
        if (!i)
            throw std::out_of_range("bare_to_polariton: bare state (n_z=" + std::to_string(b.n_z) +
                                    ", n_x=" + std::to_string(b.n_x) + ", qe=" +
                                    (b.qe_excited ? "e" : "g") + ") outside caps");
        v(*i) += amp;
    }
    return bare_to_polariton(space, v);
}

}  // namespace qeels
