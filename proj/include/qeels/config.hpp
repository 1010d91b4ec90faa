#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qeels/hilbert.hpp"
#include "qeels/observables.hpp"
#include "qeels/params.hpp"

// Line-oriented experiment configuration:
//
//   # comment
//   [section]
//   key = value            ; scalar, list "a, b, c", linspace(a, b, n),
//                          ; logspace(a, b, n) or pi expressions (-pi/2)
namespace qeels {

enum class Experiment { fig2, fig3, fig4, fig5, fig6, custom, validate };

inline const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::fig2: return "fig2";
        case Experiment::fig3: return "fig3";
        case Experiment::fig4: return "fig4";
        case Experiment::fig5: return "fig5";
        case Experiment::fig6: return "fig6";
        case Experiment::custom: return "custom";
        case Experiment::validate: return "validate";
    }
    return "?";
}

inline std::optional<Experiment> experiment_from(const std::string& s) {
    for (auto e : {Experiment::fig2, Experiment::fig3, Experiment::fig4, Experiment::fig5, Experiment::fig6,
                   Experiment::custom, Experiment::validate})
        if (s == to_string(e)) return e;
    return std::nullopt;
}

/// Which first-manifold transition a comb period is tuned to.
enum class QmodTarget { none, upper, lower, z };

inline const char* to_string(QmodTarget t) {
    switch (t) {
        case QmodTarget::none: return "none";
        case QmodTarget::upper: return "upper";
        case QmodTarget::lower: return "lower";
        case QmodTarget::z: return "z";
    }
    return "?";
}

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RawValue {
    std::string text;
    int line = 0;
};

/// Syntactically checked key/value pairs, keyed by "section.key".
using RawConfig = std::map<std::string, RawValue>;

namespace config_detail {

inline const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"experiment", {"kind", "suite"}},
        {"target", {"hbar_omega_c", "hbar_omega_qe", "half_detuning", "mu_qe", "radius_r", "b_c_qe", "z_qe",
                    "collinear"}},
        {"probe", {"v0_over_c", "b_e_c", "b_e_qe", "ec_x", "ec_z", "e_qe"}},
        {"beam", {"kind", "q_mod_target", "q_mod", "n_comb", "xi"}},
        {"state", {"kind", "f", "theta"}},
        {"spectrum", {"sigma", "omega_min", "omega_max", "omega_points", "normalization"}},
        {"grid", {"delta", "k_min", "k_max", "k_points"}},
        {"caps", {"n_z_max", "manifold_max", "energy_max", "hard_limit"}},
        {"output", {"format", "threads", "seed"}},
    };
    return s;
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::string where(const std::string& key, int line) {
    return line > 0 ? key + " (line " + std::to_string(line) + ")" : key;
}

/// Splits on commas that are not inside parentheses.
inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char ch : s) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

/// "2", "-0.5e-3", "pi", "-pi/2", "3*pi/4".
inline double parse_number(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError(key + ": empty value");
    std::size_t pos = 0;
    double sign = 1.0;
    if (s[pos] == '+' || s[pos] == '-') {
        if (s[pos] == '-') sign = -1.0;
        ++pos;
    }
    double value = 1.0;
    char op = '*';
    bool have = false;
    while (pos < s.size()) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        double factor = 0.0;
        if (s.compare(pos, 2, "pi") == 0) {
            factor = units::pi;
            pos += 2;
        } else {
            const char* begin = s.c_str() + pos;
            char* end = nullptr;
            factor = std::strtod(begin, &end);
            if (end == begin) throw ConfigError(key + ": cannot parse number '" + s + "'");
            pos += static_cast<std::size_t>(end - begin);
        }
        value = op == '*' ? value * factor : value / factor;
        have = true;
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == s.size()) break;
        op = s[pos];
        if (op != '*' && op != '/') throw ConfigError(key + ": cannot parse number '" + s + "'");
        ++pos;
    }
    if (!have || !std::isfinite(value)) throw ConfigError(key + ": cannot parse number '" + s + "'");
    return sign * value;
}

inline int parse_int(const std::string& raw, const std::string& key) {
    const double v = parse_number(raw, key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": expected an integer");
    return static_cast<int>(v);
}

inline bool parse_bool(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw ConfigError(key + ": expected true or false");
}

inline std::vector<double> parse_list(const std::string& raw, const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(raw)) {
        const bool lin = item.rfind("linspace(", 0) == 0;
        const bool log = item.rfind("logspace(", 0) == 0;
        if (lin || log) {
            if (item.back() != ')') throw ConfigError(key + ": unterminated " + item.substr(0, 8));
            const auto args = split_list(item.substr(9, item.size() - 10));
            if (args.size() != 3) throw ConfigError(key + ": " + item.substr(0, 8) + " takes (a, b, n)");
            const double a = parse_number(args[0], key), b = parse_number(args[1], key);
            const int n = parse_int(args[2], key);
            if (n < 1) throw ConfigError(key + ": point count must be >= 1");
            if (log && (a <= 0 || b <= 0)) throw ConfigError(key + ": logspace bounds must be > 0");
            for (int i = 0; i < n; ++i) {
                const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
                out.push_back(lin ? a + (b - a) * t : std::exp(std::log(a) + (std::log(b) - std::log(a)) * t));
            }
        } else {
            out.push_back(parse_number(item, key));
        }
    }
    return out;
}

/// Shortest text that reads back to the same double.
inline std::string fmt(double x) {
    char buf[64];
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

/// Uniform lists longer than four entries echo as linspace(a, b, n).
inline std::string fmt(const std::vector<double>& v) {
    if (v.size() > 4) {
        const double step = (v.back() - v.front()) / double(v.size() - 1);
        bool uniform = step != 0.0;
        for (std::size_t i = 0; i < v.size() && uniform; ++i)
            uniform = std::abs(v[i] - (v.front() + step * double(i))) <= 1e-12 * std::max(1.0, std::abs(v[i]));
        if (uniform) return "linspace(" + fmt(v.front()) + ", " + fmt(v.back()) + ", " + std::to_string(v.size()) + ")";
    }
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

}  // namespace config_detail

inline RawConfig parse_raw_config(const std::string& text) {
    using namespace config_detail;
    RawConfig out;
    std::istringstream in(text);
    std::string line, section;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(n) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().count(section))
                throw ConfigError("line " + std::to_string(n) + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected key = value");
        if (section.empty()) throw ConfigError("line " + std::to_string(n) + ": key outside any [section]");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(n) + ": missing key");
        if (value.empty()) throw ConfigError("line " + std::to_string(n) + ": missing value for " + key);
        if (!schema().at(section).count(key))
            throw ConfigError("line " + std::to_string(n) + ": unknown key '" + key + "' in [" + section + "]");
        const std::string full = section + "." + key;
        if (out.count(full))
            throw ConfigError("line " + std::to_string(n) + ": duplicate key " + full + " (first on line " +
                              std::to_string(out.at(full).line) + ")");
        out[full] = {value, n};
    }
    return out;
}

/// Fully resolved run description. Sweep lists are never empty.
struct ExperimentConfig {
    Experiment kind = Experiment::custom;
    std::string suite = "all";

    PhysicalParams params;  // base point; v0 and b_e_qe are overridden by the sweep lists
    bool b_e_c_given = false;
    bool ec_x = true, ec_z = true, e_qe = true;

    std::vector<double> v0_over_c;
    std::vector<double> b_e_qe;
    std::vector<double> delta;  // half detuning, eV
    std::vector<double> theta;
    std::vector<double> f;
    std::vector<double> xi;
    std::vector<QmodTarget> q_mod_target;
    std::optional<double> q_mod;  // explicit comb period, 1/nm
    int n_comb = 100;
    std::string beam = "monochromatic";
    std::string state = "pinem";

    double omega_min = 1.8, omega_max = 2.2;
    int omega_points = 401;
    Normalization normalization = Normalization::raw;
    double k_min = -2.5, k_max = 2.5;  // units of omega_c / v0
    int k_points = 1001;

    Caps caps;
    std::string format = "csv";
    int threads = 0;  // 0: hardware concurrency
    unsigned long seed = 20240601;

    /// Target/probe parameters at one sweep point.
    PhysicalParams point(double v0, double b) const {
        PhysicalParams p = params;
        p.v0_over_c = v0;
        p.b_e_qe = b;
        if (!b_e_c_given && p.collinear) p.b_e_c = p.b_c_qe + b;
        return p;
    }

    ProbeConfig probe(const PhysicalParams& p) const {
        ProbeConfig c = ProbeConfig::from(p);
        c.ec_x = ec_x;
        c.ec_z = ec_z;
        c.e_qe = e_qe;
        return c;
    }

    /// Resolved values as ordered (key, text) pairs for headers and manifests.
    std::vector<std::pair<std::string, std::string>> echo() const {
        using config_detail::fmt;
        std::vector<std::pair<std::string, std::string>> e{
            {"experiment.kind", to_string(kind)},
            {"target.hbar_omega_c", fmt(params.hbar_omega_c)},
            {"target.hbar_omega_qe", fmt(params.hbar_omega_qe)},
            {"target.mu_qe", fmt(params.mu_qe)},
            {"target.radius_r", fmt(params.radius_r)},
            {"target.b_c_qe", fmt(params.b_c_qe)},
            {"target.z_qe", fmt(params.z_qe)},
            {"target.collinear", params.collinear ? "true" : "false"},
            {"probe.v0_over_c", fmt(v0_over_c)},
            {"probe.b_e_c", b_e_c_given ? fmt(params.b_e_c) : std::string("b_c_qe + b_e_qe")},
            {"probe.b_e_qe", fmt(b_e_qe)},
            {"probe.ec_x", ec_x ? "true" : "false"},
            {"probe.ec_z", ec_z ? "true" : "false"},
            {"probe.e_qe", e_qe ? "true" : "false"},
            {"beam.kind", beam},
        };
        std::string targets;
        for (std::size_t i = 0; i < q_mod_target.size(); ++i) targets += (i ? ", " : "") + std::string(to_string(q_mod_target[i]));
        e.push_back({"beam.q_mod_target", targets});
        if (q_mod) e.push_back({"beam.q_mod", fmt(*q_mod)});
        e.push_back({"beam.n_comb", std::to_string(n_comb)});
        e.push_back({"beam.xi", fmt(xi)});
        e.push_back({"state.kind", state});
        e.push_back({"state.f", fmt(f)});
        e.push_back({"state.theta", fmt(theta)});
        e.push_back({"spectrum.sigma", fmt(params.sigma)});
        e.push_back({"spectrum.omega_min", fmt(omega_min)});
        e.push_back({"spectrum.omega_max", fmt(omega_max)});
        e.push_back({"spectrum.omega_points", std::to_string(omega_points)});
        e.push_back({"spectrum.normalization", to_string(normalization)});
        e.push_back({"grid.delta", fmt(delta)});
        e.push_back({"grid.k_min", fmt(k_min)});
        e.push_back({"grid.k_max", fmt(k_max)});
        e.push_back({"grid.k_points", std::to_string(k_points)});
        e.push_back({"caps.n_z_max", std::to_string(caps.n_z_max)});
        e.push_back({"caps.manifold_max", std::to_string(caps.manifold_max)});
        e.push_back({"caps.energy_max", caps.energy_max ? fmt(*caps.energy_max) : std::string("none")});
        e.push_back({"caps.hard_limit", std::to_string(caps.hard_limit)});
        e.push_back({"output.format", format});
        e.push_back({"output.seed", std::to_string(seed)});
        if (kind == Experiment::validate) e.push_back({"experiment.suite", suite});
        return e;
    }
};

/// Overrides applied after the file (command-line flags).
struct ConfigOverrides {
    std::optional<Experiment> kind;
    std::optional<std::string> suite;
    std::optional<int> n_z_max, manifold_max;
    std::optional<Normalization> normalization;
    std::optional<int> threads;
};

namespace config_detail {

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return v;
}

/// Per-experiment sweep defaults, applied before the file's values.
inline void apply_defaults(ExperimentConfig& c) {
    const double hp = units::pi / 2;
    c.v0_over_c = {0.02};
    c.b_e_qe = {1.0};
    c.delta = {0.0};
    c.theta = {0.0};
    c.f = {0.0};
    c.xi = {0.0};
    c.q_mod_target = {QmodTarget::none};
    switch (c.kind) {
        case Experiment::fig2:
            c.v0_over_c = linspace(0.02, 0.2, 40);
            c.b_e_qe = linspace(1.0, 5.0, 40);
            break;
        case Experiment::fig3:
            c.v0_over_c = linspace(0.01, 0.2, 39);
            break;
        case Experiment::fig4:
            c.delta = linspace(-0.3, 0.3, 61);
            c.f = {0.0, 0.1, 0.5};
            break;
        case Experiment::fig5:
            c.v0_over_c = {0.02, 0.08, 0.2};
            c.theta = {hp, -hp};
            c.q_mod_target = {QmodTarget::upper, QmodTarget::lower};
            c.state = "superposition";
            c.beam = "comb";
            break;
        case Experiment::fig6:
            c.v0_over_c = linspace(0.02, 0.2, 40);
            c.b_e_qe = linspace(1.0, 5.0, 40);
            c.theta = {-hp, hp};
            c.q_mod_target = {QmodTarget::none, QmodTarget::upper, QmodTarget::lower};
            c.state = "superposition";
            c.beam = "comb";
            break;
        case Experiment::custom:
        case Experiment::validate:
            break;
    }
}

}  // namespace config_detail

inline ExperimentConfig resolve_config(const RawConfig& raw, const ConfigOverrides& ov = {}) {
    using namespace config_detail;
    auto get = [&](const std::string& k) -> const RawValue* {
        auto it = raw.find(k);
        return it == raw.end() ? nullptr : &it->second;
    };
    auto name = [&](const std::string& k) {
        const auto* v = get(k);
        return where(k.substr(k.find('.') + 1), v ? v->line : 0);
    };
    auto num = [&](const std::string& k, auto& dst) {
        if (const auto* v = get(k)) dst = parse_number(v->text, name(k));
    };
    auto integer = [&](const std::string& k, auto& dst) {
        if (const auto* v = get(k)) dst = parse_int(v->text, name(k));
    };
    auto flag = [&](const std::string& k, bool& dst) {
        if (const auto* v = get(k)) dst = parse_bool(v->text, name(k));
    };
    auto list = [&](const std::string& k, std::vector<double>& dst) {
        if (const auto* v = get(k)) dst = parse_list(v->text, name(k));
    };
    auto word = [&](const std::string& k, std::string& dst, std::initializer_list<const char*> allowed) {
        const auto* v = get(k);
        if (!v) return;
        for (const char* a : allowed)
            if (v->text == a) {
                dst = v->text;
                return;
            }
        std::string opts;
        for (const char* a : allowed) opts += (opts.empty() ? "" : "|") + std::string(a);
        throw ConfigError(name(k) + ": expected one of " + opts + ", got '" + v->text + "'");
    };

    ExperimentConfig c;
    if (const auto* v = get("experiment.kind")) {
        auto k = experiment_from(v->text);
        if (!k) throw ConfigError(name("experiment.kind") + ": unknown experiment '" + v->text + "'");
        c.kind = *k;
    }
    if (ov.kind) c.kind = *ov.kind;
    apply_defaults(c);

    word("experiment.suite", c.suite, {"all", "couplings", "joint", "unitarity", "two_state"});
    if (ov.suite) c.suite = *ov.suite;

    auto& p = c.params;
    num("target.hbar_omega_c", p.hbar_omega_c);
    num("target.hbar_omega_qe", p.hbar_omega_qe);
    if (get("target.half_detuning")) {
        if (get("target.hbar_omega_qe"))
            throw ConfigError(name("target.half_detuning") + ": give either hbar_omega_qe or half_detuning");
        double d = 0.0;
        num("target.half_detuning", d);
        p = with_half_detuning(p, d);
    }
    num("target.mu_qe", p.mu_qe);
    num("target.radius_r", p.radius_r);
    num("target.b_c_qe", p.b_c_qe);
    num("target.z_qe", p.z_qe);
    flag("target.collinear", p.collinear);

    list("probe.v0_over_c", c.v0_over_c);
    list("probe.b_e_qe", c.b_e_qe);
    if (get("probe.b_e_c")) {
        num("probe.b_e_c", p.b_e_c);
        c.b_e_c_given = true;
    }
    flag("probe.ec_x", c.ec_x);
    flag("probe.ec_z", c.ec_z);
    flag("probe.e_qe", c.e_qe);

    word("beam.kind", c.beam, {"monochromatic", "comb"});
    if (const auto* v = get("beam.q_mod_target")) {
        c.q_mod_target.clear();
        for (const auto& item : split_list(v->text)) {
            QmodTarget t;
            if (item == "none") t = QmodTarget::none;
            else if (item == "upper") t = QmodTarget::upper;
            else if (item == "lower") t = QmodTarget::lower;
            else if (item == "z") t = QmodTarget::z;
            else throw ConfigError(name("beam.q_mod_target") + ": expected none|upper|lower|z, got '" + item + "'");
            c.q_mod_target.push_back(t);
        }
    }
    if (get("beam.q_mod")) {
        double q = 0.0;
        num("beam.q_mod", q);
        c.q_mod = q;
    }
    integer("beam.n_comb", c.n_comb);
    list("beam.xi", c.xi);

    word("state.kind", c.state, {"pinem", "superposition", "ground"});
    list("state.f", c.f);
    list("state.theta", c.theta);

    num("spectrum.sigma", p.sigma);
    num("spectrum.omega_min", c.omega_min);
    num("spectrum.omega_max", c.omega_max);
    integer("spectrum.omega_points", c.omega_points);
    std::string norm = to_string(c.normalization);
    word("spectrum.normalization", norm, {"raw", "i0"});
    c.normalization = norm == "i0" ? Normalization::i0 : Normalization::raw;
    if (ov.normalization) c.normalization = *ov.normalization;

    list("grid.delta", c.delta);
    num("grid.k_min", c.k_min);
    num("grid.k_max", c.k_max);
    integer("grid.k_points", c.k_points);

    integer("caps.n_z_max", c.caps.n_z_max);
    integer("caps.manifold_max", c.caps.manifold_max);
    if (get("caps.energy_max")) {
        double e = 0.0;
        num("caps.energy_max", e);
        c.caps.energy_max = e;
    }
    if (get("caps.hard_limit")) {
        int h = 0;
        integer("caps.hard_limit", h);
        if (h < 1) throw ConfigError(name("caps.hard_limit") + ": must be >= 1");
        c.caps.hard_limit = static_cast<std::size_t>(h);
    }
    if (ov.n_z_max) c.caps.n_z_max = *ov.n_z_max;
    if (ov.manifold_max) c.caps.manifold_max = *ov.manifold_max;

    word("output.format", c.format, {"csv", "json"});
    integer("output.threads", c.threads);
    if (ov.threads) c.threads = *ov.threads;
    if (get("output.seed")) {
        int s = 0;
        integer("output.seed", s);
        if (s < 0) throw ConfigError(name("output.seed") + ": must be >= 0");
        c.seed = static_cast<unsigned long>(s);
    }

    // Range checks, each naming its key.
    auto require = [&](bool ok, const std::string& k, const std::string& what) {
        if (!ok) throw ConfigError(name(k) + ": " + what);
    };
    auto all_of = [](const std::vector<double>& v, auto pred) { return std::all_of(v.begin(), v.end(), pred); };
    require(all_of(c.v0_over_c, [](double v) { return v > 0 && v < 1; }), "probe.v0_over_c", "must lie in (0, 1)");
    require(all_of(c.b_e_qe, [](double b) { return b > 0; }), "probe.b_e_qe", "must be > 0");
    require(all_of(c.f, [](double x) { return x >= 0 && x <= 1; }), "state.f", "must lie in [0, 1]");
    require(c.n_comb >= 0 && c.n_comb % 2 == 0, "beam.n_comb", "must be even and >= 0");
    require(!c.q_mod || (std::isfinite(*c.q_mod) && *c.q_mod != 0.0), "beam.q_mod", "must be nonzero");
    require(c.omega_points >= 1, "spectrum.omega_points", "must be >= 1");
    require(c.omega_max > c.omega_min, "spectrum.omega_max", "must exceed omega_min");
    require(c.k_points >= 1, "grid.k_points", "must be >= 1");
    require(c.k_max > c.k_min, "grid.k_max", "must exceed k_min");
    require(c.caps.n_z_max >= 0, "caps.n_z_max", "must be >= 0");
    require(c.caps.manifold_max >= 1, "caps.manifold_max", "must be >= 1");
    require(c.threads >= 0, "output.threads", "must be >= 0");
    try {
        for (double v : c.v0_over_c)
            for (double b : c.b_e_qe) validate(c.point(v, b));
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        const std::string key = msg.substr(0, msg.find(':'));
        for (const auto& sec : {"target.", "probe.", "spectrum."})
            if (raw.count(sec + key)) throw ConfigError(name(sec + key) + msg.substr(key.size()));
        throw ConfigError(msg);
    }
    if (c.v0_over_c.empty() || c.b_e_qe.empty() || c.delta.empty() || c.theta.empty() || c.f.empty() ||
        c.xi.empty() || c.q_mod_target.empty())
        throw ConfigError("sweep lists must be non-empty");
    return c;
}

inline ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& ov = {}) {
    return resolve_config(parse_raw_config(text), ov);
}

}  // namespace qeels
