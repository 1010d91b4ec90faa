#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qeels/config.hpp"
#include "qeels/electron.hpp"
#include "qeels/observables.hpp"
#include "qeels/validation.hpp"

// Figure pipelines and the run driver behind the command-line tool.
namespace qeels {

inline constexpr const char* version = "0.1.0";

// ---------------------------------------------------------------- emission

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

namespace emit {

/// 12 significant digits, with -0 folded into 0 so output stays diff-stable.
inline std::string number(double x) {
    if (x == 0.0) return "0";
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline double rounded(double x) { return std::isfinite(x) ? std::strtod(number(x).c_str(), nullptr) : x; }

/// RFC 4180 field quoting.
inline std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

inline std::string cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return number(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    return quote(std::get<std::string>(c));
}

inline nlohmann::ordered_json json_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? nlohmann::ordered_json(rounded(*d)) : nullptr;
    if (const auto* i = std::get_if<long long>(&c)) return *i;
    return std::get<std::string>(c);
}

/// One "#" line echoing the resolved configuration, then the column row.
inline std::string csv(const Table& t, const ExperimentConfig& cfg) {
    std::string out = "# qeels " + std::string(version);
    for (const auto& [k, v] : cfg.echo()) out += "; " + k + "=" + v;
    out += "\r\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + quote(t.columns[i]);
    out += "\r\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell(row[i]);
        out += "\r\n";
    }
    return out;
}

inline nlohmann::ordered_json table_json(const Table& t) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json r = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = json_cell(row[i]);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace emit

struct RunResult {
    int status = 0;
    std::vector<Table> tables;
    std::vector<std::string> warnings;  // sorted, unique
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    std::vector<std::string> files;
};

inline nlohmann::ordered_json manifest(const ExperimentConfig& cfg, const RunResult& r, const Table& t,
                                       const std::string& data_file) {
    nlohmann::ordered_json m;
    m["experiment"] = to_string(cfg.kind);
    m["version"] = version;
    m["data_file"] = data_file;
    m["columns"] = t.columns;
    m["rows"] = t.rows.size();
    nlohmann::ordered_json c = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg.echo()) c[k] = v;
    m["config"] = c;
    m["caps"] = {{"n_z_max", cfg.caps.n_z_max},
                 {"manifold_max", cfg.caps.manifold_max},
                 {"energy_max", cfg.caps.energy_max ? nlohmann::ordered_json(*cfg.caps.energy_max) : nullptr},
                 {"hard_limit", cfg.caps.hard_limit}};
    m["warnings"] = r.warnings;
    m["summary"] = r.summary;
    m["status"] = r.status;
    return m;
}

/// Writes every table plus a manifest next to it. Returns the written paths.
inline std::vector<std::string> write_outputs(const ExperimentConfig& cfg, const RunResult& r,
                                              const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    auto put = [&](const std::filesystem::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        f << text;
        files.push_back(p.string());
    };
    for (const auto& t : r.tables) {
        const std::string data = t.name + (cfg.format == "json" ? ".json" : ".csv");
        if (cfg.format == "json")
            put(dir / data, emit::table_json(t).dump(2) + "\n");
        else
            put(dir / data, emit::csv(t, cfg));
        put(dir / (t.name + ".manifest.json"), manifest(cfg, r, t, data).dump(2) + "\n");
    }
    return files;
}

// ---------------------------------------------------------------- sweeps

/// Evaluates f(i) for i < n on worker threads; results stay in index order.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, int threads, F&& f) {
    std::vector<R> out(n);
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                out[i] = f(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

/// Everything needed to scatter at one parameter point.
struct PointSetup {
    PhysicalParams params;
    TargetSpace space;
    ProbeConfig probe;
    Scattering sc;

    PointSetup(const ExperimentConfig& cfg, const PhysicalParams& p)
        : params(p), space(build_space(p, cfg.caps)), probe(cfg.probe(p)), sc(scattering_matrix(space, probe)) {}
    PointSetup(const ExperimentConfig& cfg, const PhysicalParams& p, const ProbeConfig& pr)
        : params(p), space(build_space(p, cfg.caps)), probe(pr), sc(scattering_matrix(space, probe)) {}

    std::size_t idx(int nz, int n, Branch b) const { return space.index(nz, n, b); }
    double q_unit() const { return params.hbar_omega_c / params.hbar_v0(); }
};

inline double q_mod_for(const PointSetup& s, QmodTarget t) {
    switch (t) {
        case QmodTarget::upper: return s.space.energy(s.idx(0, 1, Branch::plus)) / s.params.hbar_v0();
        case QmodTarget::lower: return s.space.energy(s.idx(0, 1, Branch::minus)) / s.params.hbar_v0();
        case QmodTarget::z: return s.space.energy(s.idx(1, 0, Branch::ground)) / s.params.hbar_v0();
        case QmodTarget::none: break;
    }
    return 0.0;
}

/// Beam per config: monochromatic, or a comb tuned to `target` (or the
/// explicit q_mod). QmodTarget::none always gives the unmodulated beam.
inline Wavepacket make_beam(const ExperimentConfig& cfg, const PointSetup& s, QmodTarget target, double xi) {
    const double v = s.params.v0_over_c;
    if (cfg.beam == "monochromatic" || (target == QmodTarget::none && !cfg.q_mod) || cfg.n_comb == 0)
        return monochromatic(v);
    const double q = target != QmodTarget::none ? q_mod_for(s, target) : *cfg.q_mod;
    return comb(v, q, cfg.n_comb, xi);
}

inline TargetVector make_state(const ExperimentConfig& cfg, const TargetSpace& space, double f, double theta) {
    if (cfg.state == "superposition") return superposition_initial(space, theta);
    if (cfg.state == "ground") return basis_state(space, 0);
    return pinem_initial(space, f);
}

/// Intensity scale for the configured normalization: 1 for raw, otherwise
/// the mean polariton peak height with the cavity channels switched off.
inline double intensity_scale(const ExperimentConfig& cfg, const PointSetup& s, const TargetVector& c,
                              const Wavepacket& w) {
    if (cfg.normalization == Normalization::raw) return 1.0;
    ProbeConfig qe_only = s.probe;
    qe_only.ec_x = qe_only.ec_z = false;
    const PointSetup ref(cfg, s.params, qe_only);
    const auto rho = reduce_target(scatter(ref.space, ref.sc, c, w, ref.probe));
    const auto lines = power_spectrum(rho, ref.space, s.params.sigma);
    const auto h = peak_heights(lines, {ref.space.energy(ref.idx(0, 1, Branch::plus)),
                                        ref.space.energy(ref.idx(0, 1, Branch::minus))});
    const double i0 = 0.5 * (h[0] + h[1]);
    if (!(i0 > 0.0)) throw std::runtime_error("i0 normalization: reference polariton peaks vanish");
    return i0;
}

inline std::vector<double> omega_grid(const ExperimentConfig& cfg) {
    return config_detail::linspace(cfg.omega_min, cfg.omega_max, cfg.omega_points);
}

inline void require_sigma(const ExperimentConfig& cfg) {
    if (!(cfg.params.sigma > 0.0)) throw ConfigError("sigma: spectra need sigma > 0");
}

struct Collected {
    std::set<std::string> warnings;
    void add(const std::vector<std::string>& w) { warnings.insert(w.begin(), w.end()); }
};

// ---------------------------------------------------------------- figures

inline RunResult run_fig2(const ExperimentConfig& cfg) {
    RunResult r;
    Table t{"fig2", {"b_e_qe", "v0_over_c", "h_G_1plus", "h_G_1minus", "h_G_1z"}, {}};
    const std::size_t nb = cfg.b_e_qe.size(), nv = cfg.v0_over_c.size();
    struct Row {
        double hp, hm, hz;
        std::vector<std::string> warnings;
    };
    auto rows = parallel_map<Row>(nb * nv, cfg.threads, [&](std::size_t i) {
        const double b = cfg.b_e_qe[i / nv], v = cfg.v0_over_c[i % nv];
        const PhysicalParams p = cfg.point(v, b);
        const auto space = build_space(p, make_caps(1, 1));
        const auto probe = cfg.probe(p);
        const auto g = space.index(0, 0, Branch::ground);
        auto h = [&](int nz, int n, Branch br) { return matrix_element_h(space, probe, g, space.index(nz, n, br)).real(); };
        return Row{h(0, 1, Branch::plus), h(0, 1, Branch::minus), h(1, 0, Branch::ground),
                   build_interaction(space, probe).warnings};
    });
    Collected col;
    bool mono_plus = true, mono_z = true, bounded = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        t.rows.push_back({cfg.b_e_qe[i / nv], cfg.v0_over_c[i % nv], row.hp, row.hm, row.hz});
        col.add(row.warnings);
        bounded = bounded && std::abs(row.hp) <= 1 && std::abs(row.hm) <= 1 && std::abs(row.hz) <= 1;
        if (i >= nv) {
            const auto& prev = rows[i - nv];  // same v0, previous b
            const bool increasing_b = cfg.b_e_qe[i / nv] > cfg.b_e_qe[i / nv - 1];
            if (increasing_b) {
                mono_plus = mono_plus && std::abs(row.hp) <= std::abs(prev.hp);
                mono_z = mono_z && std::abs(row.hz) <= std::abs(prev.hz);
            }
        }
    }
    // Sign changes of h_G_1minus along v0 at each b.
    nlohmann::ordered_json roots = nlohmann::ordered_json::array();
    for (std::size_t ib = 0; ib < nb; ++ib)
        for (std::size_t iv = 1; iv < nv; ++iv) {
            const double a = rows[ib * nv + iv - 1].hm, c = rows[ib * nv + iv].hm;
            if ((a < 0) != (c < 0)) {
                const double v0 = cfg.v0_over_c[iv - 1], v1 = cfg.v0_over_c[iv];
                roots.push_back({{"b_e_qe", emit::rounded(cfg.b_e_qe[ib])},
                                 {"v0_over_c", emit::rounded(v0 + (v1 - v0) * a / (a - c))}});
            }
        }
    r.summary["monotone_decay_b_h_G_1plus"] = mono_plus;
    r.summary["monotone_decay_b_h_G_1z"] = mono_z;
    r.summary["abs_h_at_most_1"] = bounded;
    r.summary["h_G_1minus_zero_crossings"] = roots;
    r.warnings.assign(col.warnings.begin(), col.warnings.end());
    r.tables.push_back(std::move(t));
    return r;
}

inline RunResult run_fig3(const ExperimentConfig& cfg) {
    require_sigma(cfg);
    RunResult r;
    const auto omegas = omega_grid(cfg);
    const std::size_t nv = cfg.v0_over_c.size();
    struct Point {
        std::vector<double> intensity;
        double up, lo, z, scale;
        std::vector<std::string> warnings;
    };
    auto pts = parallel_map<Point>(nv, cfg.threads, [&](std::size_t i) {
        const PointSetup s(cfg, cfg.point(cfg.v0_over_c[i], cfg.b_e_qe.front()));
        const auto c = make_state(cfg, s.space, cfg.f.front(), cfg.theta.front());
        const auto w = make_beam(cfg, s, cfg.q_mod_target.front(), cfg.xi.front());
        const auto js = scatter(s.space, s.sc, c, w, s.probe);
        auto lines = power_spectrum(reduce_target(js), s.space, s.params.sigma);
        lines.mode = cfg.normalization;
        lines.scale = intensity_scale(cfg, s, c, w);
        const auto h = peak_heights(lines, {s.space.energy(s.idx(0, 1, Branch::plus)),
                                            s.space.energy(s.idx(0, 1, Branch::minus)),
                                            s.space.energy(s.idx(1, 0, Branch::ground))});
        return Point{lines.sample(omegas), h[0], h[1], h[2], lines.scale, js.warnings};
    });
    Table spec{"fig3_spectra", {"v0_over_c", "omega_eV", "intensity", "normalization_mode"}, {}};
    Table peaks{"fig3_peaks", {"v0_over_c", "peak_upper", "peak_lower", "peak_z", "scale", "normalization_mode"}, {}};
    Collected col;
    bool upper_largest = true;
    const std::string mode = to_string(cfg.normalization);
    for (std::size_t i = 0; i < nv; ++i) {
        const auto& p = pts[i];
        for (std::size_t k = 0; k < omegas.size(); ++k)
            spec.rows.push_back({cfg.v0_over_c[i], omegas[k], p.intensity[k], mode});
        peaks.rows.push_back({cfg.v0_over_c[i], p.up, p.lo, p.z, p.scale, mode});
        upper_largest = upper_largest && p.up >= p.lo && p.up >= p.z;
        col.add(p.warnings);
    }
    r.summary["upper_peak_always_largest"] = upper_largest;
    r.warnings.assign(col.warnings.begin(), col.warnings.end());
    r.tables.push_back(std::move(spec));
    r.tables.push_back(std::move(peaks));
    return r;
}

inline RunResult run_fig4(const ExperimentConfig& cfg) {
    require_sigma(cfg);
    RunResult r;
    const std::size_t nf = cfg.f.size(), nd = cfg.delta.size();
    const auto xs = config_detail::linspace(cfg.k_min, cfg.k_max, cfg.k_points);
    const double dx = cfg.k_points > 1 ? xs[1] - xs[0] : cfg.k_max - cfg.k_min;
    struct Point {
        KDistribution dn;
        std::vector<double> binned, broadened;
        std::vector<std::string> warnings;
    };
    auto pts = parallel_map<Point>(nf * nd, cfg.threads, [&](std::size_t i) {
        const PhysicalParams p =
            with_half_detuning(cfg.point(cfg.v0_over_c.front(), cfg.b_e_qe.front()), cfg.delta[i % nd]);
        const PointSetup s(cfg, p);
        const auto w = make_beam(cfg, s, cfg.q_mod_target.front(), cfg.xi.front());
        const auto js = scatter(s.space, s.sc, pinem_initial(s.space, cfg.f[i / nd]), w, s.probe);
        const double qu = s.q_unit();
        Point out{delta_n(populations(w), reduce_electron(js), qu), {}, {}, js.warnings};
        std::vector<double> centres;
        for (double x : xs) centres.push_back(x * qu);
        out.binned = out.dn.binned(centres, dx * qu);
        const double gamma = p.sigma / p.hbar_v0();
        for (double x : xs) out.broadened.push_back(out.dn.broadened(x * qu, gamma) * qu);
        return out;
    });
    Table map{"fig4_map", {"f", "delta_eV", "k_offset_units", "delta_n", "delta_n_broadened"}, {}};
    Table lines{"fig4_lines", {"f", "delta_eV", "k_offset_units", "delta_n"}, {}};
    Collected col;
    double gain_f0 = 0.0, sum_err = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double f = cfg.f[i / nd], d = cfg.delta[i % nd];
        const auto& pt = pts[i];
        for (std::size_t k = 0; k < xs.size(); ++k) map.rows.push_back({f, d, xs[k], pt.binned[k], pt.broadened[k]});
        for (const auto& [k, n] : pt.dn.entries) {
            lines.rows.push_back({f, d, k / pt.dn.q_unit, n});
            if (f == 0.0 && k > 1e-12) gain_f0 = std::max(gain_f0, n);
        }
        sum_err = std::max(sum_err, std::abs(pt.dn.sum()));
        col.add(pt.warnings);
    }

    // Emission spectra before and after at zero detuning, one per f.
    Table spec{"fig4_spectrum", {"f", "omega_eV", "intensity_before", "intensity_after"}, {}};
    const auto omegas = omega_grid(cfg);
    const PointSetup s0(cfg, with_half_detuning(cfg.point(cfg.v0_over_c.front(), cfg.b_e_qe.front()), 0.0));
    for (double f : cfg.f) {
        const auto c = pinem_initial(s0.space, f);
        const auto w = make_beam(cfg, s0, cfg.q_mod_target.front(), cfg.xi.front());
        const auto before = power_spectrum(pure_density(c), s0.space, s0.params.sigma);
        const auto after = power_spectrum(reduce_target(scatter(s0.space, s0.sc, c, w, s0.probe)), s0.space,
                                          s0.params.sigma);
        for (double om : omegas) spec.rows.push_back({f, om, before.sample(om), after.sample(om)});
    }
    r.summary["max_gain_side_delta_n_f0"] = emit::rounded(gain_f0);
    r.summary["max_abs_sum_delta_n"] = emit::rounded(sum_err);
    r.warnings.assign(col.warnings.begin(), col.warnings.end());
    r.tables.push_back(std::move(map));
    r.tables.push_back(std::move(lines));
    r.tables.push_back(std::move(spec));
    return r;
}

inline RunResult run_fig5(const ExperimentConfig& cfg) {
    require_sigma(cfg);
    RunResult r;
    const auto omegas = omega_grid(cfg);
    // Non-modulated reference first, then each configured comb target.
    std::vector<QmodTarget> targets{QmodTarget::none};
    for (auto t : cfg.q_mod_target)
        if (t != QmodTarget::none) targets.push_back(t);
    const std::size_t nt = targets.size(), nv = cfg.v0_over_c.size(), nth = cfg.theta.size();
    struct Point {
        std::vector<double> dpop;  // G, 1-, 1+, 1z
        std::vector<double> before, after;
        std::vector<std::string> warnings;
    };
    auto pts = parallel_map<Point>(nt * nv * nth, cfg.threads, [&](std::size_t i) {
        const QmodTarget target = targets[i / (nv * nth)];
        const double v = cfg.v0_over_c[(i / nth) % nv], th = cfg.theta[i % nth];
        const PointSetup s(cfg, cfg.point(v, cfg.b_e_qe.front()));
        const auto c = make_state(cfg, s.space, cfg.f.front(), th);
        const auto w = make_beam(cfg, s, target, cfg.xi.front());
        const auto js = scatter(s.space, s.sc, c, w, s.probe);
        const auto rho0 = pure_density(c);
        const auto rho = reduce_target(js);
        Point out;
        for (auto k : {s.idx(0, 0, Branch::ground), s.idx(0, 1, Branch::minus), s.idx(0, 1, Branch::plus),
                       s.idx(1, 0, Branch::ground)})
            out.dpop.push_back(rho.population(k) - rho0.population(k));
        out.before = power_spectrum(rho0, s.space, s.params.sigma).sample(omegas);
        out.after = power_spectrum(rho, s.space, s.params.sigma).sample(omegas);
        out.warnings = js.warnings;
        return out;
    });
    const char* labels[] = {"G", "1-", "1+", "1z"};
    Table pop{"fig5_populations", {"q_mod_target", "v0_over_c", "theta", "state_label", "delta_population"}, {}};
    Table spec{"fig5_spectrum", {"q_mod_target", "v0_over_c", "theta", "omega_eV", "intensity_before", "intensity_after"}, {}};
    Collected col;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string tg = to_string(targets[i / (nv * nth)]);
        const double v = cfg.v0_over_c[(i / nth) % nv], th = cfg.theta[i % nth];
        for (std::size_t k = 0; k < 4; ++k) pop.rows.push_back({tg, v, th, std::string(labels[k]), pts[i].dpop[k]});
        for (std::size_t k = 0; k < omegas.size(); ++k)
            spec.rows.push_back({tg, v, th, omegas[k], pts[i].before[k], pts[i].after[k]});
        col.add(pts[i].warnings);
    }
    // Reversal of the modulated contribution under theta -> -theta.
    double reversal = 0.0;
    bool have_pair = false;
    for (std::size_t a = 0; a < nth; ++a)
        for (std::size_t b = 0; b < nth; ++b) {
            if (std::abs(cfg.theta[a] + cfg.theta[b]) > 1e-12 || std::abs(std::abs(cfg.theta[a]) - units::pi / 2) > 1e-12)
                continue;
            for (std::size_t it = 1; it < nt; ++it)
                for (std::size_t iv = 0; iv < nv; ++iv)
                    for (std::size_t k = 0; k < 3; ++k) {
                        auto at = [&](std::size_t t, std::size_t th) { return pts[(t * nv + iv) * nth + th].dpop[k]; };
                        const double ma = at(it, a) - at(0, a), mb = at(it, b) - at(0, b);
                        reversal = std::max(reversal, std::abs(ma + mb));
                        have_pair = true;
                    }
        }
    if (have_pair) r.summary["theta_reversal_residual"] = emit::rounded(reversal);
    r.warnings.assign(col.warnings.begin(), col.warnings.end());
    r.tables.push_back(std::move(pop));
    r.tables.push_back(std::move(spec));
    return r;
}

inline RunResult run_fig6(const ExperimentConfig& cfg) {
    RunResult r;
    const std::size_t nv = cfg.v0_over_c.size(), nb = cfg.b_e_qe.size();
    const std::size_t nth = cfg.theta.size(), nt = cfg.q_mod_target.size();
    struct Point {
        std::vector<double> de;  // theta-major, then target
        std::vector<std::string> warnings;
    };
    auto pts = parallel_map<Point>(nv * nb, cfg.threads, [&](std::size_t i) {
        const PointSetup s(cfg, cfg.point(cfg.v0_over_c[i / nb], cfg.b_e_qe[i % nb]));
        Point out;
        for (double th : cfg.theta) {
            const auto c = make_state(cfg, s.space, cfg.f.front(), th);
            for (auto tg : cfg.q_mod_target) {
                const auto w = make_beam(cfg, s, tg, cfg.xi.front());
                const auto js = scatter(s.space, s.sc, c, w, s.probe);
                const auto dn = delta_n(populations(w), reduce_electron(js));
                out.de.push_back(energy_change(dn, s.params.hbar_omega_c).in_hbar_omega_c);
                out.warnings.insert(out.warnings.end(), js.warnings.begin(), js.warnings.end());
            }
        }
        return out;
    });
    Table t{"fig6", {"v0_over_c", "b_e_qe_nm", "theta", "q_mod_target", "delta_E_over_hbar_omega_c"}, {}};
    Collected col;
    nlohmann::ordered_json extremes = nlohmann::ordered_json::array();
    std::vector<double> lo(nth * nt, INFINITY), hi(nth * nt, -INFINITY);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t a = 0; a < nth; ++a)
            for (std::size_t b = 0; b < nt; ++b) {
                const double de = pts[i].de[a * nt + b];
                t.rows.push_back({cfg.v0_over_c[i / nb], cfg.b_e_qe[i % nb], cfg.theta[a],
                                  std::string(to_string(cfg.q_mod_target[b])), de});
                lo[a * nt + b] = std::min(lo[a * nt + b], de);
                hi[a * nt + b] = std::max(hi[a * nt + b], de);
            }
        col.add(pts[i].warnings);
    }
    bool nm_loss = true, have_nm = false;
    for (std::size_t a = 0; a < nth; ++a)
        for (std::size_t b = 0; b < nt; ++b) {
            extremes.push_back({{"theta", emit::rounded(cfg.theta[a])},
                                {"q_mod_target", to_string(cfg.q_mod_target[b])},
                                {"min", emit::rounded(lo[a * nt + b])},
                                {"max", emit::rounded(hi[a * nt + b])}});
            if (cfg.q_mod_target[b] == QmodTarget::none) {
                have_nm = true;
                nm_loss = nm_loss && hi[a * nt + b] <= 0.0;
            }
        }
    if (have_nm) r.summary["non_modulated_always_loss"] = nm_loss;
    r.summary["extremes"] = extremes;
    r.warnings.assign(col.warnings.begin(), col.warnings.end());
    r.tables.push_back(std::move(t));
    return r;
}

inline RunResult run_custom(const ExperimentConfig& cfg) {
    RunResult r;
    PhysicalParams p = cfg.point(cfg.v0_over_c.front(), cfg.b_e_qe.front());
    p = with_half_detuning(p, p.half_detuning() + cfg.delta.front());
    const PointSetup s(cfg, p);
    const auto c = make_state(cfg, s.space, cfg.f.front(), cfg.theta.front());
    const auto w = make_beam(cfg, s, cfg.q_mod_target.front(), cfg.xi.front());
    const auto js = scatter(s.space, s.sc, c, w, s.probe);
    const auto rho0 = pure_density(c);
    const auto rho = reduce_target(js);
    check_density(rho);

    Table pop{"custom_populations", {"state_label", "energy_eV", "population_before", "population_after"}, {}};
    for (std::size_t i = 0; i < s.space.dim(); ++i)
        pop.rows.push_back({label(s.space.state(i)), s.space.energy(i), rho0.population(i), rho.population(i)});
    const auto dn = delta_n(populations(w), reduce_electron(js), s.q_unit());
    Table k{"custom_delta_n", {"k_offset_units", "delta_n"}, {}};
    for (const auto& [x, n] : dn.entries) k.rows.push_back({x / dn.q_unit, n});
    r.tables.push_back(std::move(pop));
    r.tables.push_back(std::move(k));
    if (p.sigma > 0.0) {
        Table spec{"custom_spectrum", {"omega_eV", "intensity_before", "intensity_after"}, {}};
        auto before = power_spectrum(rho0, s.space, p.sigma);
        auto after = power_spectrum(rho, s.space, p.sigma);
        before.scale = after.scale = intensity_scale(cfg, s, c, w);
        for (double om : omega_grid(cfg)) spec.rows.push_back({om, before.sample(om), after.sample(om)});
        r.tables.push_back(std::move(spec));
    }
    const auto de = energy_change(dn, p.hbar_omega_c);
    r.summary["delta_E_eV"] = emit::rounded(de.eV);
    r.summary["delta_E_over_hbar_omega_c"] = emit::rounded(de.in_hbar_omega_c);
    r.summary["joint_norm"] = emit::rounded(js.norm_squared());
    r.summary["sum_delta_n"] = emit::rounded(dn.sum());
    r.summary["unitarity_defect"] = emit::rounded(unitarity_defect(s.sc.s));
    r.summary["taylor_terms"] = s.sc.exp_info.terms;
    r.summary["dimension"] = s.space.dim();
    std::set<std::string> warn(js.warnings.begin(), js.warnings.end());
    r.warnings.assign(warn.begin(), warn.end());
    return r;
}

inline RunResult run_validate(const ExperimentConfig& cfg) {
    RunResult r;
    validation::SuiteResult all;
    const bool every = cfg.suite == "all";
    if (every || cfg.suite == "couplings") all.append(validation::couplings_suite());
    if (every || cfg.suite == "joint") all.append(validation::joint_suite(4, cfg.seed));
    if (every || cfg.suite == "unitarity") all.append(validation::unitarity_suite());
    if (every || cfg.suite == "two_state") all.append(validation::two_state_suite(20, cfg.seed));
    Table t{"validate", {"suite", "check", "value", "threshold", "pass"}, {}};
    for (const auto& c : all.checks)
        t.rows.push_back({c.suite, c.label, c.value, c.threshold, std::string(c.pass ? "true" : "false")});
    r.tables.push_back(std::move(t));
    if (!all.couplings.empty()) {
        Table c{"validate_couplings", {"channel", "q", "b", "closed_form", "oracle", "rel_err"}, {}};
        for (const auto& row : all.couplings) c.rows.push_back({row.channel, row.q, row.b, row.closed_form, row.oracle, row.rel_err});
        r.tables.push_back(std::move(c));
    }
    r.status = all.pass() ? 0 : 1;
    r.summary["pass"] = all.pass();
    r.summary["checks"] = all.checks.size();
    return r;
}

inline RunResult run(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case Experiment::fig2: return run_fig2(cfg);
        case Experiment::fig3: return run_fig3(cfg);
        case Experiment::fig4: return run_fig4(cfg);
        case Experiment::fig5: return run_fig5(cfg);
        case Experiment::fig6: return run_fig6(cfg);
        case Experiment::custom: return run_custom(cfg);
        case Experiment::validate: return run_validate(cfg);
    }
    throw std::logic_error("run: unknown experiment");
}

}  // namespace qeels
