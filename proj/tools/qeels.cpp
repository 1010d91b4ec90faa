#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "qeels/experiments.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read config file " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

// "nz=2,N=4" in any order; either key may be omitted.
void parse_caps(const std::string& text, qeels::ConfigOverrides& ov) {
    static const std::regex item(R"(\s*(nz|N)\s*=\s*(\d+)\s*)");
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::smatch m;
        if (!std::regex_match(part, m, item)) throw CLI::ValidationError("--caps", "expected nz=<int>,N=<int>");
        const int v = std::stoi(m[2]);
        (m[1] == "nz" ? ov.n_z_max : ov.manifold_max) = v;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Free-electron probing of a cavity/emitter polariton target"};
    app.set_version_flag("--version", qeels::version);
    std::string config_path, experiment, out_dir = "out", caps, normalization, suite;
    int threads = -1;
    app.add_option("--config", config_path, "Experiment configuration file")->check(CLI::ExistingFile);
    app.add_option("--experiment", experiment, "fig2|fig3|fig4|fig5|fig6|custom|validate");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--caps", caps, "Truncation caps, e.g. nz=2,N=4");
    app.add_option("--normalization", normalization, "Spectrum normalization")->check(CLI::IsMember({"raw", "i0"}));
    std::vector<std::string> positional;
    app.add_option("args", positional, "[experiment] [validate suite]");
    CLI11_PARSE(app, argc, argv);

    try {
        qeels::ConfigOverrides ov;
        if (!positional.empty() && experiment.empty()) experiment = positional[0];
        if (positional.size() > 1) suite = positional[1];
        if (positional.size() > 2) throw CLI::ValidationError("args", "too many positional arguments");
        if (!experiment.empty()) {
            ov.kind = qeels::experiment_from(experiment);
            if (!ov.kind) throw CLI::ValidationError("--experiment", "unknown experiment '" + experiment + "'");
        }
        if (!suite.empty()) {
            if (ov.kind != qeels::Experiment::validate)
                throw CLI::ValidationError("args", "a suite name is only accepted after 'validate'");
            static const std::set<std::string> suites{"all", "couplings", "joint", "unitarity", "two_state"};
            if (!suites.count(suite)) throw CLI::ValidationError("args", "unknown validate suite '" + suite + "'");
            ov.suite = suite;
        }
        if (!caps.empty()) parse_caps(caps, ov);
        if (!normalization.empty())
            ov.normalization = normalization == "i0" ? qeels::Normalization::i0 : qeels::Normalization::raw;
        if (threads >= 0) ov.threads = threads;

        const auto cfg = qeels::parse_config(config_path.empty() ? std::string() : slurp(config_path), ov);
        auto result = qeels::run(cfg);
        for (const auto& f : qeels::write_outputs(cfg, result, out_dir)) std::cout << "wrote " << f << "\n";
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        if (cfg.kind == qeels::Experiment::validate)
            std::cout << (result.status == 0 ? "validate: all checks passed" : "validate: FAILED") << "\n";
        return result.status;
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
