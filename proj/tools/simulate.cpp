// simulate.cpp — Command-line runner for the figure scenarios

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "surrogate/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

int env_threads() {
    if (const char* v = std::getenv("SURROGATE_THREADS")) {
        try {
            return std::max(1, std::stoi(v));
        } catch (const std::exception&) {
        }
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    using namespace surrogate;
    CLI::App app{"Surrogate Hamiltonian open-system simulator"};
    app.set_version_flag("--version", version_string());

    std::string scenario;
    std::string config_file;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    int threads = env_threads();
    std::optional<int> modes;
    std::optional<double> eps0;
    bool full_duration = false;
    bool print_config = false;
    bool quiet = false;

    app.add_option("--scenario", scenario, "fig2..fig6, a scenario kind, or custom")->required();
    app.add_option("--config", config_file, "JSON file merged over the scenario defaults");
    app.add_option("--set", overrides, "Override one key: section.key=value (value parsed as JSON)");
    app.add_option("--seed", seed, "Master seed (u64)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads (default: SURROGATE_THREADS or 1)")->check(CLI::PositiveNumber);
    app.add_option("--modes", modes, "Number of bath modes (disables the mode sweep)");
    app.add_option("--eps0", eps0, "Lower spectral edge (fig5: single-spectrum sweep)");
    app.add_flag("--full-duration", full_duration, "Use the full-duration t_final instead of the desk-scale window");
    app.add_flag("--print-config", print_config, "Print the resolved configuration and exit");
    app.add_flag("--quiet", quiet, "Suppress progress messages");
    CLI11_PARSE(app, argc, argv);

    Config cfg;
    try {
        cfg = default_config(scenario);
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw Error(ErrorCode::config_error, "cannot read config file '" + config_file + "'");
            Config patch;
            try {
                patch = Config::parse(in, nullptr, true, true);
            } catch (const std::exception& e) {
                throw Error(ErrorCode::config_error, "cannot parse '" + config_file + "': " + e.what());
            }
            merge_config(cfg, patch);
        }
        if (seed) cfg["seed"] = *seed;
        if (modes) {
            cfg["bath"]["modes"] = *modes;
            cfg["bath"]["modes_sweep"] = nullptr;
        }
        if (eps0) {
            cfg["bath"]["eps0"] = *eps0;
            if (cfg.contains("sweep") && cfg["sweep"].contains("eps0_values")) {
                cfg["sweep"]["eps0_values"] = Config::array({*eps0});
            }
        }
        if (full_duration) {
            if (!cfg.contains("full_duration_t_final") || cfg["full_duration_t_final"].is_null()) {
                throw Error(ErrorCode::config_error, "scenario has no full_duration_t_final");
            }
            cfg["t_final"] = cfg["full_duration_t_final"];
        }
        for (const auto& o : overrides) apply_override(cfg, o);
        // Normalize the scenario key so sidecars record the canonical kind.
        cfg["scenario"] = scenario_kind(cfg.value("scenario", scenario));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    if (print_config) {
        std::cout << cfg.dump(2) << '\n';
        return 0;
    }

    RunOptions opt;
    opt.out_dir = out_dir;
    opt.threads = threads;
    if (!quiet) opt.log = [](const std::string& m) { std::cerr << m << '\n'; };
    try {
        const auto summary = run_scenario(cfg, opt);
        for (const auto& f : summary.failures) std::cerr << "realization failed: " << f << '\n';
        if (!quiet) std::cerr << summary.files.size() << " files written\n";
    } catch (const Error& e) {
        std::cerr << (e.code() == ErrorCode::config_error ? "config error: " : "numeric failure: ") << e.what() << '\n';
        return e.code() == ErrorCode::config_error ? kExitConfig : kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
