// scenario.hpp — Figure scenarios: configuration, validation, execution and CSV output

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "surrogate/observables.hpp"
#include "surrogate/swap.hpp"

namespace surrogate {

using Config = nlohmann::ordered_json;

// Names accepted on the command line: fig2..fig6, the scenario kinds, or "custom".
std::vector<std::string> scenario_names();
// Canonical kind for a name (fig2 -> pure_dephasing, ...); throws config_error.
std::string scenario_kind(const std::string& name);

// Built-in defaults of each scenario.
Config default_config(const std::string& name);

// Recursive merge of `patch` over `base` (objects merge, everything else replaces).
void merge_config(Config& base, const Config& patch);

// Applies `key.path=value`; value parsed as JSON, falling back to a plain string.
void apply_override(Config& cfg, const std::string& assignment);

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

// Pure validation. `zeno_time` (when known) is compared with the swap interval.
ValidationReport validate_config(const Config& cfg, std::optional<double> zeno_time = std::nullopt);

// Typed pieces built from a configuration.
struct ScenarioModel {
    SystemModel system;
    TotalHamiltonian hamiltonian;
    std::optional<BathSpec> tls_bath;
};
ScenarioModel build_model(const Config& cfg, int modes, std::optional<double> eps0 = std::nullopt);

PropagatorConfig propagator_config(const Config& cfg);
ImaginaryTimeConfig imaginary_time_config(const Config& cfg);

// Ground state requested by `initial.ground`: "bare" (system only) or "total"; none for NV.
std::optional<GroundState> scenario_ground_state(const Config& cfg, const ScenarioModel& model);

// Initial state: ground state (if any), bath initialisation and excitation. `excitation`
// overrides `initial.excitation`.
SpinorState initial_state(const Config& cfg, const ScenarioModel& model, const GroundState* ground,
                          std::optional<std::string> excitation = std::nullopt);

struct Trajectory {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows; // NaN = missing
};

// Fills ratio_R from the E_S, q_mean and p_mean columns.
void fill_ratio(Trajectory& traj, double mass, double omega, LadderMeasure measure);

std::string format_number(double v); // 17 significant digits; "" for NaN
void write_csv(const std::string& path, const Trajectory& traj);
Trajectory read_csv(const std::string& path);

struct WrittenFile {
    std::string path;
    std::string kind; // mean, realization, reference, trajectory, envelope
};

struct RunSummary {
    std::vector<WrittenFile> files;
    std::vector<std::string> warnings;
    std::vector<std::string> failures;
};

struct RunOptions {
    std::string out_dir{"."};
    int threads{1};
    std::function<void(const std::string&)> log;
};

// Executes the scenario described by a resolved configuration. Throws Error with
// config_error before any computation for invalid configurations, step_failure when
// the computation fails (partial output is flushed with an error marker first).
RunSummary run_scenario(const Config& cfg, const RunOptions& options);

std::string version_string();

} // namespace surrogate
