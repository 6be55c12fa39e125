#pragma once

#include "relaycancel/error.hpp"
#include "relaycancel/plant.hpp"
#include "relaycancel/simulate.hpp"
#include "relaycancel/synth.hpp"

#include <optional>
#include <string>
#include <vector>

namespace relaycancel {

/// Transfer function coefficients in descending powers of s.
struct TransferFunction {
    std::vector<double> num;
    std::vector<double> den;

    StateSpace realize() const;
};

/// One JSON document describing a design problem and its simulation.
struct RunConfig {
    CancelerMode mode = CancelerMode::Feedforward;
    TransferFunction P, G, weight;
    double L = 0.0;
    double h = 1.0;
    int N = 16;
    int M = 64;
    double meas_reg = 1e-6;
    double gamma_tol = 1e-3;
    InputSpec input = RectWave{};
    double duration = 40.0;
    std::string out_dir = ".";
};

/// Strict parser: unknown keys and wrong types raise InvalidConfig.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Fully resolved config (defaults filled in) as pretty-printed JSON.
std::string config_to_json(const RunConfig& config);

DesignProblem make_problem(const RunConfig& config);
SimConfig make_sim_config(const RunConfig& config, std::optional<Controller> K);

/// 0 ok, 1 validation, 2 infeasible, 3 numerical failure.
int exit_code(ErrorCode code) noexcept;

// Each command prints `ERROR <code>: <detail>` to stderr on failure and
// returns the exit status. An empty out_dir falls back to the config's.
int cmd_design(const std::string& config_path, const std::string& out_dir = {});
int cmd_simulate(const std::string& config_path, const std::optional<std::string>& controller_path,
                 const std::string& out_dir = {});
int cmd_freqresp(const std::string& config_path, const std::optional<std::string>& controller_path,
                 const std::string& out_dir = {});

}  // namespace relaycancel
