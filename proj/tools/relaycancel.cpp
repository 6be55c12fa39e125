#include "relaycancel/cli.hpp"

#include <CLI11.hpp>

#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Sampled-data H-infinity cancelers for relay self-interference"};
    app.require_subcommand(1);

    std::string config, out, controller;
    bool none = false;

    auto* design = app.add_subcommand("design", "Synthesize a canceler; writes K.json and report.json");
    design->add_option("config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    design->add_option("--out", out, "Output directory (default: config out_dir)");

    auto* simulate = app.add_subcommand("simulate", "Simulate the relay loop; writes trace.csv and metrics.json");
    simulate->add_option("config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    auto* ctl = simulate->add_option("--controller", controller, "Controller JSON from `design`")
                    ->check(CLI::ExistingFile);
    auto* bare = simulate->add_flag("--none", none, "Simulate without a canceler");
    ctl->excludes(bare);
    simulate->add_option("--out", out, "Output directory (default: config out_dir)");

    auto* freqresp = app.add_subcommand("freqresp", "Gain-vs-frequency CSVs for P, GP, the weight and the error system");
    freqresp->add_option("config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    freqresp->add_option("--controller", controller, "Controller JSON from `design`")->check(CLI::ExistingFile);
    freqresp->add_option("--out", out, "Output directory (default: config out_dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int status = app.exit(e);
        return status == 0 ? 0 : 1;
    }

    const auto chosen = controller.empty() ? std::nullopt : std::optional<std::string>(controller);
    if (design->parsed()) return relaycancel::cmd_design(config, out);
    if (simulate->parsed()) return relaycancel::cmd_simulate(config, chosen, out);
    return relaycancel::cmd_freqresp(config, chosen, out);
}
