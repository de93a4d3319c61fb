#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli/commands.hpp"

namespace cl = collapse_lab;

int main(int argc, char** argv) {
    CLI::App app{"Iterative maximum-likelihood refitting experiments"};
    app.require_subcommand(1);

    cl::cli::SimulateOptions sim;
    std::uint64_t sim_seed = 0;
    std::string sim_out;
    bool no_plot = false;
    auto* simulate = app.add_subcommand("simulate", "Run replications from a TOML or JSON config");
    simulate->add_option("config", sim.config_path, "Config file (.toml or .json)")->required();
    auto* seed_opt = simulate->add_option("--seed", sim_seed, "Override the config seed");
    auto* out_opt = simulate->add_option("--output-dir", sim_out, "Override the config output_dir");
    simulate->add_flag("--no-plot", no_plot, "Skip the SVG plot");

    auto* demo = app.add_subcommand("collapse-demo", "Adversarial constructions");
    demo->require_subcommand(1);

    cl::cli::SpikeDemoOptions spike;
    std::string spike_out;
    auto* spike_cmd = demo->add_subcommand("spike", "Spike mixture: two refits from the uniform start");
    spike_cmd->add_option("--N", spike.N, "Construction scale N")->capture_default_str();
    spike_cmd->add_option("--n", spike.n, "Samples per generation")->capture_default_str();
    spike_cmd->add_option("-R,--replications", spike.R, "Replications (>= 100)")->capture_default_str();
    spike_cmd->add_option("--seed", spike.seed, "Master seed")->capture_default_str();
    auto* spike_out_opt = spike_cmd->add_option("--output", spike_out, "JSON report path");

    cl::cli::TailDemoOptions tail;
    std::string tail_mode = "demo";
    std::string tail_out = ".";
    auto* tail_cmd = demo->add_subcommand("tail", "Tail chain: time until the spiked form is selected");
    tail_cmd->add_option("--n", tail.n, "Samples per generation")->capture_default_str();
    tail_cmd->add_option("-R,--replications", tail.R, "Replications")->capture_default_str();
    tail_cmd->add_option("--T-max", tail.T_max, "Number of refits")->capture_default_str();
    tail_cmd->add_option("--seed", tail.seed, "Master seed")->capture_default_str();
    tail_cmd->add_option("--mode", tail_mode, "Spike width schedule")
        ->check(CLI::IsMember({"demo", "paper"}))
        ->capture_default_str();
    tail_cmd->add_option("--E", tail.construction.budget_exponent, "Demo budget exponent")->capture_default_str();
    tail_cmd->add_option("--phi", tail.construction.phi, "Paper-mode growth function")
        ->check(CLI::IsMember({"identity", "log", "sqrt"}))
        ->capture_default_str();
    tail_cmd->add_option("--C", tail.construction.psi_constant, "Paper-mode constant C")->capture_default_str();
    tail_cmd->add_option("--delta", tail.construction.delta, "Paper-mode delta")->capture_default_str();
    tail_cmd->add_option("--min-J", tail.construction.min_J, "Smallest admissible J")->capture_default_str();
    tail_cmd->add_option("--output-dir", tail_out, "Directory for collapse_times.csv and survival.csv")
        ->capture_default_str();

    cl::cli::VerifyOptions verify;
    auto* verify_cmd = app.add_subcommand("verify", "Statistical self-checks; exit 1 if any fails");
    verify_cmd->add_flag("--json", verify.json, "Machine-readable report");
    verify_cmd->add_option("--inject-fault", verify.inject_fault, "Negative control (fisher)");
    verify_cmd->add_option("--seed", verify.seed, "Seed")->capture_default_str();
    verify_cmd->add_option("--samples", verify.audit_samples, "Monte-Carlo samples per audit")
        ->capture_default_str();

    cl::cli::SweepOptions sweep;
    std::string sweep_family = "power_beta", sweep_mode = "exact", sweep_out = "sweep.csv", sweep_svg;
    auto* sweep_cmd = app.add_subcommand("sweep", "Error ratio t=T over t=1 across true parameters");
    sweep_cmd->add_option("--family", sweep_family, "exponential or power_beta")->capture_default_str();
    sweep_cmd->add_option("--theta0", sweep.theta0, "True parameter values")->delimiter(',')->required();
    sweep_cmd->add_option("--n", sweep.n, "Samples per generation")->capture_default_str();
    sweep_cmd->add_option("--T", sweep.T, "Final iteration")->capture_default_str();
    sweep_cmd->add_option("-R,--replications", sweep.R, "Replications")->capture_default_str();
    sweep_cmd->add_option("--seed", sweep.seed, "Master seed")->capture_default_str();
    sweep_cmd->add_option("--mode", sweep_mode, "MLE mode")
        ->check(CLI::IsMember({"exact", "numeric"}))
        ->capture_default_str();
    sweep_cmd->add_option("--bootstrap", sweep.bootstrap, "Bootstrap resamples")->capture_default_str();
    sweep_cmd->add_option("--output", sweep_out, "CSV path")->capture_default_str();
    auto* svg_opt = sweep_cmd->add_option("--svg", sweep_svg, "Optional SVG plot path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cl::cli::kExitUsage;
    }

    if (*simulate) {
        if (*seed_opt) sim.seed = sim_seed;
        if (*out_opt) sim.output_dir = sim_out;
        if (no_plot) sim.plot = false;
        return cl::cli::cmd_simulate(sim, std::cout, std::cerr);
    }
    if (*spike_cmd) {
        if (*spike_out_opt) spike.output = spike_out;
        return cl::cli::cmd_collapse_spike(spike, std::cout, std::cerr);
    }
    if (*tail_cmd) {
        tail.construction.width_mode = tail_mode == "paper" ? cl::SpikeWidthMode::paper : cl::SpikeWidthMode::demo;
        tail.output_dir = tail_out;
        return cl::cli::cmd_collapse_tail(tail, std::cout, std::cerr);
    }
    if (*verify_cmd) {
        return cl::cli::cmd_verify(verify, std::cout, std::cerr);
    }
    if (*sweep_cmd) {
        const auto family = cl::parse_family(sweep_family);
        if (!family) {
            std::cerr << "error: unknown family '" << sweep_family << "'\n";
            return cl::cli::kExitUsage;
        }
        sweep.family = *family;
        sweep.mode = sweep_mode == "numeric" ? cl::MleMode::numeric : cl::MleMode::exact;
        sweep.output = sweep_out;
        if (*svg_opt) sweep.svg = sweep_svg;
        return cl::cli::cmd_sweep(sweep, std::cout, std::cerr);
    }
    return cl::cli::kExitUsage;
}
