// Command-line front end: simulate trajectories, run empirical property
// checks, test Lyapunov certificates, query the implication knowledge base,
// and replay recorded witnesses.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isslab/common.hpp"
#include "isslab/experiment.hpp"

namespace {

int run_config_command(const std::string& config_path,
                       int (*command)(const isslab::experiment::Config&, std::ostream&)) {
    auto cfg = isslab::experiment::Config::parse_file(config_path);
    return command(cfg, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"isslab: numerical laboratory for stability of mode systems"};
    app.require_subcommand(1);

    std::string config_path;

    auto* sim = app.add_subcommand("simulate", "Integrate one trajectory to CSV");
    sim->add_option("--config", config_path, "Config file")->required();

    auto* est = app.add_subcommand("estimate", "Empirically check a stability property");
    est->add_option("--config", config_path, "Config file")->required();

    auto* lyp = app.add_subcommand("lyapunov", "Check a Lyapunov certificate candidate");
    lyp->add_option("--config", config_path, "Config file")->required();

    auto* rep = app.add_subcommand("replay", "Re-run a recorded witness");
    rep->add_option("--config", config_path, "Config file")->required();

    isslab::experiment::LatticeQueryArgs lat_args;
    std::string lat_target;
    std::string lat_rules;
    auto* lat = app.add_subcommand("lattice", "Query the implication knowledge base");
    lat->add_option("--facts", lat_args.facts, "Known-true property ids")->required();
    lat->add_option("--target", lat_target, "Property to decide (omit to print the closure)");
    lat->add_option("--context", lat_args.context, "Context flags joined with '+'");
    lat->add_option("--rules", lat_rules, "Rule file overriding the built-in set");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_config_command(config_path, isslab::experiment::cmd_simulate);
        if (est->parsed()) return run_config_command(config_path, isslab::experiment::cmd_estimate);
        if (lyp->parsed()) return run_config_command(config_path, isslab::experiment::cmd_lyapunov);
        if (rep->parsed()) return run_config_command(config_path, isslab::experiment::cmd_replay);
        if (lat->parsed()) {
            if (!lat_target.empty()) lat_args.target = lat_target;
            if (!lat_rules.empty()) lat_args.rules_path = lat_rules;
            return isslab::experiment::cmd_lattice(lat_args, std::cout);
        }
    } catch (const isslab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
