#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isslab/estimate.hpp"
#include "isslab/integrate.hpp"
#include "isslab/lattice.hpp"
#include "isslab/systems.hpp"

namespace isslab::experiment {

inline constexpr const char* kToolVersion = "isslab 0.1.0";

// Sectioned key = value configuration ('#' comments, '[section]' headers).
struct Config {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static Config parse(const std::string& text);
    static Config parse_file(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double number(const std::string& section, const std::string& key) const;
    double number_or(const std::string& section, const std::string& key, double fallback) const;
    int integer_or(const std::string& section, const std::string& key, int fallback) const;
    bool flag_or(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> numbers_or(const std::string& section, const std::string& key,
                                   const std::vector<double>& fallback) const;
    std::vector<int> integers_or(const std::string& section, const std::string& key,
                                 const std::vector<int>& fallback) const;
};

integrate::IntegratorConfig integrator_from(const Config& cfg);
estimate::EstimationBudget budget_from(const Config& cfg);
systems::TruncatedModeSystem system_from(const Config& cfg);

// Trajectory CSV: columns time, mode_index, component_index, value, local_error;
// event rows carry component_index = -1 and the crossing level in the value
// column, merged into time order.
void write_trajectory_csv(std::ostream& out, const integrate::Trajectory& traj, int mode_dim);

// Plain-text manifest with stable field order (tool version, command, then the
// config echo sorted by section and key).
std::string manifest_text(const Config& cfg, const std::string& command);

std::string witness_to_text(const estimate::Witness& w);
estimate::Witness witness_from_text(const std::string& text);

void write_report(std::ostream& out, const estimate::EstimationReport& rep,
                  const std::string& system_id);

int cmd_simulate(const Config& cfg, std::ostream& log);
int cmd_estimate(const Config& cfg, std::ostream& log);
int cmd_lyapunov(const Config& cfg, std::ostream& log);
int cmd_replay(const Config& cfg, std::ostream& log);

struct LatticeQueryArgs {
    std::vector<std::string> facts;
    std::optional<std::string> target;
    std::string context = "General";
    std::optional<std::string> rules_path;
};

int cmd_lattice(const LatticeQueryArgs& args, std::ostream& out);

}  // namespace isslab::experiment
