#pragma once

#include "json.hpp"

#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace skewlab {

// INI-style experiment description; see README.md for the schema.
struct ExperimentConfig {
    boost::property_tree::ptree tree;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Throws std::invalid_argument on unknown sections or keys.
void validate_config(const ExperimentConfig& cfg);

struct CommandResult {
    bool pass = false;
    nlohmann::json summary;
};

// Each command writes <name>.csv and <name>.dat into cfg.out_dir.
CommandResult cmd_cone_check(const ExperimentConfig& cfg);
CommandResult cmd_entropy(const ExperimentConfig& cfg);
CommandResult cmd_decay(const ExperimentConfig& cfg);
CommandResult cmd_clt(const ExperimentConfig& cfg);
CommandResult cmd_stability(const ExperimentConfig& cfg);
CommandResult cmd_dfa_decay(const ExperimentConfig& cfg);
CommandResult cmd_sample(const ExperimentConfig& cfg);

const std::vector<std::string>& subcommands();
CommandResult run_command(const std::string& name, const ExperimentConfig& cfg);

// Exit codes: 0 all assertions pass, 2 assertion failure, 1 infrastructure error.
int run_cli(int argc, char** argv);

} // namespace skewlab
