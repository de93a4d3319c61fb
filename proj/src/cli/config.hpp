#ifndef COLLAPSE_LAB_CLI_CONFIG_HPP
#define COLLAPSE_LAB_CLI_CONFIG_HPP

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <vector>

#include "collapse_lab/core.hpp"
#include "json.hpp"

namespace collapse_lab::cli {

/// Malformed or invalid experiment configuration; maps to exit status 2.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct ExperimentConfig {
    RunConfig run;  ///< run.n is replaced by each entry of `ns` in turn
    std::vector<std::size_t> ns;
    std::size_t replications = 1;
    std::filesystem::path output_dir = ".";
    bool plot = true;
    nlohmann::json echo;  ///< the parsed document, as run
};

/// Required keys: family, theta_star, n, T, seed, replications, mle_mode.
/// Optional: metrics, collapse_threshold, output_dir, plot, N, log_f_mode,
/// E, phi, C, delta, min_J. Any other key is rejected.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Reads a .toml or .json file.
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json toml_to_json(std::string_view text);

}  // namespace collapse_lab::cli

#endif  // COLLAPSE_LAB_CLI_CONFIG_HPP
