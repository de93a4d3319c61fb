#ifndef COLLAPSE_LAB_CLI_OUTPUT_HPP
#define COLLAPSE_LAB_CLI_OUTPUT_HPP

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "collapse_lab/core.hpp"
#include "collapse_lab/engine.hpp"
#include "json.hpp"

namespace collapse_lab::cli {

inline constexpr const char* kTrajectoryHeader = "run_id,t,theta_0,theta_1,param_error,tv,kl,dataset_size";

/// Shortest text that round-trips the double; empty for non-finite values.
std::string format_number(double v);

/// One row per replication × record; aborted runs contribute their partial records.
void write_trajectory_csv(std::ostream& out, const std::vector<Trajectory>& runs);

/// Mean param_error per t, read back from a trajectory CSV.
std::map<std::size_t, double> mean_error_by_iteration(std::istream& csv);

nlohmann::json summary_to_json(const nlohmann::json& config_echo, const engine::ReplicationSummary& summary);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Standalone SVG 1.1 line chart, one polyline per series.
std::string render_svg(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label);

/// Writes `content` to `path`, creating parent directories. Throws Error on failure.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace collapse_lab::cli

#endif  // COLLAPSE_LAB_CLI_OUTPUT_HPP
