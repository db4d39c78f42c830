#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pedcross/trainer.hpp"
#include "pedcross/world.hpp"

namespace pedcross {

/// Bad or inconsistent configuration (exit category 2 in the CLI).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unreadable or schema-violating data artifact (exit category 3).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Everything a run needs: geometry, scenario set, training defaults, and
/// evaluation sizes. Defaults reproduce the built-in scenario table, so the
/// CLI works without any config file.
struct ProjectConfig {
    RoadGeometry geometry;
    std::vector<Scenario> scenarios = scenario_table();
    TrainConfig train;
    int eval_rollouts = 1000;
    int fit_rollouts = 1000;
};

/// JSON config file. All keys optional; unknown keys are rejected to catch
/// typos. See the README for the schema.
ProjectConfig load_config(const std::string& path);

/// Resolved config as JSON text (stable key order), embedded in manifests.
std::string config_to_json(const ProjectConfig& cfg);
std::string train_config_to_json(const TrainConfig& cfg);

/// "a:b:step" inclusive grid, e.g. "0:1:0.05" -> 21 values, or a single
/// number. Throws ConfigError on malformed specs.
std::vector<double> parse_grid_spec(const std::string& spec);

}  // namespace pedcross
