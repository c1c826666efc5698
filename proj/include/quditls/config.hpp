#pragma once

#include "quditls/lightshift.hpp"
#include "quditls/noise.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace quditls {
namespace config {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PhysicsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Full experiment description. Every field has a default matching the
/// reference experiment; the config file only overrides.
struct ExperimentConfig {
    // [run]
    int dimension = 2;
    std::string sequence = "decay";  ///< single_gate | decay | spacing_scan | budget | certify
    int gates_max = 9;
    std::int64_t shots = 500;
    int phases = 12;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string format = "json";  ///< json | csv | both
    std::string certify_input;

    // [trap]
    lightshift::TrapConfig trap;

    // [lightshift]
    double theta = 0;  ///< 0 = choose the maximally entangling phase
    std::string constraint = "fix_delta";
    double delta = 2 * 3.14159265358979323846 / 35e-6;
    double eta = 0.167;
    double shift = 0;

    // [noise]
    noise::NoiseConfig noise;

    // [analytic]
    noise::AnalyticErrorParams analytic;

    // [budget]
    std::vector<int> budget_dims{2, 3, 4, 5};
    std::vector<std::string> budget_sources;
    bool budget_joint = false;

    // [scan]
    int scan_points = 64;
    double scan_time = 10e-6;
    double scan_shift = 2 * 3.14159265358979323846 * 1e5;
};

/// Line-oriented key = value format with [section] headers and '#' comments.
/// Unknown sections or keys are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// The config grammar, for --help and the README.
std::string config_grammar();

}  // namespace config
}  // namespace quditls
