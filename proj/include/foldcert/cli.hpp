#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "foldcert/rng.hpp"
#include "foldcert/spectral.hpp"

namespace foldcert {

/// Parsed command-line run. Unknown flags/config keys are rejected before
/// any computation starts.
struct RunConfig {
    std::string command;  // certify|trace|folds|generic|limit|pde|section
    std::string problem;  // catalog name or path to a problem config JSON
    TolPolicy tols;
    std::uint64_t seed = kDefaultSeed;
    std::string output_dir = "out";
    std::string format = "csv";  // csv|json preference for bulk data
    bool quiet = false;
    bool with_timestamp = true;  // disabled by the determinism tests

    // certify
    std::vector<double> point;  // x1..xn,t

    // trace
    std::vector<double> start;
    int direction = 1;
    double initial_step = 0.01;
    int max_nodes = 20000;

    // folds / generic / section
    std::optional<std::pair<double, double>> t_range;
    std::pair<double, double> box{-2.5, 2.5};
    int grid_density = 9;
    double t_section = 0.0;

    // generic
    int samples = 100;
    double radius = 0.1;

    // limit
    std::optional<std::pair<double, double>> t_span;
    std::vector<double> x_init;
    std::vector<double> eps_list;

    // pde
    int pde_m = 64;
    std::string pde_load = "t";
    double pde_length = 6.0;
    std::string pde_y;  // expression in x, or empty
    std::string pde_z;
    std::optional<std::pair<double, double>> amp_range;
};

/// Executes one run, writing artifacts under output_dir and the main result
/// to stdout. Returns the process exit code: 0 success, 1 usage/config,
/// 2 numerical inconclusiveness.
int run_command(const RunConfig& cfg);

/// argv-level entry point used by the tool binary (CLI11 parsing, strict).
int cli_main(int argc, const char* const* argv);

}  // namespace foldcert
