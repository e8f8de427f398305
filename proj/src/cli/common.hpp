#ifndef RSODC_CLI_COMMON_HPP
#define RSODC_CLI_COMMON_HPP

#include "rsodc/cli/io.hpp"
#include "rsodc/core.hpp"
#include "rsodc/fusion_graph.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rsodc::cli {

/// Flags shared by every subcommand that fits a model.
struct CommonOptions {
    SolverParams params;
    std::string v_mode = "exact";
    double tau = kTauDefault;
    int delta = kDeltaDefault;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0: RSODC_THREADS or hardware concurrency
    std::string out = ".";
    bool no_header = false;

    /// Applies v_mode and the thread fallback; throws ParameterError on bad values.
    void resolve();
};

Json config_json(const CommonOptions& options);

/// Manifest embedded in every JSON result. Wall-clock time sits under "timings".
Json manifest(const std::string& command, const CommonOptions& options, const Json& inputs,
              const std::vector<std::filesystem::path>& outputs, std::chrono::steady_clock::time_point start);

std::vector<double> parse_double_list(const std::string& text, const std::string& flag);
std::vector<int> parse_int_list(const std::string& text, const std::string& flag);
std::string join(const std::vector<double>& values);

std::filesystem::path prepare_out_dir(const std::string& out);

struct SimulateOptions {
    int design = 2;
    int replicates = 20;
    std::string n_list, p_list, k_list, theta_list, xi_list;
    std::string eta1_grid, gamma_grid, rho_grid, tau_grid, delta_grid;
    int mc_samples = 100;
    int cv_repeats = 10;
    bool cv = false;
    bool save_data = false;
};

int cmd_simulate(const CommonOptions& common, const SimulateOptions& sim);

}  // namespace rsodc::cli

#endif
