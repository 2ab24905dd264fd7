#pragma once

#include "fcov/ktest.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fcov {

// Desk-scale experiment descriptions. "calibrate" estimates the empirical
// size of the k-sample test under H0 on a simulated Gaussian family;
// "power" sweeps the Procrustes interpolation path.
struct ExperimentConfig {
    std::string id; // "calibrate" or "power"
    std::uint64_t seed = 0;
    int dim = 16;
    double decay = 4.0;
    int k = 4;
    std::vector<int> sample_sizes = {50};
    int replications = 1000;
    double p_norm = 2.0;
    std::vector<double> alphas = {0.05};
    std::vector<double> gammas = {};
    TestMethod method = TestMethod::concentration;
    bool tuned = true;
    std::filesystem::path out_dir; // empty: nothing written

    void validate() const;
};

struct ResultRecord {
    std::string experiment_id;
    std::map<std::string, std::string> params;
    std::string metric;
    double value = 0.0;
    double se = 0.0;
    double elapsed_ms = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const ResultRecord&) const = default;
};

// Runs the experiment deterministically for the given seed and, when
// out_dir is set, writes records.jsonl plus a plot-ready CSV. Timing
// columns in emitted files are zeroed so identical configs produce
// byte-identical files; live timings are what the CLI prints.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config);

void write_records(const std::filesystem::path& path, const std::vector<ResultRecord>& records,
                   bool zero_elapsed);
std::vector<ResultRecord> read_records(const std::filesystem::path& path);

struct SizeEstimate {
    int n = 0;
    double alpha = 0.0;
    double size = 0.0;
    double se = 0.0;
};

// Empirical rejection rate of the k-sample test with all samples drawn
// from sigma. Replications run in parallel over derived seeds.
SizeEstimate empirical_size_h0(const CovOperator& sigma, int k, int n, double alpha,
                               double p_norm, int reps, bool tuned, std::uint64_t seed);

} // namespace fcov
