#pragma once

#include "fcov/stats.hpp"

#include <cstdint>
#include <vector>

namespace fcov {

// Which weak-variance estimate feeds the pooled deviation terms.
enum class WeakVarianceRule { gaussian, empirical };

struct KTestOptions {
    WeakVarianceRule rule = WeakVarianceRule::gaussian;
    int n_draws = 1; // one sign draw suffices; more just averages the term
};

struct KSampleResult {
    double statistic = 0.0;
    double threshold = 0.0;
    bool reject = false;
    double alpha = 0.0;
    double p_norm = 0.0;
    bool tuned = true;
    std::vector<double> per_sample_norms; // ||Sigma_hat^(i) - Sigma_hat||_p
    double elapsed_ms = 0.0;
    // Smallest alpha on the grid {0.001,...,0.5} at which the test rejects;
    // 1.0 when it accepts everywhere (the method yields no exact p-value).
    double alpha_star = 1.0;
};

// Tuned concentration test for H0: all k covariance operators equal.
// Rejects when sum_i ||Sigma_hat^(i) - Sigma_hat||_p exceeds the
// concentration threshold; conservative by construction, with the tuning
// coefficients 1 - k^{-1/2} (Rademacher term) and (k+2)/(k+3) (deviation
// terms) bringing the size near alpha.
KSampleResult k_sample_test(const std::vector<FunctionalSample>& samples, double p_norm,
                            double alpha, bool tuned, std::uint64_t seed,
                            const KTestOptions& options = {});

struct PermutationResult {
    double p_value = 1.0;
    double statistic = 0.0;
    double elapsed_ms = 0.0;
};

// Label-reshuffling baseline: p = (1 + #{permuted >= observed}) / (M + 1).
PermutationResult permutation_test_two_sample(const FunctionalSample& a,
                                              const FunctionalSample& b, double p_norm,
                                              int n_perms, std::uint64_t seed);

enum class TestMethod { concentration, permutation };

struct PowerPoint {
    double gamma = 0.0;
    double power = 0.0;
    double mean_elapsed_ms = 0.0;
};

struct PowerOptions {
    bool tuned = true;
    int n_perms = 100;
    WeakVarianceRule rule = WeakVarianceRule::gaussian;
};

// For each gamma, draws n curves from sigma1 and n from the Procrustes
// interpolate(sigma1, sigma2, gamma), runs the chosen two-sample test
// n_reps times and reports rejection frequency plus mean per-test time.
// Replications parallelize over derived seeds; the power values do not
// depend on the number of worker threads.
std::vector<PowerPoint> power_curve(const CovOperator& sigma1, const CovOperator& sigma2,
                                    const std::vector<double>& gammas, int n, double alpha,
                                    double p_norm, int n_reps, TestMethod method,
                                    std::uint64_t seed, const PowerOptions& options = {});

} // namespace fcov
