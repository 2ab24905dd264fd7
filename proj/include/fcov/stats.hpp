#pragma once

#include "fcov/operators.hpp"
#include "fcov/rng.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fcov {

// A group of curves on a common grid, optionally labeled.
struct FunctionalSample {
    FunctionalSample(Grid grid, std::vector<Curve> curves,
                     std::optional<std::string> label = std::nullopt);

    int size() const { return static_cast<int>(curves.size()); }
    int dim() const { return grid.size(); }

    Grid grid;
    std::vector<Curve> curves;
    std::optional<std::string> label;
};

// A group of covariance operators with their ranks (curves per operator).
struct OperatorSample {
    OperatorSample(Grid grid, std::vector<CovOperator> operators, std::vector<int> ranks,
                   std::optional<std::string> label = std::nullopt);

    int size() const { return static_cast<int>(operators.size()); }

    Grid grid;
    std::vector<CovOperator> operators;
    std::vector<int> ranks;
    std::optional<std::string> label;
};

Curve sample_mean(const FunctionalSample& s);

// n^{-1} sum_i (f_i - fbar) (x) (f_i - fbar); raw second moment when
// center = false. PSD by construction.
CovOperator empirical_covariance(const FunctionalSample& s, bool center = true);

// R_n = n^{-1} sum_i eps_i { (f_i - fbar)^(x)2 - Sigma_hat }. Symmetric,
// generally indefinite; identically zero when all signs agree.
CovOperator rademacher_average(const FunctionalSample& s, const RademacherDraw& draw);

// Mean of ||R_n||_p over n_draws independent sign vectors. A single draw
// is a legitimate estimate; more draws only stabilize the value.
double rademacher_norm_estimate(const FunctionalSample& s, double p, int n_draws,
                                std::uint64_t seed);

inline constexpr int kDefaultRademacherDraws = 32;

// Gaussian weak variance bound sqrt(2) ||Sigma||_p.
double weak_variance_gaussian(const CovOperator& sigma, double p);

// Empirical weak variance sqrt(|| n^{-1} sum f^(x)2 - fbar^(x)2 ||_p);
// zero on a degenerate (all identical) sample.
double weak_variance_empirical(const FunctionalSample& s, double p);

// sigma^2_pool = N^{-1} sum_i n_i sigma_i^2 (returns the squared quantity).
double pooled_weak_variance(const std::vector<double>& sigmas, const std::vector<int>& counts);

// Covariance of one group of curves; rank metadata is the group size.
CovOperator group_covariance(const FunctionalSample& s, bool center);

} // namespace fcov
