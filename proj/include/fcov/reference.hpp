#pragma once

#include "fcov/cluster.hpp"
#include "fcov/stats.hpp"

namespace fcov::reference {

// Plain serial implementations of the parallel kernels, kept for testing
// and benchmarking. Each mirrors the per-element summation order of its
// OpenMP counterpart, so outputs must match bit for bit; the spectral
// routines instead go through singular values, giving an independent
// algebraic route for the norm checks.

double inner_product(const Curve& f, const Curve& g);

Curve sample_mean(const FunctionalSample& s);

CovOperator empirical_covariance(const FunctionalSample& s, bool center = true);

CovOperator rademacher_average(const FunctionalSample& s, const RademacherDraw& draw);

double rademacher_norm_estimate(const FunctionalSample& s, double p, int n_draws,
                                std::uint64_t seed);

FunctionalSample sample_gaussian(const CovOperator& s, int n, std::uint64_t seed);

Eigen::MatrixXd responsibilities(const OperatorSample& data,
                                 const std::vector<CovOperator>& sigmas,
                                 const Eigen::VectorXd& rademacher_norms,
                                 const Eigen::VectorXd& effective_counts, double sigma_pool,
                                 double p_norm);

// Schatten norm via the singular values of the weighted matrix.
double schatten_norm_svd(const CovOperator& s, double p);

double weak_variance_empirical(const FunctionalSample& s, double p);

double pooled_weak_variance(const std::vector<double>& sigmas, const std::vector<int>& counts);

// Procrustes distance between 2x2 operators by scanning rotations and
// reflections over a fine angle grid.
double procrustes_bruteforce_2x2(const CovOperator& s1, const CovOperator& s2, int n_angles);

} // namespace fcov::reference
