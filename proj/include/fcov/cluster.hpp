#pragma once

#include "fcov/stats.hpp"

#include <cstdint>
#include <vector>

namespace fcov {

struct ClusterReseed {
    int iteration = 0;
    int cluster = 0;
    int point = 0;
};

// Soft clustering state: responsibility rows are probability vectors and
// tau always equals the column means of rho. Operators and norms are unset
// until the first EM step.
struct ClusterState {
    Eigen::MatrixXd rho; // n x k
    Eigen::VectorXd tau; // k
    std::vector<CovOperator> sigmas;
    Eigen::VectorXd rademacher_norms;
    double sigma_pool = 0.0;
    int iteration = 0;
    std::vector<ClusterReseed> reseeds;

    int n() const { return static_cast<int>(rho.rows()); }
    int k() const { return static_cast<int>(rho.cols()); }
};

// Responsibility rows drawn Dirichlet(1/2,...,1/2) (the Jeffreys prior);
// row i uses the stream derived from (seed, i).
ClusterState init_state(int n, int k, std::uint64_t seed);

// One EM iteration: tau and the weighted operator/Rademacher sums come
// from the incoming rho, the pooled weak variance is sqrt(2)||Sigma_pool||_p,
// and the new responsibilities use the classifier posterior with the
// effective cluster sizes as counts. A cluster whose total responsibility
// falls below 1e-8 is reseeded from the responsibility-weighted farthest
// data point. Fresh signs per cluster derive from (seed, iteration, j).
ClusterState em_step(const ClusterState& state, const OperatorSample& data, double p_norm,
                     std::uint64_t seed);

// Same step with caller-supplied sign vectors, one per cluster.
ClusterState em_step_with_draws(const ClusterState& state, const OperatorSample& data,
                                double p_norm, const std::vector<RademacherDraw>& draws);

// Soft-assignment posterior rows for given cluster summaries; the
// data-parallel inner kernel of the EM step.
Eigen::MatrixXd responsibilities(const OperatorSample& data,
                                 const std::vector<CovOperator>& sigmas,
                                 const Eigen::VectorXd& rademacher_norms,
                                 const Eigen::VectorXd& effective_counts, double sigma_pool,
                                 double p_norm);

struct IterationSummary {
    int iteration = 0;
    double max_rho_change = 0.0;
    Eigen::VectorXd tau;
    int reseeded = 0;
};

struct ClusteringResult {
    std::vector<int> assignments;
    ClusterState state;
    std::vector<IterationSummary> trace;
    bool converged = false;
};

// Iterates em_step until the max absolute responsibility change drops
// below tol or max_iter is reached. Trace norm (p = 1) is the default
// topology; the heavier norms overweight the principal eigenvalue.
ClusteringResult run_clustering(const OperatorSample& data, int k, int max_iter = 20,
                                double tol = 1e-6, double p_norm = 1.0,
                                std::uint64_t seed = 0);

} // namespace fcov
