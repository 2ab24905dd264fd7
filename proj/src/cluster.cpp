#include "fcov/cluster.hpp"

#include "fcov/operators.hpp"

#include <cmath>

namespace fcov {

namespace {

constexpr double kEmptyClusterTol = 1e-8;

// Plain ascending-order column sums; the tau-equals-column-means contract
// is exact, so the reduction order must be reproducible.
Eigen::VectorXd column_sums(const Eigen::MatrixXd& m)
{
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            acc += m(i, j);
        sums[j] = acc;
    }
    return sums;
}

Eigen::VectorXd column_means(const Eigen::MatrixXd& m)
{
    return column_sums(m) / static_cast<double>(m.rows());
}

} // namespace

ClusterState init_state(int n, int k, std::uint64_t seed)
{
    if (k < 1)
        throw std::invalid_argument("init_state: k must be >= 1");
    if (k > n)
        throw std::invalid_argument("init_state: k must not exceed n");

    ClusterState state;
    state.rho.resize(n, k);
    if (k == 1) {
        state.rho.setOnes();
    } else {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            auto eng = make_engine(split_seed(seed, static_cast<std::uint64_t>(i)));
            std::gamma_distribution<double> gamma(0.5, 1.0);
            double total = 0.0;
            for (int j = 0; j < k; ++j) {
                const double g = gamma(eng);
                state.rho(i, j) = g;
                total += g;
            }
            if (total <= 0.0) {
                // pathological underflow of every gamma draw
                state.rho.row(i).setConstant(1.0 / k);
            } else {
                state.rho.row(i) /= total;
            }
        }
    }
    state.tau = column_means(state.rho);
    state.iteration = 0;
    return state;
}

Eigen::MatrixXd responsibilities(const OperatorSample& data,
                                 const std::vector<CovOperator>& sigmas,
                                 const Eigen::VectorXd& rademacher_norms,
                                 const Eigen::VectorXd& effective_counts, double sigma_pool,
                                 double p_norm)
{
    const int n = data.size();
    const int k = static_cast<int>(sigmas.size());
    if (!(sigma_pool > 0.0))
        throw std::invalid_argument("responsibilities: sigma_pool must be positive");

    Eigen::MatrixXd rho(n, k);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd logp(k);
        for (int j = 0; j < k; ++j) {
            const double dist =
                schatten_distance(data.operators[static_cast<std::size_t>(i)], sigmas[static_cast<std::size_t>(j)], p_norm);
            const double r = std::max(0.0, dist - rademacher_norms[j]);
            const double z = r / sigma_pool;
            logp[j] = -0.5 * effective_counts[j] * z * z;
        }
        const double top = logp.maxCoeff();
        Eigen::VectorXd row = (logp.array() - top).exp();
        rho.row(i) = row.transpose() / row.sum();
    }
    return rho;
}

ClusterState em_step_with_draws(const ClusterState& state, const OperatorSample& data,
                                double p_norm, const std::vector<RademacherDraw>& draws)
{
    const int n = data.size();
    const int k = state.k();
    if (state.n() != n)
        throw std::invalid_argument("em_step: state and data sizes differ");
    if (static_cast<int>(draws.size()) != k)
        throw std::invalid_argument("em_step: one sign draw per cluster required");
    const int d = data.grid.size();

    Eigen::VectorXd col_sums = column_sums(state.rho);
    Eigen::VectorXd n_eff = col_sums;
    const Eigen::VectorXd tau_next = col_sums / n;

    // Weighted cluster means over clusters that still own mass.
    std::vector<Eigen::MatrixXd> means(static_cast<std::size_t>(k));
    std::vector<int> starved;
    for (int j = 0; j < k; ++j) {
        if (col_sums[j] < kEmptyClusterTol) {
            starved.push_back(j);
            continue;
        }
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
        for (int i = 0; i < n; ++i)
            acc += state.rho(i, j) * data.operators[static_cast<std::size_t>(i)].kernel();
        means[static_cast<std::size_t>(j)] = acc / col_sums[j];
    }

    ClusterState next;
    next.iteration = state.iteration + 1;
    next.reseeds = state.reseeds;

    // Rescue collapsed clusters: hand each one the data point farthest
    // (responsibility weighted) from the surviving centers.
    if (!starved.empty()) {
        if (static_cast<int>(starved.size()) == k)
            throw std::invalid_argument("em_step: every cluster is empty");
        std::vector<double> remoteness(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < k; ++j) {
                if (col_sums[j] < kEmptyClusterTol)
                    continue;
                acc += state.rho(i, j) *
                       schatten_distance(data.operators[static_cast<std::size_t>(i)],
                                         CovOperator(data.grid, means[static_cast<std::size_t>(j)]), p_norm);
            }
            remoteness[static_cast<std::size_t>(i)] = acc;
        }
        for (int j : starved) {
            int far = 0;
            for (int i = 1; i < n; ++i)
                if (remoteness[static_cast<std::size_t>(i)] > remoteness[static_cast<std::size_t>(far)])
                    far = i;
            means[static_cast<std::size_t>(j)] = data.operators[static_cast<std::size_t>(far)].kernel();
            n_eff[j] = 1.0;
            remoteness[static_cast<std::size_t>(far)] = -1.0; // do not reuse the same point
            next.reseeds.push_back({next.iteration, j, far});
        }
    }

    next.sigmas.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j)
        next.sigmas.emplace_back(data.grid, means[static_cast<std::size_t>(j)]);

    // Weighted Rademacher sums with fresh signs.
    next.rademacher_norms.resize(k);
    for (int j = 0; j < k; ++j) {
        const RademacherDraw& draw = draws[static_cast<std::size_t>(j)];
        if (static_cast<int>(draw.signs.size()) != n)
            throw std::invalid_argument("em_step: draw length does not match data size");
        if (col_sums[j] < kEmptyClusterTol) {
            next.rademacher_norms[j] = 0.0; // rescued cluster restarts from a bare point
            continue;
        }
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
        for (int i = 0; i < n; ++i)
            acc += state.rho(i, j) * draw.signs[static_cast<std::size_t>(i)] *
                   (data.operators[static_cast<std::size_t>(i)].kernel() - means[static_cast<std::size_t>(j)]);
        acc /= col_sums[j];
        next.rademacher_norms[j] = schatten_norm(CovOperator(data.grid, std::move(acc)), p_norm);
    }

    // Pooled operator and weak variance; per-cluster variances would let a
    // single cluster swallow everything.
    Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < k; ++j)
        pooled += tau_next[j] * means[static_cast<std::size_t>(j)];
    next.sigma_pool = weak_variance_gaussian(CovOperator(data.grid, std::move(pooled)), p_norm);

    next.rho = responsibilities(data, next.sigmas, next.rademacher_norms, n_eff,
                                next.sigma_pool, p_norm);
    next.tau = column_means(next.rho);
    return next;
}

ClusterState em_step(const ClusterState& state, const OperatorSample& data, double p_norm,
                     std::uint64_t seed)
{
    std::vector<RademacherDraw> draws;
    draws.reserve(static_cast<std::size_t>(state.k()));
    for (int j = 0; j < state.k(); ++j)
        draws.push_back(RademacherDraw::generate(
            data.size(), split_seed(seed, static_cast<std::uint64_t>(state.iteration),
                                    static_cast<std::uint64_t>(j))));
    return em_step_with_draws(state, data, p_norm, draws);
}

ClusteringResult run_clustering(const OperatorSample& data, int k, int max_iter, double tol,
                                double p_norm, std::uint64_t seed)
{
    if (max_iter < 1)
        throw std::invalid_argument("run_clustering: max_iter must be >= 1");

    ClusteringResult result;
    ClusterState state = init_state(data.size(), k, split_seed(seed, 0x1417ULL));
    for (int t = 0; t < max_iter; ++t) {
        ClusterState next = em_step(state, data, p_norm, seed);
        IterationSummary summary;
        summary.iteration = next.iteration;
        summary.max_rho_change = (next.rho - state.rho).cwiseAbs().maxCoeff();
        summary.tau = next.tau;
        summary.reseeded = static_cast<int>(next.reseeds.size() - state.reseeds.size());
        result.trace.push_back(summary);
        state = std::move(next);
        if (result.trace.back().max_rho_change < tol) {
            result.converged = true;
            break;
        }
    }

    result.assignments.resize(static_cast<std::size_t>(data.size()));
    for (int i = 0; i < data.size(); ++i) {
        Eigen::Index best;
        state.rho.row(i).maxCoeff(&best);
        result.assignments[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    result.state = std::move(state);
    return result;
}

} // namespace fcov
