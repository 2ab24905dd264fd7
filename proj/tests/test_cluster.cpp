#include <doctest.h>

#include "fcov/classify.hpp"
#include "fcov/cluster.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numeric>

using namespace fcov;
using namespace fcov::testing;

TEST_SUITE_BEGIN("cluster");

namespace {

// n rank-m observations per class, classes defined by random operators
// sharing one spectrum.
OperatorSample mixture_data(const Grid& grid, int classes, int per_class, int rank,
                            std::uint64_t seed, std::vector<int>* truth = nullptr)
{
    std::vector<CovOperator> ops;
    std::vector<int> ranks;
    for (int c = 0; c < classes; ++c) {
        const CovOperator sigma =
            random_covariance(DecaySpec{grid.size(), 4.0, 1.0}, grid, split_seed(seed, static_cast<std::uint64_t>(c)));
        for (int i = 0; i < per_class; ++i) {
            ops.push_back(rank_m_observation(sigma, rank, split_seed(seed, c + 10, static_cast<std::uint64_t>(i))));
            ranks.push_back(rank);
            if (truth)
                truth->push_back(c);
        }
    }
    return OperatorSample(grid, std::move(ops), std::move(ranks));
}

Eigen::VectorXd plain_column_means(const Eigen::MatrixXd& m)
{
    Eigen::VectorXd out(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            acc += m(i, j);
        out[j] = acc / static_cast<double>(m.rows());
    }
    return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b)
{
    const int n = static_cast<int>(a.size());
    const int ka = 1 + *std::max_element(a.begin(), a.end());
    const int kb = 1 + *std::max_element(b.begin(), b.end());
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(ka, kb);
    for (int i = 0; i < n; ++i)
        table(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)]) += 1.0;
    const auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (int i = 0; i < ka; ++i)
        sum_rows += choose2(table.row(i).sum());
    for (int j = 0; j < kb; ++j)
        sum_cols += choose2(table.col(j).sum());
    for (int i = 0; i < ka; ++i)
        for (int j = 0; j < kb; ++j)
            sum_cells += choose2(table(i, j));
    const double expected = sum_rows * sum_cols / choose2(static_cast<double>(n));
    const double max_index = 0.5 * (sum_rows + sum_cols);
    return (sum_cells - expected) / (max_index - expected);
}

} // namespace

TEST_CASE("init_state: degenerate single cluster")
{
    const ClusterState state = init_state(7, 1, 3);
    CHECK(state.rho.rows() == 7);
    CHECK((state.rho.array() == 1.0).all());
    CHECK(state.tau[0] == 1.0);
}

TEST_CASE("init_state rows live on the simplex")
{
    const ClusterState state = init_state(200, 4, 5);
    for (int i = 0; i < 200; ++i) {
        CHECK(std::abs(state.rho.row(i).sum() - 1.0) <= 1e-12);
        CHECK(state.rho.row(i).minCoeff() >= 0.0);
    }
    CHECK(std::abs(state.tau.sum() - 1.0) <= 1e-12);
    CHECK((state.tau - plain_column_means(state.rho)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("init_state entries average to 1/k over many draws")
{
    const int k = 3;
    const int n = 10000;
    const ClusterState state = init_state(n, k, 7);
    // Dirichlet(1/2,...): each coordinate is Beta(1/2, (k-1)/2)
    const double var = (0.5 * 1.0) / ((1.5 * 1.5) * 2.5);
    const double se = std::sqrt(var / n);
    for (int j = 0; j < k; ++j)
        CHECK(std::abs(state.tau[j] - 1.0 / k) <= 3.0 * se);
}

TEST_CASE("init_state rejects k above n")
{
    CHECK_THROWS_AS(init_state(3, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(init_state(3, 0, 1), std::invalid_argument);
}

TEST_CASE("single-cluster EM keeps rho at one and averages the data")
{
    const Grid grid = Grid::uniform(8);
    const OperatorSample data = mixture_data(grid, 1, 12, 4, 11);
    const ClusterState state = init_state(12, 1, 13);
    const ClusterState next = em_step(state, data, 1.0, 17);
    CHECK((next.rho.array() == 1.0).all());

    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(8, 8);
    for (const CovOperator& s : data.operators)
        mean += s.kernel();
    mean /= 12.0;
    CHECK((next.sigmas[0].kernel() - mean).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("tau equals the column means of rho exactly")
{
    const Grid grid = Grid::uniform(6);
    const OperatorSample data = mixture_data(grid, 3, 10, 4, 19);
    ClusterState state = init_state(30, 3, 23);
    for (int t = 0; t < 3; ++t) {
        const Eigen::VectorXd mixing = state.tau; // the weights this step pools with
        state = em_step(state, data, 1.0, 29);
        CHECK((state.tau - plain_column_means(state.rho)).cwiseAbs().maxCoeff() == 0.0);
        CHECK(std::abs(state.tau.sum() - 1.0) <= 1e-12);
        for (int i = 0; i < 30; ++i)
            CHECK(std::abs(state.rho.row(i).sum() - 1.0) <= 1e-12);
        // pooled operator is the mixing-weighted mean of the cluster operators
        Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(6, 6);
        for (int j = 0; j < 3; ++j)
            pooled += mixing[j] * state.sigmas[static_cast<std::size_t>(j)].kernel();
        CHECK(rel_err(state.sigma_pool,
                      weak_variance_gaussian(CovOperator(grid, pooled), 1.0)) <= 1e-10);
        // cluster operators stay symmetric PSD up to clipping tolerance
        for (int j = 0; j < 3; ++j) {
            const Eigen::VectorXd& spec = state.sigmas[static_cast<std::size_t>(j)].spectrum();
            CHECK(spec.minCoeff() >= -1e-8 * std::max(spec.maxCoeff(), 0.0));
        }
    }
}

TEST_CASE("one-hot responsibilities reduce to per-cluster means")
{
    const Grid grid = Grid::uniform(6);
    std::vector<int> truth;
    const OperatorSample data = mixture_data(grid, 2, 8, 4, 31, &truth);
    ClusterState state = init_state(16, 2, 37);
    state.rho.setZero();
    for (int i = 0; i < 16; ++i)
        state.rho(i, truth[static_cast<std::size_t>(i)]) = 1.0;
    state.tau = plain_column_means(state.rho);

    const ClusterState next = em_step(state, data, 1.0, 41);
    for (int j = 0; j < 2; ++j) {
        Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(6, 6);
        int count = 0;
        for (int i = 0; i < 16; ++i) {
            if (truth[static_cast<std::size_t>(i)] == j) {
                mean += data.operators[static_cast<std::size_t>(i)].kernel();
                ++count;
            }
        }
        mean /= count;
        CHECK((next.sigmas[static_cast<std::size_t>(j)].kernel() - mean).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("hard-assignment EM step reproduces the classifier training summaries")
{
    const Grid grid = Grid::uniform(8);
    std::vector<int> truth;
    const OperatorSample data = mixture_data(grid, 2, 9, 4, 43, &truth);
    const int n = data.size();
    const double p = 1.0;

    ClusterState state = init_state(n, 2, 47);
    state.rho.setZero();
    for (int i = 0; i < n; ++i)
        state.rho(i, truth[static_cast<std::size_t>(i)]) = 1.0;
    state.tau = plain_column_means(state.rho);

    const std::uint64_t master = 53;
    const ClusterState next = em_step(state, data, p, master);

    // classifier trained on the induced hard partition, with the member
    // sub-sequences of the very same per-cluster sign draws
    std::vector<OperatorSample> partition;
    std::vector<RademacherDraw> member_draws;
    for (int j = 0; j < 2; ++j) {
        const RademacherDraw full = RademacherDraw::generate(
            n, split_seed(master, static_cast<std::uint64_t>(state.iteration), static_cast<std::uint64_t>(j)));
        std::vector<CovOperator> ops;
        std::vector<int> ranks;
        RademacherDraw sub;
        for (int i = 0; i < n; ++i) {
            if (truth[static_cast<std::size_t>(i)] == j) {
                ops.push_back(data.operators[static_cast<std::size_t>(i)]);
                ranks.push_back(data.ranks[static_cast<std::size_t>(i)]);
                sub.signs.push_back(full.signs[static_cast<std::size_t>(i)]);
            }
        }
        partition.emplace_back(grid, std::move(ops), std::move(ranks), std::to_string(j));
        member_draws.push_back(std::move(sub));
    }
    const TrainedClassifier c = train_with_draws(partition, p, member_draws);

    for (int j = 0; j < 2; ++j) {
        CHECK((next.sigmas[static_cast<std::size_t>(j)].kernel() -
               c.labels[static_cast<std::size_t>(j)].mean_operator->kernel())
                  .cwiseAbs()
                  .maxCoeff() <= 1e-10);
        CHECK(std::abs(next.rademacher_norms[j] - c.labels[static_cast<std::size_t>(j)].rademacher_norm) <= 1e-10);
    }
}

TEST_CASE("permuting clusters and their draws permutes the state")
{
    const Grid grid = Grid::uniform(6);
    const OperatorSample data = mixture_data(grid, 3, 7, 4, 59);
    const int n = data.size();
    ClusterState state = init_state(n, 3, 61);

    std::vector<RademacherDraw> draws;
    for (int j = 0; j < 3; ++j)
        draws.push_back(RademacherDraw::generate(n, split_seed(67, static_cast<std::uint64_t>(j))));
    const ClusterState base = em_step_with_draws(state, data, 1.0, draws);

    const std::vector<int> perm = {2, 0, 1}; // column j of the permuted run = column perm[j] of base
    ClusterState permuted = state;
    std::vector<RademacherDraw> pdraws(3);
    for (int j = 0; j < 3; ++j) {
        permuted.rho.col(j) = state.rho.col(perm[static_cast<std::size_t>(j)]);
        pdraws[static_cast<std::size_t>(j)] = draws[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
    }
    permuted.tau = plain_column_means(permuted.rho);
    const ClusterState next = em_step_with_draws(permuted, data, 1.0, pdraws);

    for (int j = 0; j < 3; ++j) {
        CHECK((next.sigmas[static_cast<std::size_t>(j)].kernel() -
               base.sigmas[static_cast<std::size_t>(static_cast<std::size_t>(perm[static_cast<std::size_t>(j)]))].kernel())
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
        CHECK(next.rademacher_norms[j] == base.rademacher_norms[perm[static_cast<std::size_t>(j)]]);
        CHECK((next.rho.col(j) - base.rho.col(perm[static_cast<std::size_t>(j)])).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK(rel_err(next.sigma_pool, base.sigma_pool) <= 1e-12);
}

TEST_CASE("an empty cluster is reseeded from the farthest point")
{
    const Grid grid = Grid::uniform(6);
    const OperatorSample data = mixture_data(grid, 2, 6, 4, 71);
    ClusterState state = init_state(12, 3, 73);
    state.rho.col(2).setZero();
    // renormalize rows over the two surviving clusters
    for (int i = 0; i < 12; ++i)
        state.rho.row(i) /= state.rho.row(i).sum();
    state.tau = plain_column_means(state.rho);

    const ClusterState next = em_step(state, data, 1.0, 79);
    REQUIRE(next.reseeds.size() == 1);
    CHECK(next.reseeds[0].cluster == 2);
    const int point = next.reseeds[0].point;
    CHECK((next.sigmas[2].kernel() - data.operators[static_cast<std::size_t>(point)].kernel())
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("k = n with zero tolerance terminates after one iteration")
{
    const Grid grid = Grid::uniform(6);
    const OperatorSample data = mixture_data(grid, 1, 5, 4, 83);
    const ClusteringResult result = run_clustering(data, 5, 1, 0.0, 1.0, 89);
    CHECK(result.state.iteration == 1);
    CHECK(result.assignments.size() == 5);
    for (int i = 0; i < 5; ++i)
        CHECK(std::abs(result.state.rho.row(i).sum() - 1.0) <= 1e-12);
}

TEST_CASE("three separated classes are recovered at desk scale")
{
    const Grid grid = Grid::uniform(16);
    std::vector<int> truth;
    const OperatorSample data = mixture_data(grid, 3, 60, 4, 97, &truth);
    const ClusteringResult result = run_clustering(data, 3, 15, 1e-6, 1.0, 101);
    CHECK(adjusted_rand_index(truth, result.assignments) >= 0.9);
}

TEST_CASE("run_clustering validates max_iter")
{
    const Grid grid = Grid::uniform(6);
    const OperatorSample data = mixture_data(grid, 1, 5, 4, 103);
    CHECK_THROWS_AS(run_clustering(data, 2, 0, 1e-6, 1.0, 1), std::invalid_argument);
}

TEST_SUITE_END();
