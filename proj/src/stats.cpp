#include "fcov/stats.hpp"

#include <cmath>

namespace fcov {

FunctionalSample::FunctionalSample(Grid g, std::vector<Curve> c, std::optional<std::string> l)
    : grid(std::move(g)), curves(std::move(c)), label(std::move(l))
{
    if (curves.empty())
        throw std::invalid_argument("FunctionalSample: empty sample");
    for (const Curve& f : curves)
        require_same_grid(grid, f.grid, "FunctionalSample");
}

OperatorSample::OperatorSample(Grid g, std::vector<CovOperator> ops, std::vector<int> r,
                               std::optional<std::string> l)
    : grid(std::move(g)), operators(std::move(ops)), ranks(std::move(r)), label(std::move(l))
{
    if (operators.empty())
        throw std::invalid_argument("OperatorSample: empty sample");
    if (ranks.size() != operators.size())
        throw std::invalid_argument("OperatorSample: ranks/operators length mismatch");
    for (const CovOperator& s : operators)
        require_same_grid(grid, s.grid(), "OperatorSample");
    for (int m : ranks)
        if (m < 1)
            throw std::invalid_argument("OperatorSample: ranks must be positive");
}

Curve sample_mean(const FunctionalSample& s)
{
    const int d = s.dim();
    const int n = s.size();
    Eigen::VectorXd mean(d);
    for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += s.curves[static_cast<std::size_t>(i)].values[j];
        mean[j] = acc / n;
    }
    return Curve(s.grid, std::move(mean));
}

namespace {

// Rows of D are the (optionally centered) curves.
Eigen::MatrixXd deviation_matrix(const FunctionalSample& s, bool center)
{
    const int d = s.dim();
    const int n = s.size();
    Eigen::MatrixXd dev(n, d);
    for (int i = 0; i < n; ++i)
        dev.row(i) = s.curves[static_cast<std::size_t>(i)].values.transpose();
    if (center) {
        const Curve mean = sample_mean(s);
        dev.rowwise() -= mean.values.transpose();
    }
    return dev;
}

Eigen::MatrixXd second_moment_kernel(const Eigen::MatrixXd& dev)
{
    const int n = static_cast<int>(dev.rows());
    const int d = static_cast<int>(dev.cols());
    Eigen::MatrixXd k(d, d);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < d; ++j) {
        for (int l = j; l < d; ++l) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += dev(i, j) * dev(i, l);
            acc /= n;
            k(j, l) = acc;
            k(l, j) = acc;
        }
    }
    return k;
}

} // namespace

CovOperator empirical_covariance(const FunctionalSample& s, bool center)
{
    return CovOperator(s.grid, second_moment_kernel(deviation_matrix(s, center)));
}

CovOperator rademacher_average(const FunctionalSample& s, const RademacherDraw& draw)
{
    const int n = s.size();
    const int d = s.dim();
    if (static_cast<int>(draw.signs.size()) != n)
        throw std::invalid_argument("rademacher_average: draw length does not match sample size");

    const Eigen::MatrixXd dev = deviation_matrix(s, true);
    const Eigen::MatrixXd sigma = second_moment_kernel(dev);

    double sign_sum = 0.0;
    for (double e : draw.signs)
        sign_sum += e;
    const double sign_mean = sign_sum / n;

    // n^{-1} sum_i eps_i dev_i dev_i^T  -  (n^{-1} sum_i eps_i) Sigma_hat;
    // written this way the all-plus draw cancels exactly.
    Eigen::MatrixXd k(d, d);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < d; ++j) {
        for (int l = j; l < d; ++l) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += draw.signs[static_cast<std::size_t>(i)] * dev(i, j) * dev(i, l);
            const double v = acc / n - sign_mean * sigma(j, l);
            k(j, l) = v;
            k(l, j) = v;
        }
    }
    return CovOperator(s.grid, std::move(k));
}

double rademacher_norm_estimate(const FunctionalSample& s, double p, int n_draws,
                                std::uint64_t seed)
{
    if (n_draws < 1)
        throw std::invalid_argument("rademacher_norm_estimate: n_draws must be >= 1");
    const int n = s.size();
    std::vector<double> norms(static_cast<std::size_t>(n_draws));
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < n_draws; ++t) {
        const RademacherDraw draw = RademacherDraw::generate(n, split_seed(seed, static_cast<std::uint64_t>(t)));
        norms[static_cast<std::size_t>(t)] = schatten_norm(rademacher_average(s, draw), p);
    }
    double acc = 0.0;
    for (double v : norms)
        acc += v;
    return acc / n_draws;
}

double weak_variance_gaussian(const CovOperator& sigma, double p)
{
    return std::sqrt(2.0) * schatten_norm(sigma, p);
}

double weak_variance_empirical(const FunctionalSample& s, double p)
{
    if (s.size() < 2)
        throw std::invalid_argument("weak_variance_empirical: need at least 2 curves");
    const double centered = schatten_norm(empirical_covariance(s, true), p);
    // A degenerate (all-identical) sample must come out as exactly zero,
    // not as accumulation noise; compare against the raw second moment.
    const double raw = schatten_norm(empirical_covariance(s, false), p);
    if (centered <= 1e-14 * raw)
        return 0.0;
    return std::sqrt(centered);
}

double pooled_weak_variance(const std::vector<double>& sigmas, const std::vector<int>& counts)
{
    if (sigmas.empty() || sigmas.size() != counts.size())
        throw std::invalid_argument("pooled_weak_variance: empty or mismatched inputs");
    double num = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (counts[i] < 1)
            throw std::invalid_argument("pooled_weak_variance: counts must be >= 1");
        num += counts[i] * sigmas[i] * sigmas[i];
        total += counts[i];
    }
    return num / total;
}

CovOperator group_covariance(const FunctionalSample& s, bool center)
{
    return empirical_covariance(s, center);
}

} // namespace fcov
