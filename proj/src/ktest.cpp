#include "fcov/ktest.hpp"

#include "fcov/operators.hpp"
#include "fcov/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace fcov {

namespace {

using clock_type = std::chrono::steady_clock;

double elapsed_ms_since(clock_type::time_point t0)
{
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

// Per-sample Rademacher average with the pooled covariance subtracted:
// n_i^{-1} sum_j eps_j { (f_j - fbar_i)^(x)2 - pooled }.
Eigen::MatrixXd signed_deviation_kernel(const Eigen::MatrixXd& dev,
                                        const Eigen::MatrixXd& pooled,
                                        const RademacherDraw& draw)
{
    const int n = static_cast<int>(dev.rows());
    const int d = static_cast<int>(dev.cols());
    double sign_sum = 0.0;
    for (double e : draw.signs)
        sign_sum += e;
    const double sign_mean = sign_sum / n;

    Eigen::MatrixXd k(d, d);
    for (int j = 0; j < d; ++j) {
        for (int l = j; l < d; ++l) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += draw.signs[static_cast<std::size_t>(i)] * dev(i, j) * dev(i, l);
            const double v = acc / n - sign_mean * pooled(j, l);
            k(j, l) = v;
            k(l, j) = v;
        }
    }
    return k;
}

Eigen::MatrixXd centered_deviations(const FunctionalSample& s)
{
    const int n = s.size();
    const int d = s.dim();
    Eigen::MatrixXd dev(n, d);
    for (int i = 0; i < n; ++i)
        dev.row(i) = s.curves[static_cast<std::size_t>(i)].values.transpose();
    const Curve mean = sample_mean(s);
    dev.rowwise() -= mean.values.transpose();
    return dev;
}

struct ThresholdParts {
    double rademacher_sum = 0.0; // sum_i ||R^(i)||_p
    double sigma_pool = 0.0;
    double inv_n_sum = 0.0; // sum_i 1/n_i
};

double threshold_from_parts(const ThresholdParts& t, int k, double alpha, bool tuned)
{
    const double L = -std::log(2.0 * alpha);
    const double c_r = tuned ? 1.0 - 1.0 / std::sqrt(static_cast<double>(k)) : 1.0;
    const double c_d = tuned ? (k + 2.0) / (k + 3.0) : 1.0;
    const double deviation = std::sqrt(t.sigma_pool * t.sigma_pool * t.inv_n_sum * 2.0 * L) +
                             t.sigma_pool * t.inv_n_sum * L / 3.0;
    return c_r * t.rademacher_sum + c_d * deviation;
}

} // namespace

KSampleResult k_sample_test(const std::vector<FunctionalSample>& samples, double p_norm,
                            double alpha, bool tuned, std::uint64_t seed,
                            const KTestOptions& options)
{
    const auto t0 = clock_type::now();
    const int k = static_cast<int>(samples.size());
    if (k < 2)
        throw std::invalid_argument("k_sample_test: need at least 2 samples");
    if (!(alpha > 0.0 && alpha <= 0.5))
        throw std::invalid_argument("k_sample_test: alpha must be in (0, 1/2]");
    if (options.n_draws < 1)
        throw std::invalid_argument("k_sample_test: n_draws must be >= 1");
    const Grid& grid = samples.front().grid;
    for (const FunctionalSample& s : samples) {
        require_same_grid(grid, s.grid, "k_sample_test");
        if (s.size() < 2)
            throw std::invalid_argument("k_sample_test: each sample needs at least 2 curves");
    }

    // Pooled covariance over all N curves.
    std::vector<Curve> all;
    for (const FunctionalSample& s : samples)
        all.insert(all.end(), s.curves.begin(), s.curves.end());
    const FunctionalSample pooled_sample(grid, std::move(all));
    const CovOperator pooled = empirical_covariance(pooled_sample, true);

    KSampleResult result;
    result.alpha = alpha;
    result.p_norm = p_norm;
    result.tuned = tuned;

    ThresholdParts parts;
    std::vector<double> sigmas;
    std::vector<int> counts;
    for (int i = 0; i < k; ++i) {
        const FunctionalSample& s = samples[static_cast<std::size_t>(i)];
        const CovOperator sigma_i = empirical_covariance(s, true);
        result.per_sample_norms.push_back(schatten_distance(sigma_i, pooled, p_norm));

        const Eigen::MatrixXd dev = centered_deviations(s);
        double rn = 0.0;
        for (int t = 0; t < options.n_draws; ++t) {
            const RademacherDraw draw = RademacherDraw::generate(
                s.size(), split_seed(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(t)));
            rn += schatten_norm(CovOperator(grid, signed_deviation_kernel(dev, pooled.kernel(), draw)), p_norm);
        }
        parts.rademacher_sum += rn / options.n_draws;

        sigmas.push_back(options.rule == WeakVarianceRule::gaussian
                             ? weak_variance_gaussian(sigma_i, p_norm)
                             : weak_variance_empirical(s, p_norm));
        counts.push_back(s.size());
        parts.inv_n_sum += 1.0 / s.size();
    }
    parts.sigma_pool = std::sqrt(pooled_weak_variance(sigmas, counts));

    result.statistic = std::accumulate(result.per_sample_norms.begin(), result.per_sample_norms.end(), 0.0);
    result.threshold = threshold_from_parts(parts, k, alpha, tuned);
    result.reject = result.statistic > result.threshold;

    // Accept/reject is all the construction gives; report the smallest
    // grid alpha that rejects as a p-value surrogate.
    static const double alpha_grid[] = {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
    result.alpha_star = 1.0;
    for (double a : alpha_grid) {
        if (result.statistic > threshold_from_parts(parts, k, a, tuned)) {
            result.alpha_star = a;
            break;
        }
    }

    result.elapsed_ms = elapsed_ms_since(t0);
    return result;
}

PermutationResult permutation_test_two_sample(const FunctionalSample& a,
                                              const FunctionalSample& b, double p_norm,
                                              int n_perms, std::uint64_t seed)
{
    const auto t0 = clock_type::now();
    require_same_grid(a.grid, b.grid, "permutation_test_two_sample");
    if (n_perms < 1)
        throw std::invalid_argument("permutation_test_two_sample: n_perms must be >= 1");

    const int na = a.size();
    std::vector<Curve> all = a.curves;
    all.insert(all.end(), b.curves.begin(), b.curves.end());
    const int total = static_cast<int>(all.size());

    const auto split_distance = [&](const std::vector<int>& index) {
        std::vector<Curve> ca, cb;
        ca.reserve(static_cast<std::size_t>(na));
        cb.reserve(static_cast<std::size_t>(total - na));
        for (int i = 0; i < total; ++i) {
            if (i < na)
                ca.push_back(all[static_cast<std::size_t>(index[static_cast<std::size_t>(i)])]);
            else
                cb.push_back(all[static_cast<std::size_t>(index[static_cast<std::size_t>(i)])]);
        }
        const CovOperator sa = empirical_covariance(FunctionalSample(a.grid, std::move(ca)), true);
        const CovOperator sb = empirical_covariance(FunctionalSample(a.grid, std::move(cb)), true);
        return schatten_distance(sa, sb, p_norm);
    };

    std::vector<int> index(static_cast<std::size_t>(total));
    std::iota(index.begin(), index.end(), 0);
    PermutationResult result;
    result.statistic = split_distance(index);

    auto eng = make_engine(seed);
    int at_least = 0;
    for (int m = 0; m < n_perms; ++m) {
        std::shuffle(index.begin(), index.end(), eng);
        if (split_distance(index) >= result.statistic)
            ++at_least;
    }
    result.p_value = (1.0 + at_least) / (n_perms + 1.0);
    result.elapsed_ms = elapsed_ms_since(t0);
    return result;
}

std::vector<PowerPoint> power_curve(const CovOperator& sigma1, const CovOperator& sigma2,
                                    const std::vector<double>& gammas, int n, double alpha,
                                    double p_norm, int n_reps, TestMethod method,
                                    std::uint64_t seed, const PowerOptions& options)
{
    if (n < 2)
        throw std::invalid_argument("power_curve: n must be >= 2");
    if (n_reps < 1)
        throw std::invalid_argument("power_curve: n_reps must be >= 1");
    for (double g : gammas)
        if (g < 0.0)
            throw std::invalid_argument("power_curve: gammas must be >= 0");

    std::vector<PowerPoint> points;
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        const CovOperator target = interpolate(sigma1, sigma2, gammas[gi]);
        std::vector<char> rejected(static_cast<std::size_t>(n_reps), 0);
        std::vector<double> elapsed(static_cast<std::size_t>(n_reps), 0.0);

#pragma omp parallel for schedule(dynamic)
        for (int rep = 0; rep < n_reps; ++rep) {
            const std::uint64_t counter =
                static_cast<std::uint64_t>(gi) * static_cast<std::uint64_t>(n_reps) +
                static_cast<std::uint64_t>(rep);
            FunctionalSample sa = sample_gaussian(sigma1, n, split_seed(seed, counter, 0));
            FunctionalSample sb = sample_gaussian(target, n, split_seed(seed, counter, 1));
            const std::uint64_t test_seed = split_seed(seed, counter, 2);
            bool reject = false;
            double ms = 0.0;
            if (method == TestMethod::concentration) {
                KTestOptions kopt;
                kopt.rule = options.rule;
                std::vector<FunctionalSample> pair;
                pair.reserve(2);
                pair.push_back(std::move(sa));
                pair.push_back(std::move(sb));
                const KSampleResult r = k_sample_test(pair, p_norm, alpha, options.tuned, test_seed, kopt);
                reject = r.reject;
                ms = r.elapsed_ms;
            } else {
                const PermutationResult r =
                    permutation_test_two_sample(sa, sb, p_norm, options.n_perms, test_seed);
                reject = r.p_value <= alpha;
                ms = r.elapsed_ms;
            }
            rejected[static_cast<std::size_t>(rep)] = reject ? 1 : 0;
            elapsed[static_cast<std::size_t>(rep)] = ms;
        }

        PowerPoint pt;
        pt.gamma = gammas[gi];
        int hits = 0;
        double ms_sum = 0.0;
        for (int rep = 0; rep < n_reps; ++rep) {
            hits += rejected[static_cast<std::size_t>(rep)];
            ms_sum += elapsed[static_cast<std::size_t>(rep)];
        }
        pt.power = static_cast<double>(hits) / n_reps;
        pt.mean_elapsed_ms = ms_sum / n_reps;
        points.push_back(pt);
    }
    return points;
}

} // namespace fcov
