#include "fcov/reference.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace fcov::reference {

double inner_product(const Curve& f, const Curve& g)
{
    require_same_grid(f.grid, g.grid, "reference::inner_product");
    double acc = 0.0;
    for (int i = 0; i < f.grid.size(); ++i)
        acc += f.values[i] * g.values[i] * f.grid.weights()[i];
    return acc;
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

CovOperator empirical_covariance(const FunctionalSample& s, bool center)
{
    const int d = s.dim();
    const int n = s.size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    if (center)
        mean = reference::sample_mean(s).values;

    Eigen::MatrixXd dev(n, d);
    for (int i = 0; i < n; ++i)
        dev.row(i) = (s.curves[static_cast<std::size_t>(i)].values - mean).transpose();

    Eigen::MatrixXd k(d, d);
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
    return CovOperator(s.grid, std::move(k));
}

CovOperator rademacher_average(const FunctionalSample& s, const RademacherDraw& draw)
{
    const int n = s.size();
    const int d = s.dim();
    if (static_cast<int>(draw.signs.size()) != n)
        throw std::invalid_argument("reference::rademacher_average: draw length mismatch");

    const Eigen::VectorXd mean = reference::sample_mean(s).values;
    Eigen::MatrixXd dev(n, d);
    for (int i = 0; i < n; ++i)
        dev.row(i) = (s.curves[static_cast<std::size_t>(i)].values - mean).transpose();

    Eigen::MatrixXd sigma(d, d);
    for (int j = 0; j < d; ++j) {
        for (int l = j; l < d; ++l) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += dev(i, j) * dev(i, l);
            acc /= n;
            sigma(j, l) = acc;
            sigma(l, j) = acc;
        }
    }

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
        throw std::invalid_argument("reference::rademacher_norm_estimate: n_draws must be >= 1");
    std::vector<double> norms(static_cast<std::size_t>(n_draws));
    for (int t = 0; t < n_draws; ++t) {
        const RademacherDraw draw =
            RademacherDraw::generate(s.size(), split_seed(seed, static_cast<std::uint64_t>(t)));
        norms[static_cast<std::size_t>(t)] = schatten_norm(reference::rademacher_average(s, draw), p);
    }
    double acc = 0.0;
    for (double v : norms)
        acc += v;
    return acc / n_draws;
}

FunctionalSample sample_gaussian(const CovOperator& s, int n, std::uint64_t seed)
{
    if (n < 1)
        throw std::invalid_argument("reference::sample_gaussian: n must be >= 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.weighted());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue computation failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double lmax = std::max(0.0, ev.maxCoeff());
    Eigen::VectorXd sqrt_lambda(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < -kPsdClipTol * lmax)
            throw std::invalid_argument("reference::sample_gaussian: operator is not PSD");
        sqrt_lambda[i] = std::sqrt(std::max(0.0, ev[i]));
    }
    const Eigen::MatrixXd modes = s.grid().inv_sqrt_weights().asDiagonal() * es.eigenvectors();

    const int d = s.dim();
    std::vector<Curve> curves;
    curves.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto eng = make_engine(split_seed(seed, static_cast<std::uint64_t>(i)));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::VectorXd f = Eigen::VectorXd::Zero(d);
        for (Eigen::Index k = 0; k < sqrt_lambda.size(); ++k) {
            const double z = gauss(eng);
            if (sqrt_lambda[k] != 0.0)
                f += (sqrt_lambda[k] * z) * modes.col(k);
        }
        curves.emplace_back(s.grid(), std::move(f));
    }
    return FunctionalSample(s.grid(), std::move(curves));
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
        throw std::invalid_argument("reference::responsibilities: sigma_pool must be positive");

    Eigen::MatrixXd rho(n, k);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd logp(k);
        for (int j = 0; j < k; ++j) {
            const double dist = schatten_distance(data.operators[static_cast<std::size_t>(i)],
                                                  sigmas[static_cast<std::size_t>(j)], p_norm);
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

double schatten_norm_svd(const CovOperator& s, double p)
{
    if (!(p >= 1.0))
        throw std::invalid_argument("reference::schatten_norm_svd: p must be >= 1");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.weighted());
    const Eigen::VectorXd& sv = svd.singularValues();
    if (std::isinf(p))
        return sv.size() > 0 ? sv.maxCoeff() : 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        acc += std::pow(sv[i], p);
    return std::pow(acc, 1.0 / p);
}

double weak_variance_empirical(const FunctionalSample& s, double p)
{
    if (s.size() < 2)
        throw std::invalid_argument("reference::weak_variance_empirical: need at least 2 curves");
    // n^{-1} sum f^(x)2 - fbar^(x)2, assembled directly from the display
    const int d = s.dim();
    const int n = s.size();
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    for (const Curve& f : s.curves)
        second += f.values * f.values.transpose();
    second /= n;
    const Eigen::VectorXd mean = reference::sample_mean(s).values;
    const Eigen::MatrixXd display = second - mean * mean.transpose();
    return std::sqrt(schatten_norm_svd(CovOperator(s.grid, display), p));
}

double pooled_weak_variance(const std::vector<double>& sigmas, const std::vector<int>& counts)
{
    if (sigmas.empty() || sigmas.size() != counts.size())
        throw std::invalid_argument("reference::pooled_weak_variance: bad inputs");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        num += counts[i] * sigmas[i] * sigmas[i];
        den += counts[i];
    }
    return num / den;
}

double procrustes_bruteforce_2x2(const CovOperator& s1, const CovOperator& s2, int n_angles)
{
    require_same_grid(s1.grid(), s2.grid(), "reference::procrustes_bruteforce_2x2");
    if (s1.dim() != 2)
        throw std::invalid_argument("reference::procrustes_bruteforce_2x2: d must be 2");

    const auto sqrt_of = [](const CovOperator& s) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.weighted(), Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::VectorXd sv = svd.singularValues();
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            sv[i] = std::sqrt(sv[i]);
        return Eigen::MatrixXd(svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose());
    };
    const Eigen::MatrixXd r1 = sqrt_of(s1);
    const Eigen::MatrixXd r2 = sqrt_of(s2);

    double best = std::numeric_limits<double>::infinity();
    const double pi = std::acos(-1.0);
    for (int a = 0; a < n_angles; ++a) {
        const double theta = 2.0 * pi * a / n_angles;
        Eigen::Matrix2d rot;
        rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
        Eigen::Matrix2d refl = rot;
        refl.col(1) = -refl.col(1);
        best = std::min(best, (r1 - r2 * rot).squaredNorm());
        best = std::min(best, (r1 - r2 * refl).squaredNorm());
    }
    return std::sqrt(std::max(0.0, best));
}

} // namespace fcov::reference
