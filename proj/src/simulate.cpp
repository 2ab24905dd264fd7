#include "fcov/simulate.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>

namespace fcov {

void DecaySpec::validate() const
{
    if (dimension < 1)
        throw std::invalid_argument("DecaySpec: dimension must be >= 1");
    if (!(exponent >= 0.0))
        throw std::invalid_argument("DecaySpec: exponent must be >= 0");
    if (!(scale > 0.0))
        throw std::invalid_argument("DecaySpec: scale must be > 0");
}

Eigen::VectorXd DecaySpec::spectrum() const
{
    validate();
    Eigen::VectorXd ev(dimension);
    for (int m = 0; m < dimension; ++m)
        ev[m] = scale * std::pow(static_cast<double>(m + 1), -exponent);
    return ev;
}

CovOperator random_covariance(const DecaySpec& spec, const Grid& grid, std::uint64_t seed)
{
    spec.validate();
    const int d = grid.size();
    const int m = spec.dimension;
    if (m > d)
        throw std::invalid_argument("random_covariance: dimension exceeds grid size");

    auto eng = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd z(d, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < d; ++i)
            z(i, j) = gauss(eng);

    // Haar-like basis: QR of a Gaussian matrix with the sign fix; columns
    // are orthonormal in the Euclidean metric of the weighted coordinates,
    // hence orthonormal curves under the quadrature inner product.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, m);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    for (int j = 0; j < m; ++j)
        if (r(j, j) < 0.0)
            q.col(j) = -q.col(j);

    const Eigen::VectorXd lambda = spec.spectrum();
    const Eigen::MatrixXd weighted = q * lambda.asDiagonal() * q.transpose();
    return CovOperator::from_weighted(grid, weighted);
}

namespace {

struct SpectralBasis {
    Eigen::VectorXd sqrt_lambda;
    Eigen::MatrixXd modes; // columns are curves, d x m
};

// Eigenpairs of the weighted matrix mapped back to curve space; tiny
// negative eigenvalues are clipped, materially negative ones rejected.
SpectralBasis spectral_basis(const CovOperator& s, const char* where)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.weighted());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue computation failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double lmax = std::max(0.0, ev.maxCoeff());
    SpectralBasis basis;
    basis.sqrt_lambda.resize(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < -kPsdClipTol * lmax)
            throw std::invalid_argument(std::string(where) + ": operator is not PSD");
        basis.sqrt_lambda[i] = std::sqrt(std::max(0.0, ev[i]));
    }
    basis.modes = s.grid().inv_sqrt_weights().asDiagonal() * es.eigenvectors();
    return basis;
}

} // namespace

FunctionalSample sample_gaussian(const CovOperator& s, int n, std::uint64_t seed)
{
    if (n < 1)
        throw std::invalid_argument("sample_gaussian: n must be >= 1");
    const SpectralBasis basis = spectral_basis(s, "sample_gaussian");
    const int d = s.dim();
    const int m = static_cast<int>(basis.sqrt_lambda.size());

    Eigen::MatrixXd values(n, d);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        auto eng = make_engine(split_seed(seed, static_cast<std::uint64_t>(i)));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::VectorXd f = Eigen::VectorXd::Zero(d);
        for (int k = 0; k < m; ++k) {
            const double z = gauss(eng);
            if (basis.sqrt_lambda[k] != 0.0)
                f += (basis.sqrt_lambda[k] * z) * basis.modes.col(k);
        }
        values.row(i) = f.transpose();
    }

    std::vector<Curve> curves;
    curves.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        curves.emplace_back(s.grid(), values.row(i).transpose());
    return FunctionalSample(s.grid(), std::move(curves));
}

FunctionalSample sample_t_process(const CovOperator& s, double nu, int n, std::uint64_t seed)
{
    if (!(nu > 2.0))
        throw std::invalid_argument("sample_t_process: nu must be > 2 for the covariance to exist");
    FunctionalSample gauss = sample_gaussian(s, n, seed);
    std::vector<Curve> curves;
    curves.reserve(gauss.curves.size());
    for (int i = 0; i < n; ++i) {
        auto eng = make_engine(split_seed(seed, kTScaleStream, static_cast<std::uint64_t>(i)));
        std::chi_squared_distribution<double> chi2(nu);
        const double v = chi2(eng);
        // Z has covariance ((nu-2)/nu) s, then divide by sqrt(V/nu).
        const double scale = std::sqrt((nu - 2.0) / v);
        curves.emplace_back(gauss.grid, scale * gauss.curves[static_cast<std::size_t>(i)].values);
    }
    return FunctionalSample(gauss.grid, std::move(curves));
}

std::pair<CovOperator, CovOperator> similar_decay_pair(const Grid& grid)
{
    DecaySpec a{grid.size(), 4.0, 1.0};
    DecaySpec b{grid.size(), 3.6, 1.15};
    return {random_covariance(a, grid, 0xB11ULL), random_covariance(b, grid, 0xB22ULL)};
}

CovOperator scale_non_principal(const CovOperator& s, double factor)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.weighted());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue computation failed");
    Eigen::VectorXd ev = es.eigenvalues(); // ascending; principal is last
    for (Eigen::Index i = 0; i + 1 < ev.size(); ++i)
        ev[i] *= factor;
    const Eigen::MatrixXd weighted = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    return CovOperator::from_weighted(s.grid(), weighted);
}

} // namespace fcov
