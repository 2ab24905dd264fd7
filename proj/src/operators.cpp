#include "fcov/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace fcov {

namespace {

// Eigenvalues of a symmetric matrix, sorted descending.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue computation failed");
    Eigen::VectorXd ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
    return ev;
}

} // namespace

CovOperator::CovOperator(Grid grid, Eigen::MatrixXd kernel)
{
    if (kernel.rows() != kernel.cols())
        throw std::invalid_argument("CovOperator: kernel must be square");
    if (kernel.rows() != grid.size())
        throw std::invalid_argument("CovOperator: kernel dimension does not match grid");
    if (!kernel.allFinite())
        throw std::invalid_argument("CovOperator: kernel must be finite");

    const double scale = kernel.cwiseAbs().maxCoeff();
    const double asym = (kernel - kernel.transpose()).cwiseAbs().maxCoeff();
    if (scale > 0.0 && asym > 1e-10 * scale)
        throw std::invalid_argument("CovOperator: kernel is not symmetric");

    auto p = std::make_shared<Payload>(std::move(grid));
    // symmetrize: floating-point accumulation breaks exact symmetry
    p->kernel = 0.5 * (kernel + kernel.transpose());
    payload_ = std::move(p);
}

Eigen::MatrixXd CovOperator::weighted() const
{
    const Eigen::VectorXd& sw = grid().sqrt_weights();
    return sw.asDiagonal() * kernel() * sw.asDiagonal();
}

Eigen::VectorXd CovOperator::spectrum() const
{
    const Payload& p = *payload_;
    std::call_once(p.spectrum_once, [&p, this] { p.spectrum = symmetric_eigenvalues(weighted()); });
    return p.spectrum;
}

double CovOperator::trace() const
{
    return kernel().diagonal().dot(grid().weights());
}

CovOperator CovOperator::from_weighted(const Grid& grid, const Eigen::MatrixXd& weighted)
{
    const Eigen::VectorXd& isw = grid.inv_sqrt_weights();
    return CovOperator(grid, isw.asDiagonal() * weighted * isw.asDiagonal());
}

CovOperator CovOperator::zero(const Grid& grid)
{
    return CovOperator(grid, Eigen::MatrixXd::Zero(grid.size(), grid.size()));
}

CovOperator tensor_square(const Curve& f)
{
    return CovOperator(f.grid, f.values * f.values.transpose());
}

double schatten_norm_spectrum(const Eigen::VectorXd& spectrum, double p)
{
    if (!(p >= 1.0))
        throw std::invalid_argument("schatten_norm: p must be >= 1");
    if (std::isinf(p))
        return spectrum.cwiseAbs().maxCoeff();
    if (p == 1.0)
        return spectrum.cwiseAbs().sum();
    if (p == 2.0)
        return std::sqrt(spectrum.squaredNorm());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i)
        acc += std::pow(std::abs(spectrum[i]), p);
    return std::pow(acc, 1.0 / p);
}

double schatten_norm(const CovOperator& s, double p)
{
    if (!(p >= 1.0))
        throw std::invalid_argument("schatten_norm: p must be >= 1");
    if (p == 2.0)
        return s.weighted().norm(); // Frobenius; no eigenvalues needed
    return schatten_norm_spectrum(s.spectrum(), p);
}

CovOperator operator_add(const CovOperator& a, const CovOperator& b)
{
    require_same_grid(a.grid(), b.grid(), "operator_add");
    return CovOperator(a.grid(), a.kernel() + b.kernel());
}

CovOperator operator_subtract(const CovOperator& a, const CovOperator& b)
{
    require_same_grid(a.grid(), b.grid(), "operator_subtract");
    return CovOperator(a.grid(), a.kernel() - b.kernel());
}

CovOperator operator_scale(const CovOperator& a, double c)
{
    return CovOperator(a.grid(), c * a.kernel());
}

double schatten_distance(const CovOperator& a, const CovOperator& b, double p)
{
    return schatten_norm(operator_subtract(a, b), p);
}

namespace {

// PSD square root in orthonormal coordinates; clips roundoff negatives.
Eigen::MatrixXd psd_sqrt_weighted(const Eigen::MatrixXd& a, const char* where)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue computation failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double lmax = std::max(0.0, ev.maxCoeff());
    const double floor = -kPsdClipTol * lmax;
    Eigen::VectorXd root(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < floor)
            throw std::invalid_argument(std::string(where) + ": operator has a materially negative eigenvalue, not a covariance");
        root[i] = std::sqrt(std::max(0.0, ev[i]));
    }
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

} // namespace

CovOperator operator_sqrt(const CovOperator& s)
{
    return CovOperator::from_weighted(s.grid(), psd_sqrt_weighted(s.weighted(), "operator_sqrt"));
}

double procrustes_distance(const CovOperator& s1, const CovOperator& s2)
{
    require_same_grid(s1.grid(), s2.grid(), "procrustes_distance");
    const Eigen::MatrixXd r1 = psd_sqrt_weighted(s1.weighted(), "procrustes_distance");
    const Eigen::MatrixXd r2 = psd_sqrt_weighted(s2.weighted(), "procrustes_distance");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r2.transpose() * r1);
    const double nuclear = svd.singularValues().sum();
    const double d2 = s1.trace() + s2.trace() - 2.0 * nuclear;
    return std::sqrt(std::max(0.0, d2));
}

CovOperator interpolate(const CovOperator& s1, const CovOperator& s2, double gamma)
{
    require_same_grid(s1.grid(), s2.grid(), "interpolate");
    if (gamma < 0.0)
        throw std::invalid_argument("interpolate: gamma must be >= 0");
    if (gamma == 0.0)
        return s1; // the path starts at s1 identically
    const Eigen::MatrixXd r1 = psd_sqrt_weighted(s1.weighted(), "interpolate");
    const Eigen::MatrixXd r2 = psd_sqrt_weighted(s2.weighted(), "interpolate");
    // Q = argmin over orthogonal matrices of ||R1 - R2 Q||_F
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r2.transpose() * r1, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd q = svd.matrixU() * svd.matrixV().transpose();
    const Eigen::MatrixXd path = r1 + gamma * (r2 * q - r1);
    return CovOperator::from_weighted(s1.grid(), path * path.transpose());
}

} // namespace fcov
