#pragma once

#include "fcov/grid.hpp"

#include <limits>
#include <memory>
#include <mutex>

namespace fcov {

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

// Relative threshold below which negative eigenvalues of an empirical
// covariance are treated as roundoff and clipped.
inline constexpr double kPsdClipTol = 1e-8;

// A symmetric kernel matrix representing an integral operator on L2(I).
// All spectral quantities refer to the weighted matrix
// A = W^{1/2} K W^{1/2} so that Schatten norms are consistent with the
// quadrature inner product. Immutable after construction; the spectrum is
// computed once on first access and cached.
class CovOperator {
public:
    CovOperator(Grid grid, Eigen::MatrixXd kernel);

    const Grid& grid() const { return payload_->grid; }
    const Eigen::MatrixXd& kernel() const { return payload_->kernel; }
    int dim() const { return static_cast<int>(payload_->kernel.rows()); }

    // W^{1/2} K W^{1/2}, the matrix of the operator in orthonormal coordinates.
    Eigen::MatrixXd weighted() const;

    // Eigenvalues of the weighted matrix, sorted descending. Computed once
    // and cached; returned by value so temporaries are safe.
    Eigen::VectorXd spectrum() const;

    // Operator trace, tr(W^{1/2} K W^{1/2}) = sum_i K_ii w_i.
    double trace() const;

    static CovOperator from_weighted(const Grid& grid, const Eigen::MatrixXd& weighted);
    static CovOperator zero(const Grid& grid);

private:
    struct Payload {
        Grid grid;
        Eigen::MatrixXd kernel;
        mutable std::once_flag spectrum_once;
        mutable Eigen::VectorXd spectrum;
        explicit Payload(Grid g) : grid(std::move(g)) {}
    };
    std::shared_ptr<const Payload> payload_;
};

// Rank-one operator f (x) f with kernel f_i f_j.
CovOperator tensor_square(const Curve& f);

// (sum_i |lambda_i|^p)^{1/p}; max |lambda_i| for p = inf. p = 2 uses the
// Frobenius norm of the weighted matrix and needs no eigenvalues.
double schatten_norm(const CovOperator& s, double p);
double schatten_norm_spectrum(const Eigen::VectorXd& spectrum, double p);

CovOperator operator_add(const CovOperator& a, const CovOperator& b);
CovOperator operator_subtract(const CovOperator& a, const CovOperator& b);
CovOperator operator_scale(const CovOperator& a, double c);

// ||a - b||_p on a common grid.
double schatten_distance(const CovOperator& a, const CovOperator& b, double p);

// Symmetric PSD square root: R with R o R = S (composition carries the
// quadrature weight). Eigenvalues in [-tol*lmax, 0) are clipped; anything
// more negative is rejected as not a covariance.
CovOperator operator_sqrt(const CovOperator& s);

// d^2 = tr(S1) + tr(S2) - 2 * nuclear(R2* R1) with R_i = operator_sqrt(S_i),
// clamped at zero before the square root.
double procrustes_distance(const CovOperator& s1, const CovOperator& s2);

// Geodesic-style path through operator square roots: R_gamma =
// R1 + gamma (R2 Q - R1) with Q the Procrustes-optimal orthogonal factor
// (right multiplication, so gamma = 1 recovers s2); returns R_gamma R_gamma*.
CovOperator interpolate(const CovOperator& s1, const CovOperator& s2, double gamma);

} // namespace fcov
