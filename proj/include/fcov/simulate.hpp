#pragma once

#include "fcov/stats.hpp"

namespace fcov {

// Prescribed eigenvalue decay lambda_m = scale * m^{-exponent}.
struct DecaySpec {
    int dimension = 16;
    double exponent = 4.0;
    double scale = 1.0;

    Eigen::VectorXd spectrum() const;
    void validate() const;
};

// U diag(lambda) U^T with U a Haar-random basis, orthonormal with respect
// to the quadrature inner product. The output spectrum equals lambda.
CovOperator random_covariance(const DecaySpec& spec, const Grid& grid, std::uint64_t seed);

// Karhunen-Loeve sampler: f = sum_m sqrt(lambda_m) z_m e_m over the
// spectral decomposition of s, z_m iid standard normal. Curve i uses the
// stream derived from (seed, i).
FunctionalSample sample_gaussian(const CovOperator& s, int n, std::uint64_t seed);

// f = Z / sqrt(V/nu) with Z Gaussian of covariance ((nu-2)/nu) s and
// V ~ chi^2_nu per curve, so the process covariance is s. Shares the
// Gaussian z streams of sample_gaussian(s, n, seed); the chi-square draws
// come from the auxiliary stream (seed, kTScaleStream, i).
FunctionalSample sample_t_process(const CovOperator& s, double nu, int n, std::uint64_t seed);

inline constexpr std::uint64_t kTScaleStream = 0x7C0FFEE5ULL;

// Fixed synthetic stand-ins for a pair of real-data covariance operators
// with similar eigenvalue decay (used by the classification experiments).
std::pair<CovOperator, CovOperator> similar_decay_pair(const Grid& grid);

// Averages two operators and inflates every non-principal eigenvalue,
// producing a third class "between" them but with higher variance.
CovOperator scale_non_principal(const CovOperator& s, double factor);

} // namespace fcov
