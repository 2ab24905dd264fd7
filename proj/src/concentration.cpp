#include "fcov/concentration.hpp"

#include <cmath>

namespace fcov {

void RadiusParams::validate() const
{
    if (n < 1)
        throw std::invalid_argument("RadiusParams: n must be >= 1");
    if (!(alpha > 0.0 && alpha <= 0.5))
        throw std::invalid_argument("RadiusParams: alpha must be in (0, 1/2]");
    if (!(rademacher_norm >= 0.0) || !std::isfinite(rademacher_norm))
        throw std::invalid_argument("RadiusParams: rademacher_norm must be finite and >= 0");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("RadiusParams: sigma must be finite and >= 0");
    if (u_bound >= 0.0 && !std::isfinite(u_bound))
        throw std::invalid_argument("RadiusParams: u_bound must be finite");
}

double confidence_radius_general(const RadiusParams& p)
{
    p.validate();
    const double L = -std::log(2.0 * p.alpha);
    const double u = p.u();
    const double variance = p.sigma * p.sigma + 2.0 * u * p.rademacher_norm;
    return p.rademacher_norm + std::sqrt((2.0 / p.n) * L * variance) + u * L / (3.0 * p.n);
}

double confidence_radius_covariance(const RadiusParams& p)
{
    p.validate();
    const double L = -std::log(2.0 * p.alpha);
    return p.rademacher_norm + p.sigma * std::sqrt(2.0 * L / p.n) + p.sigma * L / (3.0 * p.n);
}

bool membership(const CovOperator& s_hat, const CovOperator& s, double p_norm, double radius)
{
    require_same_grid(s_hat.grid(), s.grid(), "membership");
    return schatten_distance(s_hat, s, p_norm) <= radius;
}

} // namespace fcov
