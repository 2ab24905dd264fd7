#pragma once

#include "fcov/operators.hpp"

namespace fcov {

// Inputs to the closed-form confidence radii. u_bound defaults to sigma,
// which works well for Gaussian-like data; override it when the curves
// carry a genuine norm bound.
struct RadiusParams {
    int n = 0;
    double rademacher_norm = 0.0;
    double sigma = 0.0;
    double u_bound = -1.0; // < 0 means "use sigma"
    double alpha = 0.05;

    double u() const { return u_bound < 0.0 ? sigma : u_bound; }
    void validate() const;
};

// r = ||R_n|| + sqrt((2/n) L (sigma^2 + 2 U ||R_n||)) + U L / (3n),
// L = -log(2 alpha). Equals ||R_n|| at alpha = 1/2.
double confidence_radius_general(const RadiusParams& p);

// Covariance specialization with U = sigma folded in:
// r = ||R_n|| + sigma sqrt(2L/n) + sigma L / (3n).
double confidence_radius_covariance(const RadiusParams& p);

// ||S_hat - S||_p <= radius on a common grid.
bool membership(const CovOperator& s_hat, const CovOperator& s, double p_norm, double radius);

} // namespace fcov
