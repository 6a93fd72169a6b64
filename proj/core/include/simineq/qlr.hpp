#pragma once

#include <cstddef>

#include "simineq/moment_core.hpp"

namespace simineq {

//! Optimizer of max_{u >= 0} m'u - (c/4) u' Sigma u.
struct QlrSolution
{
    double value = 0;
    Vector u;
    double kkt_residual = 0;
    std::size_t iterations = 0;
    bool enumerated = false;  //!< solved by exhaustive active-set search
};

/*!
 * Solve the nonnegatively constrained concave quadratic program
 *
 *   max_{u >= 0}  m'u - (c/4) u' Sigma u,   c = `curvature` >= 1.
 *
 * With c = 1 the optimum equals min_{t <= 0} (m - t)' Sigma^-1 (m - t); with
 * c = 1 + 2 mu it is the smoothed statistic. Dimensions up to
 * `enumeration_limit` are solved by exhaustive active-set search; larger ones
 * by accelerated projected gradient followed by an active-set polish.
 *
 * Throws ConditioningError when Sigma is not numerically positive definite.
 */
QlrSolution solve_qlr_dual(Vector const& m,
                           Matrix const& sigma,
                           double curvature = 1.0,
                           std::size_t enumeration_limit = 12);

//! Squared Mahalanobis distance from m to the nonpositive orthant.
double qlr_distance(Vector const& m, Matrix const& sigma);

}  // namespace simineq
