#pragma once

#include <cstddef>
#include <optional>

#include "simineq/moment_core.hpp"

namespace simineq {

/*!
 * J upper-bound restrictions theta - E[1{u_j < X_j}] <= 0 with X and u
 * independent J-dimensional standard normals.
 *
 * Records hold [X_1..X_J] or, with a first stage, [X_1..X_J, g_1..g_J] where
 * g_j is the estimated location of the j-th prediction function
 * F_j(x) = Phi(x - gamma_j) (true gamma_j = 0).
 */
struct IntersectionConfig
{
    std::size_t J = 2;
    std::size_t n = 100;
    std::size_t slack_count = 0;  //!< leading moments whose X_j is shifted
    double slack_shift = 0;       //!< mean shift of the slack columns
    std::optional<std::size_t> first_stage;  //!< auxiliary sample size N1

    //! Design with the first floor(J/5) moments shifted up by 1/sqrt(n).
    static IntersectionConfig slack_design(std::size_t J, std::size_t n);

    std::size_t width() const { return first_stage ? 2 * J : J; }
};

Dataset gen_intersection_data(IntersectionConfig const& cfg,
                              Stream const& stream);

//! Kernel theta - 1{u_j < X_j - g_j}; analytic moment theta - Phi(X_j - g_j).
//! Includes an exact binomial sampler for R-draw averages.
MomentModel intersection_moment_model(IntersectionConfig const& cfg);

//! 1 - alpha quantile of the max of J independent N(0, 1/12) variables.
double naive_critical_value(std::size_t J, double alpha);

//! Monte Carlo version of the same quantile from `draws` simulated maxima.
double naive_critical_value_simulated(std::size_t J,
                                       double alpha,
                                       std::size_t draws,
                                       Stream const& stream);

//! Upper endpoint of the identified set (the smallest E[Phi(X_j)]); the
//! first stage does not change it since the true gamma is 0.
double intersection_upper_bound(IntersectionConfig const& cfg);

}  // namespace simineq
