#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simineq/moment_core.hpp"

namespace simineq {

struct CheckResult
{
    std::string name;
    bool passed = false;
    double worst = 0;  //!< largest violation or error observed
    std::string detail;
};

//! min_{t <= 0} (m - t)' Sigma^-1 (m - t) by enumerating which coordinates
//! of t are at the bound; exponential in J.
double qlr_primal_bruteforce(Vector const& m, Matrix const& sigma);

CheckResult check_approximation_bounds(std::uint64_t seed, std::size_t trials);
CheckResult check_gradients(std::uint64_t seed, std::size_t trials);
CheckResult check_qlr_oracle(std::uint64_t seed, std::size_t trials);
CheckResult check_homogeneity(std::uint64_t seed, std::size_t trials);
CheckResult check_lipschitz(std::uint64_t seed, std::size_t trials);

//! The invariant suite at its standard sizes.
std::vector<CheckResult> run_selfcheck(std::uint64_t seed);

}  // namespace simineq
