#include "simineq/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>

#include "simineq/qlr.hpp"
#include "simineq/random.hpp"
#include "simineq/smooth_index.hpp"

namespace simineq {
namespace {

Vector random_vector(Generator& gen, std::size_t J, double scale)
{
    Vector v(static_cast<Eigen::Index>(J));
    for (auto& x : v)
        x = scale * gen.normal();
    return v;
}

Vector random_variances(Generator& gen, std::size_t J)
{
    Vector v(static_cast<Eigen::Index>(J));
    for (auto& x : v)
        x = 0.2 + 2.0 * gen.uniform();
    return v;
}

//! Random well-conditioned covariance A A' / J + 0.2 I.
Matrix random_covariance(Generator& gen, std::size_t J)
{
    auto const d = static_cast<Eigen::Index>(J);
    Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            a(i, j) = gen.normal();
    Matrix s = a * a.transpose() / static_cast<double>(J);
    s.diagonal().array() += 0.2;
    return s;
}

std::size_t random_size(Generator& gen, std::size_t lo, std::size_t hi)
{
    return lo + static_cast<std::size_t>(gen.below(hi - lo + 1));
}

std::string describe(double worst, double tol)
{
    std::ostringstream os;
    os << "worst " << worst << " (tolerance " << tol << ")";
    return os.str();
}

}  // namespace

double qlr_primal_bruteforce(Vector const& m, Matrix const& sigma)
{
    auto const J = m.size();
    Matrix const P = sigma.inverse();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << J); ++mask)
    {
        // Coordinates in the mask are free (t_j < 0); the rest sit at t_j = 0.
        std::vector<Eigen::Index> free, fixed;
        for (Eigen::Index j = 0; j < J; ++j)
            (mask >> j & 1 ? free : fixed).push_back(j);
        Vector t = Vector::Zero(J);
        if (!free.empty())
        {
            auto const f = static_cast<Eigen::Index>(free.size());
            Matrix pff(f, f);
            Vector rhs = Vector::Zero(f);
            for (Eigen::Index a = 0; a < f; ++a)
            {
                for (Eigen::Index b = 0; b < f; ++b)
                    pff(a, b) = P(free[a], free[b]);
                for (auto c : fixed)
                    rhs[a] += P(free[a], c) * m[c];
            }
            Vector const tf = pff.ldlt().solve(rhs);
            for (Eigen::Index a = 0; a < f; ++a)
                t[free[a]] = m[free[a]] + tf[a];
        }
        if ((t.array() > 0).any())
            continue;
        Vector const r = m - t;
        best = std::min(best, r.dot(P * r));
    }
    return best;
}

CheckResult check_approximation_bounds(std::uint64_t seed, std::size_t trials)
{
    auto gen = Stream(seed).substream(1).generator();
    CheckResult res{"approximation bounds", true, 0, {}};
    double const tol = 1e-12;
    for (std::size_t t = 0; t < trials; ++t)
    {
        std::size_t const J = random_size(gen, 1, 30);
        double const mu = 0.005 + 0.5 * gen.uniform();
        Vector const m = random_vector(gen, J, 1 + 2 * gen.uniform());
        Matrix const sigma = random_variances(gen, J).asDiagonal();
        for (auto kind : {IndexKind::sum_plus, IndexKind::max_plus,
                          IndexKind::soft_min_boundary})
        {
            auto const spec = IndexSpec::make(kind, J);
            double const gap = approximation_gap(spec, m, sigma, mu);
            double const bound = spec.params.beta * mu;
            // Upper approximations lie above S, the soft minimum below it.
            double const violation
                = kind == IndexKind::soft_min_boundary
                      ? std::max(gap, -gap - bound)
                      : std::max(-gap, gap - bound);
            res.worst = std::max(res.worst, violation);
        }
    }
    res.passed = res.worst <= tol;
    res.detail = describe(res.worst, tol);
    return res;
}

CheckResult check_gradients(std::uint64_t seed, std::size_t trials)
{
    auto gen = Stream(seed).substream(2).generator();
    CheckResult res{"gradients vs central differences", true, 0, {}};
    double const tol = 1e-6;
    for (std::size_t t = 0; t < trials; ++t)
    {
        std::size_t const J = random_size(gen, 1, 8);
        double const mu = 0.05 + 0.5 * gen.uniform();
        Vector const m = random_vector(gen, J, 1);
        Matrix const sigma = random_covariance(gen, J);
        for (auto kind : {IndexKind::sum_plus, IndexKind::max_plus,
                          IndexKind::soft_min_boundary, IndexKind::qlr})
        {
            auto const spec = IndexSpec::make(kind, J);
            res.worst = std::max(res.worst,
                                 gradient_check(spec, m, sigma, mu, 1e-5));
        }
    }
    res.passed = res.worst <= tol;
    res.detail = describe(res.worst, tol);
    return res;
}

CheckResult check_qlr_oracle(std::uint64_t seed, std::size_t trials)
{
    auto gen = Stream(seed).substream(3).generator();
    CheckResult res{"Qlr vs brute-force oracle", true, 0, {}};
    double const tol = 1e-8;
    for (std::size_t t = 0; t < trials; ++t)
    {
        std::size_t const J = random_size(gen, 1, 3);
        Vector const m = random_vector(gen, J, 1.5);
        Matrix const sigma = random_covariance(gen, J);
        double const got = qlr_distance(m, sigma);
        double const want = qlr_primal_bruteforce(m, sigma);
        res.worst = std::max(res.worst,
                             std::abs(got - want) / std::max(1.0, want));
    }
    res.passed = res.worst <= tol;
    res.detail = describe(res.worst, tol);
    return res;
}

CheckResult check_homogeneity(std::uint64_t seed, std::size_t trials)
{
    auto gen = Stream(seed).substream(4).generator();
    CheckResult res{"homogeneity", true, 0, {}};
    double const tol = 1e-12;
    for (std::size_t t = 0; t < trials; ++t)
    {
        std::size_t const J = random_size(gen, 1, 10);
        double const a = 0.1 + 5 * gen.uniform();
        Vector const m = random_vector(gen, J, 1);
        Matrix const sigma = random_covariance(gen, J);
        for (auto kind : {IndexKind::sum_plus, IndexKind::max_plus,
                          IndexKind::qlr, IndexKind::sum_plus_sq})
        {
            auto const spec = IndexSpec::make(kind, J);
            double const s = eval_S(spec, m, sigma);
            double const sa = eval_S(spec, Vector(a * m), sigma);
            double const want = std::pow(a, spec.params.chi) * s;
            res.worst = std::max(res.worst,
                                 std::abs(sa - want) / std::max(1.0, want));
        }
    }
    res.passed = res.worst <= tol;
    res.detail = describe(res.worst, tol);
    return res;
}

CheckResult check_lipschitz(std::uint64_t seed, std::size_t trials)
{
    auto gen = Stream(seed).substream(5).generator();
    CheckResult res{"MaxPlus gradient Lipschitz bound", true, 0, {}};
    double const tol = 1e-12;
    for (std::size_t t = 0; t < trials; ++t)
    {
        std::size_t const J = random_size(gen, 1, 30);
        double const mu = 0.01 + 0.5 * gen.uniform();
        auto const spec = IndexSpec::make(IndexKind::max_plus, J);
        Vector const v = random_variances(gen, J);
        Vector const m1 = random_vector(gen, J, 1);
        Vector const m2 = m1 + random_vector(gen, J, 0.1 + gen.uniform());
        auto const g1 = eval_S_mu_diag(spec, m1, v, mu).gradient;
        auto const g2 = eval_S_mu_diag(spec, m2, v, mu).gradient;
        // In m the curvature picks up 1 / sigma_min^2 from the studentization.
        double const L = (spec.params.K + spec.params.alpha / mu) / v.minCoeff();
        double const excess = (g1 - g2).norm() - L * (m1 - m2).norm();
        res.worst = std::max(res.worst, excess);
    }
    res.passed = res.worst <= tol;
    res.detail = describe(res.worst, tol);
    return res;
}

std::vector<CheckResult> run_selfcheck(std::uint64_t seed)
{
    return {check_approximation_bounds(seed, 10000),
            check_gradients(seed, 1000),
            check_qlr_oracle(seed, 100),
            check_homogeneity(seed, 1000),
            check_lipschitz(seed, 1000)};
}

}  // namespace simineq
