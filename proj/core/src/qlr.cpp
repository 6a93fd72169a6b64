#include "simineq/qlr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "simineq/error.hpp"

namespace simineq {
namespace {

struct Problem
{
    Vector const& m;
    Matrix const& sigma;
    double half_c;  // gradient is half_c * Sigma u - m
    double tol;
};

Vector gradient(Problem const& p, Vector const& u)
{
    return p.half_c * (p.sigma * u) - p.m;
}

double kkt_residual(Problem const& p, Vector const& u)
{
    Vector g = gradient(p, u);
    double r = 0;
    for (Eigen::Index j = 0; j < u.size(); ++j)
        r = std::max(r, std::abs(std::min(u[j], g[j])));
    return r;
}

double objective(Problem const& p, Vector const& u)
{
    return p.m.dot(u) - 0.5 * p.half_c * u.dot(p.sigma * u);
}

//! Unconstrained optimum on the free set, zero elsewhere.
bool solve_free(Problem const& p, std::vector<Eigen::Index> const& free,
                Vector& z)
{
    auto const k = static_cast<Eigen::Index>(free.size());
    z.setZero(p.m.size());
    if (k == 0)
        return true;
    Matrix sub(k, k);
    Vector rhs(k);
    for (Eigen::Index a = 0; a < k; ++a)
    {
        rhs[a] = p.m[free[a]];
        for (Eigen::Index b = 0; b < k; ++b)
            sub(a, b) = p.sigma(free[a], free[b]);
    }
    Eigen::LLT<Matrix> llt(sub);
    if (llt.info() != Eigen::Success)
        return false;
    Vector sol = llt.solve(rhs) / p.half_c;
    for (Eigen::Index a = 0; a < k; ++a)
        z[free[a]] = sol[a];
    return true;
}

bool enumerate(Problem const& p, QlrSolution& out)
{
    auto const J = static_cast<Eigen::Index>(p.m.size());
    std::vector<char> mask(J);
    std::vector<Eigen::Index> free;
    Vector z;
    for (Eigen::Index k = 0; k <= J; ++k)
    {
        std::fill(mask.begin(), mask.end(), 0);
        std::fill(mask.begin(), mask.begin() + k, 1);
        do
        {
            ++out.iterations;
            free.clear();
            for (Eigen::Index j = 0; j < J; ++j)
                if (mask[j])
                    free.push_back(j);
            if (!solve_free(p, free, z))
                continue;
            bool ok = std::all_of(free.begin(), free.end(), [&](auto j) {
                return z[j] >= -p.tol;
            });
            if (!ok)
                continue;
            Vector g = gradient(p, z);
            for (Eigen::Index j = 0; j < J && ok; ++j)
                if (!mask[j] && g[j] < -p.tol)
                    ok = false;
            if (!ok)
                continue;
            out.u = z.cwiseMax(0.0);
            out.enumerated = true;
            return true;
        } while (std::prev_permutation(mask.begin(), mask.end()));
    }
    return false;
}

void projected_gradient(Problem const& p, double lipschitz, QlrSolution& out)
{
    auto const J = p.m.size();
    double const step = 1 / lipschitz;
    Vector u = Vector::Zero(J);
    Vector y = u;
    Vector u_prev = u;
    double t = 1;
    double f_prev = objective(p, u);
    for (std::size_t it = 0; it < 20000; ++it)
    {
        ++out.iterations;
        u_prev = u;
        u = (y - step * gradient(p, y)).cwiseMax(0.0);
        double const f = objective(p, u);
        if (f < f_prev)
        {
            // Adaptive restart
            t = 1;
            y = u;
        }
        else
        {
            double const t_next = 0.5 * (1 + std::sqrt(1 + 4 * t * t));
            y = u + ((t - 1) / t_next) * (u - u_prev);
            t = t_next;
        }
        f_prev = f;
        if (it % 16 == 0 && kkt_residual(p, u) <= 1e-6 * (1 + p.m.cwiseAbs().maxCoeff()))
            break;
    }
    out.u = u;
}

//! Primal active-set iterations from a feasible start (Lawson-Hanson style).
void polish(Problem const& p, QlrSolution& out)
{
    auto const J = p.m.size();
    Vector u = out.u.cwiseMax(0.0);
    std::vector<char> in_free(J, 0);
    for (Eigen::Index j = 0; j < J; ++j)
        in_free[j] = u[j] > 0;

    std::vector<Eigen::Index> free;
    Vector z;
    for (std::size_t outer = 0; outer < 10 * static_cast<std::size_t>(J) + 50;
         ++outer)
    {
        ++out.iterations;
        // Inner loop: make the free-set optimum feasible.
        for (std::size_t inner = 0; inner <= static_cast<std::size_t>(J);
             ++inner)
        {
            free.clear();
            for (Eigen::Index j = 0; j < J; ++j)
                if (in_free[j])
                    free.push_back(j);
            if (!solve_free(p, free, z))
                throw ConditioningError("covariance submatrix is singular");
            double alpha = 1;
            Eigen::Index blocking = -1;
            for (auto j : free)
            {
                if (z[j] <= 0)
                {
                    double const a = u[j] / (u[j] - z[j]);
                    if (a < alpha)
                    {
                        alpha = a;
                        blocking = j;
                    }
                }
            }
            if (blocking < 0)
            {
                u = z;
                break;
            }
            u += alpha * (z - u);
            for (auto j : free)
                if (u[j] <= 0 || j == blocking)
                {
                    u[j] = 0;
                    in_free[j] = 0;
                }
        }
        Vector g = gradient(p, u);
        Eigen::Index worst = -1;
        double most_negative = -p.tol;
        for (Eigen::Index j = 0; j < J; ++j)
        {
            if (!in_free[j] && g[j] < most_negative)
            {
                most_negative = g[j];
                worst = j;
            }
        }
        if (worst < 0)
            break;
        in_free[worst] = 1;
    }
    out.u = u.cwiseMax(0.0);
}

}  // namespace

QlrSolution solve_qlr_dual(Vector const& m,
                           Matrix const& sigma,
                           double curvature,
                           std::size_t enumeration_limit)
{
    auto const J = m.size();
    if (sigma.rows() != J || sigma.cols() != J)
        throw ConformanceError("weighting matrix does not match moment vector");
    if (!(curvature > 0))
        throw ParameterError("curvature must be positive");

    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || J == 0)
    {
        if (J == 0)
            return {};
        throw ConditioningError("eigenvalue computation failed");
    }
    double const lmin = eig.eigenvalues().minCoeff();
    double const lmax = eig.eigenvalues().maxCoeff();
    if (!(lmax > 0) || !(lmin > 1e-12 * lmax))
        throw ConditioningError("weighting matrix is not positive definite");

    double const scale = 1 + m.cwiseAbs().maxCoeff();
    Problem p{m, sigma, 0.5 * curvature, 1e-10 * scale};

    QlrSolution out;
    out.u = Vector::Zero(J);
    if ((m.array() <= 0).all())
        return out;

    bool solved = false;
    if (static_cast<std::size_t>(J) <= enumeration_limit)
        solved = enumerate(p, out);
    if (!solved)
    {
        projected_gradient(p, p.half_c * lmax, out);
        polish(p, out);
    }
    out.kkt_residual = kkt_residual(p, out.u);
    out.value = std::max(objective(p, out.u), 0.0);
    return out;
}

double qlr_distance(Vector const& m, Matrix const& sigma)
{
    return solve_qlr_dual(m, sigma, 1.0).value;
}

}  // namespace simineq
