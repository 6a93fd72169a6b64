#include "simineq/smooth_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "simineq/error.hpp"
#include "simineq/qlr.hpp"

namespace simineq {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Vector studentize(Vector const& m, Vector const& vdiag)
{
    if (vdiag.size() != m.size())
        throw ConformanceError("variance vector does not match moments");
    for (Eigen::Index j = 0; j < vdiag.size(); ++j)
        if (!(vdiag[j] > 0))
            throw DegenerateError("moment " + std::to_string(j)
                                      + " has zero variance",
                                  static_cast<std::size_t>(j));
    return m.cwiseQuotient(vdiag.cwiseSqrt());
}

void check_mu(double mu)
{
    if (!(mu > 0) || !std::isfinite(mu))
        throw ParameterError("smoothing parameter mu must be positive");
}

double softplus(double z)
{
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double logistic(double z)
{
    if (z >= 0)
        return 1 / (1 + std::exp(-z));
    double const e = std::exp(z);
    return e / (1 + e);
}

}  // namespace

std::string_view to_string(IndexKind kind)
{
    switch (kind)
    {
        case IndexKind::sum_plus:
            return "sum_plus";
        case IndexKind::max_plus:
            return "max_plus";
        case IndexKind::soft_min_boundary:
            return "soft_min_boundary";
        case IndexKind::qlr:
            return "qlr";
        case IndexKind::sum_plus_sq:
            return "sum_plus_sq";
    }
    return "unknown";
}

IndexKind index_kind_from_string(std::string_view name)
{
    for (auto k : {IndexKind::sum_plus, IndexKind::max_plus,
                   IndexKind::soft_min_boundary, IndexKind::qlr,
                   IndexKind::sum_plus_sq})
    {
        if (to_string(k) == name)
            return k;
    }
    throw ParameterError("unknown index kind '" + std::string(name) + "'");
}

IndexSpec IndexSpec::make(IndexKind kind, std::size_t moments)
{
    if (moments == 0)
        throw ParameterError("index needs at least one moment");
    auto const J = static_cast<double>(moments);
    IndexSpec spec;
    spec.kind = kind;
    switch (kind)
    {
        case IndexKind::sum_plus:
            spec.params = {J, J * std::log(2.0), 0, 1};
            break;
        case IndexKind::max_plus:
            spec.params = {1, std::log(J + 1), 0, 1};
            break;
        case IndexKind::soft_min_boundary:
            spec.params = {1, std::log(J), 0, 1};
            break;
        case IndexKind::qlr:
            spec.params = {1, inf, 0, 2};
            break;
        case IndexKind::sum_plus_sq:
            spec.params = {0, inf, 0, 2};
            break;
    }
    return spec;
}

bool IndexSpec::certified() const
{
    return std::isfinite(params.beta);
}

double log_sum_exp(Vector const& z, double extra)
{
    // The largest term contributes exp(0) = 1; summing the others separately
    // keeps log1p accurate when they are tiny.
    Eigen::Index top = -1;
    double shift = -inf;
    if (z.size() > 0)
        shift = z.maxCoeff(&top);
    bool const extra_on_top = extra > 0 && shift <= 0;
    if (extra_on_top)
        shift = 0;
    if (shift == -inf)
        return -inf;
    double rest = 0;
    for (Eigen::Index j = 0; j < z.size(); ++j)
        if (extra_on_top || j != top)
            rest += std::exp(z[j] - shift);
    if (extra > 0 && !extra_on_top)
        rest += extra * std::exp(-shift);
    if (extra_on_top)
        rest += extra - 1;
    return shift + std::log1p(rest);
}

//---------------------------------------------------------------------------//
double eval_S_diag(IndexSpec const& spec, Vector const& m, Vector const& vdiag)
{
    switch (spec.kind)
    {
        case IndexKind::soft_min_boundary:
            if (m.size() == 0)
                throw ParameterError("index needs at least one moment");
            return m.minCoeff();
        case IndexKind::qlr:
            throw ParameterError("qlr index needs the full covariance");
        default:
            break;
    }
    Vector z = studentize(m, vdiag);
    switch (spec.kind)
    {
        case IndexKind::sum_plus:
            return z.cwiseMax(0.0).sum();
        case IndexKind::max_plus:
            return z.size() > 0 ? std::max(z.maxCoeff(), 0.0) : 0.0;
        case IndexKind::sum_plus_sq:
            return z.cwiseMax(0.0).squaredNorm();
        default:
            break;
    }
    return 0;
}

double eval_S(IndexSpec const& spec, Vector const& m, Matrix const& sigma)
{
    if (sigma.rows() != m.size() || sigma.cols() != m.size())
        throw ConformanceError("covariance does not match moment vector");
    if (spec.kind == IndexKind::qlr)
        return qlr_distance(m, sigma);
    return eval_S_diag(spec, m, sigma.diagonal());
}

SmoothEval eval_S_mu_diag(IndexSpec const& spec,
                          Vector const& m,
                          Vector const& vdiag,
                          double mu)
{
    check_mu(mu);
    SmoothEval out;
    out.mu = mu;
    switch (spec.kind)
    {
        case IndexKind::soft_min_boundary: {
            if (m.size() == 0)
                throw ParameterError("index needs at least one moment");
            Vector z = -m / mu;
            double const lse = log_sum_exp(z);
            out.value = -mu * lse;
            out.gradient = (z.array() - lse).exp().matrix();
            return out;
        }
        case IndexKind::qlr:
            throw ParameterError("qlr index needs the full covariance");
        case IndexKind::sum_plus_sq:
            throw ParameterError("sum_plus_sq has no smooth approximation");
        default:
            break;
    }
    Vector sd = vdiag.cwiseSqrt();
    Vector z = studentize(m, vdiag) / mu;
    if (spec.kind == IndexKind::sum_plus)
    {
        out.value = 0;
        out.gradient.resize(m.size());
        for (Eigen::Index j = 0; j < m.size(); ++j)
        {
            out.value += mu * softplus(z[j]);
            out.gradient[j] = logistic(z[j]) / sd[j];
        }
        return out;
    }
    // max_plus
    double const lse = log_sum_exp(z, 1.0);
    out.value = mu * lse;
    out.gradient = (z.array() - lse).exp().matrix().cwiseQuotient(sd);
    return out;
}

SmoothEval eval_S_mu(IndexSpec const& spec,
                     Vector const& m,
                     Matrix const& sigma,
                     double mu)
{
    check_mu(mu);
    if (sigma.rows() != m.size() || sigma.cols() != m.size())
        throw ConformanceError("covariance does not match moment vector");
    if (spec.kind == IndexKind::qlr)
    {
        auto sol = solve_qlr_dual(m, sigma, 1 + 2 * mu);
        return {sol.value, sol.u, mu};
    }
    return eval_S_mu_diag(spec, m, sigma.diagonal(), mu);
}

double approximation_gap(IndexSpec const& spec,
                         Vector const& m,
                         Matrix const& sigma,
                         double mu)
{
    return eval_S_mu(spec, m, sigma, mu).value - eval_S(spec, m, sigma);
}

double gradient_check(IndexSpec const& spec,
                      Vector const& m,
                      Matrix const& sigma,
                      double mu,
                      double h)
{
    if (!(h > 0))
        throw ParameterError("finite-difference step must be positive");
    auto const g = eval_S_mu(spec, m, sigma, mu).gradient;
    double const scale = std::max(g.cwiseAbs().maxCoeff(),
                                  std::numeric_limits<double>::min());
    double worst = 0;
    Vector shifted = m;
    for (Eigen::Index j = 0; j < m.size(); ++j)
    {
        shifted[j] = m[j] + h;
        double const up = eval_S_mu(spec, shifted, sigma, mu).value;
        shifted[j] = m[j] - h;
        double const down = eval_S_mu(spec, shifted, sigma, mu).value;
        shifted[j] = m[j];
        double const fd = (up - down) / (2 * h);
        worst = std::max(worst, std::abs(fd - g[j]) / scale);
    }
    return worst;
}

}  // namespace simineq
