#include "simineq/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "simineq/error.hpp"
#include "simineq/qlr.hpp"

namespace simineq {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void check_alpha(double alpha)
{
    if (!(alpha > 0 && alpha < 1))
        throw ParameterError("alpha must lie in (0, 1)");
}

std::vector<std::size_t> all_moments(std::size_t J)
{
    std::vector<std::size_t> v(J);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

bool is_identity(std::span<std::size_t const> keep, std::size_t J)
{
    if (keep.size() != J)
        return false;
    for (std::size_t j = 0; j < J; ++j)
        if (keep[j] != j)
            return false;
    return true;
}

//! Draw one bootstrap sample of per-observation simulated moments.
class BootstrapDraws
{
  public:
    BootstrapDraws(MomentModel const& model,
                   Dataset const& data,
                   ConstSpan theta,
                   std::size_t draws,
                   std::span<std::size_t const> keep)
        : sampler_(make_average_sampler(model, data, theta, draws))
        , n_(data.size())
        , J_(model.moments)
        , keep_(keep.begin(), keep.end())
        , identity_(is_identity(keep, model.moments))
        , all_(n_, J_)
        , kept_(identity_ ? 0 : n_, keep.size())
    {
    }

    ObsMatrix const& draw(Stream const& stream)
    {
        auto index_gen = stream.substream(0).generator();
        auto shock_gen = stream.substream(1).generator();
        for (std::size_t i = 0; i < n_; ++i)
        {
            auto const k = index_gen.below(n_);
            sampler_(k, shock_gen, MutSpan(all_.data() + i * J_, J_));
        }
        if (identity_)
            return all_;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t a = 0; a < keep_.size(); ++a)
                kept_(i, a) = all_(i, keep_[a]);
        return kept_;
    }

  private:
    AverageSampler sampler_;
    std::size_t n_;
    std::size_t J_;
    std::vector<std::size_t> keep_;
    bool identity_;
    ObsMatrix all_;
    ObsMatrix kept_;
};

Vector subvector(Vector const& v, std::span<std::size_t const> idx)
{
    Vector out(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
        out[a] = v[idx[a]];
    return out;
}

Matrix submatrix(Matrix const& m, std::span<std::size_t const> idx)
{
    auto const k = static_cast<Eigen::Index>(idx.size());
    Matrix out(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            out(a, b) = m(idx[a], idx[b]);
    return out;
}

//! Root matrix; studentized unless the index is unstudentized.
Matrix compute_roots(MomentModel const& model,
                     Dataset const& data,
                     ConstSpan theta,
                     std::size_t draws,
                     MomentStats const& stats,
                     std::span<std::size_t const> keep,
                     std::size_t B,
                     RootScale scale,
                     bool studentize,
                     Stream const& stream)
{
    if (B == 0)
        throw ParameterError("bootstrap count must be positive");
    auto const K = static_cast<Eigen::Index>(keep.size());
    if (stats.mbar.size() != K)
        throw ConformanceError("statistics do not match the kept moments");
    double const root_n = std::sqrt(static_cast<double>(data.size()));
    Vector inv_sd = Vector::Ones(K);
    if (studentize && scale == RootScale::original)
    {
        for (Eigen::Index a = 0; a < K; ++a)
        {
            if (!(stats.vdiag[a] > 0))
                throw DegenerateError("moment " + std::to_string(keep[a])
                                          + " has zero estimated variance",
                                      keep[a]);
            inv_sd[a] = 1 / std::sqrt(stats.vdiag[a]);
        }
    }

    BootstrapDraws boot(model, data, theta, draws, keep);
    Matrix roots(B, K);
    for (std::size_t b = 0; b < B; ++b)
    {
        auto const& obs = boot.draw(stream.substream({1, b}));
        Vector mstar = obs.colwise().mean().transpose();
        Vector scale_b = inv_sd;
        if (studentize && scale == RootScale::bootstrap)
        {
            auto star = summarize(obs, CovarianceMode::diagonal);
            for (Eigen::Index a = 0; a < K; ++a)
            {
                if (!(star.vdiag[a] > 0))
                    throw DegenerateError(
                        "bootstrap replicate " + std::to_string(b)
                            + ": moment " + std::to_string(keep[a])
                            + " has zero variance",
                        keep[a]);
                scale_b[a] = 1 / std::sqrt(star.vdiag[a]);
            }
        }
        roots.row(b) = (root_n * (mstar - stats.mbar).cwiseProduct(scale_b))
                           .transpose();
    }
    return roots;
}

//! Index of a separable root vector restricted to a selected set.
double separable_index(IndexKind kind,
                       Matrix const& roots,
                       Eigen::Index b,
                       std::span<std::size_t const> selected)
{
    double value = 0;
    switch (kind)
    {
        case IndexKind::max_plus:
            for (auto a : selected)
                value = std::max(value, roots(b, a));
            return value;
        case IndexKind::soft_min_boundary:
            value = -inf;
            for (auto a : selected)
                value = std::max(value, roots(b, a));
            return value;
        case IndexKind::sum_plus:
            for (auto a : selected)
                value += std::max(roots(b, a), 0.0);
            return value;
        case IndexKind::sum_plus_sq:
            for (auto a : selected)
                value += std::pow(std::max(roots(b, a), 0.0), 2);
            return value;
        case IndexKind::qlr:
            break;
    }
    throw ParameterError("index is not separable");
}

double smooth_value(IndexSpec const& spec, MomentStats const& stats, double mu)
{
    if (spec.kind == IndexKind::soft_min_boundary)
        return -eval_S_mu_diag(spec, -stats.mbar, stats.vdiag, mu).value;
    return eval_S_mu_diag(spec, stats.mbar, stats.vdiag, mu).value;
}

}  // namespace

//---------------------------------------------------------------------------//
double kappa_value(KappaRule rule, std::size_t n)
{
    if (n < 2)
        throw ParameterError("kappa needs a sample size of at least 2");
    auto const dn = static_cast<double>(n);
    switch (rule)
    {
        case KappaRule::sqrt_log_n:
            return std::sqrt(std::log(dn));
        case KappaRule::n_pow_1_16:
            return std::pow(dn, 1.0 / 16);
    }
    return 0;
}

std::string_view to_string(KappaRule rule)
{
    return rule == KappaRule::sqrt_log_n ? "sqrtLogN" : "nPow1over16";
}

KappaRule kappa_rule_from_string(std::string_view name)
{
    if (name == "sqrtLogN")
        return KappaRule::sqrt_log_n;
    if (name == "nPow1over16")
        return KappaRule::n_pow_1_16;
    throw ParameterError("unknown kappa rule '" + std::string(name) + "'");
}

std::vector<Vector> LevelSet::members() const
{
    std::vector<Vector> out;
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (member[k])
            out.push_back(grid[k]);
    return out;
}

double bootstrap_quantile(std::vector<double> values, double alpha)
{
    check_alpha(alpha);
    if (values.empty())
        throw ParameterError("quantile of an empty sample");
    auto const B = static_cast<double>(values.size());
    auto k = static_cast<std::size_t>(std::ceil((1 - alpha) * B - 1e-9));
    k = std::clamp<std::size_t>(k, 1, values.size());
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
    return values[k - 1];
}

double test_statistic(IndexSpec const& spec, MomentStats const& stats)
{
    if (stats.moments() == 0)
        return 0;
    double const root_n = std::sqrt(static_cast<double>(stats.n));
    Vector scaled = root_n * stats.mbar;
    switch (spec.kind)
    {
        case IndexKind::qlr:
            return qlr_distance(scaled, regularized_covariance(stats));
        case IndexKind::soft_min_boundary:
            return scaled.maxCoeff();
        default:
            return eval_S_diag(spec, scaled, stats.vdiag);
    }
}

double smoothed_statistic(IndexSpec const& spec,
                          MomentStats const& stats,
                          double mu)
{
    if (spec.kind == IndexKind::qlr)
        throw ParameterError(
            "inference with the smoothed qlr statistic is not supported");
    if (stats.moments() == 0)
        return 0;
    return std::sqrt(static_cast<double>(stats.n))
           * smooth_value(spec, stats, mu);
}

//---------------------------------------------------------------------------//
Matrix bootstrap_roots(MomentModel const& model,
                       Dataset const& data,
                       ConstSpan theta,
                       std::size_t draws,
                       MomentStats const& stats,
                       std::span<std::size_t const> keep,
                       std::size_t B,
                       RootScale scale,
                       Stream const& stream)
{
    return compute_roots(model, data, theta, draws, stats, keep, B, scale,
                         true, stream);
}

double max_root_quantile(Matrix const& roots,
                         std::span<std::size_t const> selected,
                         double alpha)
{
    if (selected.empty())
        return 0;
    std::vector<double> values(roots.rows());
    for (Eigen::Index b = 0; b < roots.rows(); ++b)
        values[b] = separable_index(IndexKind::max_plus, roots, b, selected);
    return bootstrap_quantile(std::move(values), alpha);
}

GmsResult gms_bootstrap_cv(MomentModel const& model,
                           Dataset const& data,
                           ConstSpan theta,
                           std::size_t draws,
                           MomentStats const& stats,
                           std::span<std::size_t const> keep,
                           IndexSpec const& spec,
                           GmsBootstrap const& gms,
                           double alpha,
                           Stream const& stream,
                           DegeneratePolicy policy)
{
    check_alpha(alpha);
    if (gms.B == 0)
        throw ParameterError("bootstrap count must be positive");
    GmsResult result;
    if (keep.empty())
        return result;

    Vector const xi
        = studentized_slackness(stats, kappa_value(gms.kappa_rule, stats.n));
    std::vector<std::size_t> selected;
    for (Eigen::Index a = 0; a < xi.size(); ++a)
    {
        if (xi[a] >= -1)
        {
            selected.push_back(static_cast<std::size_t>(a));
            result.selected.push_back(keep[a]);
        }
    }
    if (selected.empty())
        return result;

    std::vector<double> values(gms.B);
    if (spec.kind != IndexKind::qlr)
    {
        bool const studentize = spec.kind != IndexKind::soft_min_boundary;
        auto roots = compute_roots(model, data, theta, draws, stats, keep,
                                   gms.B, gms.scale, studentize, stream);
        for (std::size_t b = 0; b < gms.B; ++b)
            values[b] = separable_index(spec.kind, roots,
                                        static_cast<Eigen::Index>(b), selected);
        result.critical_value = bootstrap_quantile(std::move(values), alpha);
        return result;
    }

    double const root_n = std::sqrt(static_cast<double>(data.size()));
    Matrix const weight = submatrix(regularized_covariance(stats), selected);
    Vector const mbar_sel = subvector(stats.mbar, selected);
    BootstrapDraws boot(model, data, theta, draws, keep);
    for (std::size_t b = 0; b < gms.B; ++b)
    {
        auto const& obs = boot.draw(stream.substream({1, b}));
        Vector w;
        Matrix weight_b;
        if (gms.scale == RootScale::bootstrap)
        {
            auto const star = summarize(obs, CovarianceMode::full);
            std::vector<std::size_t> live;
            for (auto a : selected)
            {
                if (star.vdiag[a] > 0)
                    live.push_back(a);
                else if (policy != DegeneratePolicy::drop_zero)
                    throw DegenerateError("bootstrap replicate " + std::to_string(b)
                                              + ": moment " + std::to_string(keep[a])
                                              + " has zero variance",
                                          keep[a]);
            }
            if (live.empty())
            {
                values[b] = 0;
                continue;
            }
            auto const sub = restrict_moments(star, live);
            w = root_n * (sub.mbar - subvector(stats.mbar, live));
            weight_b = regularized_covariance(sub);
        }
        else
        {
            Vector mstar = obs.colwise().mean().transpose();
            w = root_n * (subvector(mstar, selected) - mbar_sel);
        }
        values[b] = qlr_distance(
            w, gms.scale == RootScale::bootstrap ? weight_b : weight);
    }
    result.critical_value = bootstrap_quantile(std::move(values), alpha);
    return result;
}

GmsResult gms_bootstrap_cv(MomentModel const& model,
                           Dataset const& data,
                           SimPanel const& panel,
                           ConstSpan theta,
                           IndexSpec const& spec,
                           GmsBootstrap const& gms,
                           double alpha,
                           Stream const& stream,
                           DegeneratePolicy policy)
{
    auto const mode = spec.kind == IndexKind::qlr ? CovarianceMode::full
                                                  : CovarianceMode::diagonal;
    auto stats = moment_stats(model, data, panel, theta, mode);
    auto keep = policy == DegeneratePolicy::drop_zero
                    ? nondegenerate_moments(stats)
                    : all_moments(model.moments);
    if (keep.size() != model.moments)
        stats = restrict_moments(stats, keep);
    return gms_bootstrap_cv(model, data, theta, panel.draws(), stats, keep,
                            spec, gms, alpha, stream, policy);
}

//---------------------------------------------------------------------------//
SmoothedCv smoothed_bootstrap_cv(MomentModel const& model,
                                 Dataset const& data,
                                 ConstSpan theta,
                                 IndexSpec const& spec,
                                 SmoothedBootstrap const& sb,
                                 std::size_t draws,
                                 double alpha,
                                 Stream const& stream)
{
    check_alpha(alpha);
    if (!(sb.mu > 0))
        throw ParameterError("smoothing parameter mu must be positive");
    if (sb.B == 0)
        throw ParameterError("bootstrap count must be positive");
    if (sb.R2 <= draws)
        throw ParameterError("centering draws R2 (" + std::to_string(sb.R2)
                             + ") must exceed R (" + std::to_string(draws)
                             + ")");
    if (spec.kind == IndexKind::qlr || !spec.certified())
        throw ParameterError("index '" + std::string(to_string(spec.kind))
                             + "' has no certified smoothing bound");

    auto const n = data.size();
    auto const J = model.moments;
    double const root_n = std::sqrt(static_cast<double>(n));

    ObsMatrix centering(n, J);
    {
        auto sampler = make_average_sampler(model, data, theta, sb.R2);
        auto gen = stream.substream(0).generator();
        for (std::size_t i = 0; i < n; ++i)
            sampler(i, gen, MutSpan(centering.data() + i * J, J));
    }
    double const center
        = smooth_value(spec, summarize(centering, CovarianceMode::diagonal),
                       sb.mu);

    auto keep = all_moments(J);
    BootstrapDraws boot(model, data, theta, draws, keep);
    std::vector<double> roots(sb.B);
    for (std::size_t b = 0; b < sb.B; ++b)
    {
        auto const& obs = boot.draw(stream.substream({1, b}));
        auto star = summarize(obs, CovarianceMode::diagonal);
        roots[b] = root_n * (smooth_value(spec, star, sb.mu) - center);
    }
    SmoothedCv out;
    out.quantile = bootstrap_quantile(std::move(roots), alpha);
    out.critical_value = out.quantile + root_n * sb.mu * spec.params.beta;
    return out;
}

ConfidenceOutcome confidence_membership(ConstSpan theta,
                                        MomentModel const& model,
                                        Dataset const& data,
                                        SimPanel const& panel,
                                        IndexSpec const& spec,
                                        CriticalValueSpec const& cv,
                                        Stream const& stream)
{
    check_alpha(cv.alpha);
    auto const mode = spec.kind == IndexKind::qlr ? CovarianceMode::full
                                                  : CovarianceMode::diagonal;
    auto stats = moment_stats(model, data, panel, theta, mode);
    auto keep = all_moments(model.moments);
    if (cv.degenerate == DegeneratePolicy::drop_zero)
    {
        keep = nondegenerate_moments(stats);
        if (keep.size() != model.moments)
            stats = restrict_moments(stats, keep);
    }

    ConfidenceOutcome out;
    if (auto const* fixed = std::get_if<Fixed>(&cv.method))
    {
        out.statistic = test_statistic(spec, stats);
        out.critical_value = fixed->c;
    }
    else if (auto const* gms = std::get_if<GmsBootstrap>(&cv.method))
    {
        out.statistic = test_statistic(spec, stats);
        auto r = gms_bootstrap_cv(model, data, theta, panel.draws(), stats,
                                  keep, spec, *gms, cv.alpha, stream,
                                  cv.degenerate);
        out.critical_value = r.critical_value;
        out.selected = std::move(r.selected);
    }
    else
    {
        auto const& sb = std::get<SmoothedBootstrap>(cv.method);
        if (keep.size() != model.moments)
            throw DegenerateError(
                "smoothed inference needs every moment to have positive "
                "variance");
        out.statistic = smoothed_statistic(spec, stats, sb.mu);
        out.critical_value = smoothed_bootstrap_cv(model, data, theta, spec,
                                                   sb, panel.draws(),
                                                   cv.alpha, stream)
                                 .critical_value;
    }
    out.covered = out.statistic <= out.critical_value;
    return out;
}

//---------------------------------------------------------------------------//
double interval_upper_endpoint(EndpointRule rule,
                               Vector const& bounds,
                               Vector const& sd,
                               std::size_t n,
                               double c,
                               double mu)
{
    if (bounds.size() == 0)
        throw ParameterError("endpoint needs at least one moment");
    if (n == 0)
        throw ParameterError("sample size must be positive");
    double const root_n = std::sqrt(static_cast<double>(n));
    switch (rule)
    {
        case EndpointRule::naive_fixed:
            return bounds.minCoeff() + c / root_n;
        case EndpointRule::cv_corrected:
            if (sd.size() != bounds.size())
                throw ConformanceError("sd vector does not match bounds");
            return (bounds + (c / root_n) * sd).minCoeff();
        case EndpointRule::smoothed: {
            auto spec = IndexSpec::make(IndexKind::soft_min_boundary,
                                        static_cast<std::size_t>(bounds.size()));
            return eval_S_mu_diag(spec, bounds, Vector(), mu).value
                   + c / root_n;
        }
    }
    return 0;
}

double level_set_statistic(MomentStats const& stats)
{
    double total = 0;
    for (Eigen::Index j = 0; j < stats.mbar.size(); ++j)
    {
        double const m = stats.mbar[j];
        if (m <= 0)
            continue;
        if (!(stats.vdiag[j] > 0))
            return inf;
        total += m * m / stats.vdiag[j];
    }
    return static_cast<double>(stats.n) * total;
}

LevelSet level_set_estimate(MomentModel const& model,
                            Dataset const& data,
                            SimPanel const& panel,
                            std::vector<Vector> const& grid,
                            double c)
{
    if (grid.empty())
        throw ParameterError("level set needs a nonempty grid");
    LevelSet out;
    out.grid = grid;
    out.level = c;
    out.member.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        auto const& theta = grid[k];
        auto stats = moment_stats(model, data, panel,
                                  ConstSpan(theta.data(), theta.size()),
                                  CovarianceMode::diagonal);
        out.member[k] = level_set_statistic(stats) <= c;
    }
    return out;
}

double hausdorff_distance(std::vector<Vector> const& a,
                          std::vector<Vector> const& b)
{
    if (a.empty() || b.empty())
        throw ParameterError("Hausdorff distance needs nonempty sets");
    auto directed = [](auto const& from, auto const& to) {
        double worst = 0;
        for (auto const& x : from)
        {
            double best = inf;
            for (auto const& y : to)
                best = std::min(best, (x - y).squaredNorm());
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(directed(a, b), directed(b, a));
}

}  // namespace simineq
