#include "simineq/moment_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "simineq/error.hpp"

namespace simineq {

Dataset::Dataset(std::size_t width, std::vector<double> values)
    : width_(width), values_(std::move(values))
{
    if (width_ == 0)
    {
        if (!values_.empty())
            throw ConformanceError("dataset of width 0 cannot hold values");
        return;
    }
    if (values_.size() % width_ != 0)
        throw ConformanceError("dataset values are not a multiple of the width");
    n_ = values_.size() / width_;
}

Dataset Dataset::select(std::span<std::size_t const> indices) const
{
    std::vector<double> out;
    out.reserve(indices.size() * width_);
    for (auto i : indices)
    {
        if (i >= n_)
            throw ConformanceError("dataset index out of range");
        auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    Dataset result;
    result.width_ = width_;
    result.n_ = indices.size();
    result.values_ = std::move(out);
    return result;
}

SimPanel::SimPanel(std::size_t n, std::size_t draws, std::size_t shock_dim)
    : n_(n), draws_(draws), dim_(shock_dim), values_(n * draws * shock_dim, 0.0)
{
}

//---------------------------------------------------------------------------//
MomentModel analytic_view(MomentModel const& model)
{
    if (!model.has_analytic())
        throw ParameterError("model has no analytic moment");
    MomentModel result;
    result.moments = model.moments;
    result.theta_dim = model.theta_dim;
    result.shock_dim = 0;
    auto analytic = model.analytic;
    result.analytic = analytic;
    result.kernel = [analytic](ConstSpan x, ConstSpan, ConstSpan theta,
                               MutSpan out) { analytic(x, theta, out); };
    result.sample_shock = [](ConstSpan, Generator&, MutSpan) {};
    result.average_sampler = [analytic](Dataset const& data, ConstSpan theta,
                                        std::size_t) -> AverageSampler {
        std::vector<double> th(theta.begin(), theta.end());
        return [&data, analytic, th](std::size_t i, Generator&, MutSpan out) {
            analytic(data.row(i), th, out);
        };
    };
    return result;
}

AverageSampler make_average_sampler(MomentModel const& model,
                                    Dataset const& data,
                                    ConstSpan theta,
                                    std::size_t draws)
{
    if (draws == 0)
        throw ParameterError("number of simulation draws must be positive");
    if (model.average_sampler)
        return model.average_sampler(data, theta, draws);

    std::vector<double> th(theta.begin(), theta.end());
    auto const J = model.moments;
    auto const dim = model.shock_dim;
    return [&model, &data, th, draws, u = std::vector<double>(dim),
            m = std::vector<double>(J)](
               std::size_t i, Generator& gen, MutSpan out) mutable {
        auto const J = m.size();
        std::fill(out.begin(), out.end(), 0.0);
        auto x = data.row(i);
        for (std::size_t r = 0; r < draws; ++r)
        {
            model.sample_shock(x, gen, u);
            model.kernel(x, u, th, m);
            for (std::size_t j = 0; j < J; ++j)
                out[j] += m[j];
        }
        for (auto& v : out)
            v /= static_cast<double>(draws);
    };
}

//---------------------------------------------------------------------------//
SimPanel simulate_panel(MomentModel const& model,
                        Dataset const& data,
                        std::size_t draws,
                        Stream const& stream)
{
    if (draws == 0)
        throw ParameterError("number of simulation draws must be positive");
    SimPanel panel(data.size(), draws, model.shock_dim);
    if (model.shock_dim == 0)
        return panel;
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        auto gen = stream.substream(i).generator();
        auto x = data.row(i);
        for (std::size_t r = 0; r < draws; ++r)
            model.sample_shock(x, gen, panel.draw(i, r));
    }
    return panel;
}

ObsMatrix per_observation_moments(MomentModel const& model,
                                  Dataset const& data,
                                  SimPanel const& panel,
                                  ConstSpan theta)
{
    if (panel.size() != data.size())
        throw ConformanceError("panel has " + std::to_string(panel.size())
                               + " rows but dataset has "
                               + std::to_string(data.size()));
    if (panel.shock_dim() != model.shock_dim)
        throw ConformanceError("panel shock dimension does not match model");
    if (theta.size() != model.theta_dim)
        throw ConformanceError("parameter dimension does not match model");

    auto const n = data.size();
    auto const J = model.moments;
    auto const R = panel.draws();
    ObsMatrix result = ObsMatrix::Zero(n, J);
    std::vector<double> m(J);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto x = data.row(i);
        double* row = result.data() + i * J;
        for (std::size_t r = 0; r < R; ++r)
        {
            model.kernel(x, panel.draw(i, r), theta, m);
            for (std::size_t j = 0; j < J; ++j)
                row[j] += m[j];
        }
        for (std::size_t j = 0; j < J; ++j)
            row[j] /= static_cast<double>(R);
    }
    return result;
}

Vector sample_moments(MomentModel const& model,
                      Dataset const& data,
                      SimPanel const& panel,
                      ConstSpan theta)
{
    auto per_obs = per_observation_moments(model, data, panel, theta);
    if (per_obs.rows() == 0)
        throw DegenerateError("empty sample");
    return per_obs.colwise().mean().transpose();
}

Matrix covariance(MomentModel const& model,
                  Dataset const& data,
                  SimPanel const& panel,
                  ConstSpan theta,
                  Vector const& mbar)
{
    if (data.size() < 2)
        throw DegenerateError("covariance needs at least two observations");
    auto per_obs = per_observation_moments(model, data, panel, theta);
    if (mbar.size() != per_obs.cols())
        throw ConformanceError("mean vector length does not match moments");
    ObsMatrix centered = per_obs.rowwise() - mbar.transpose();
    return (centered.transpose() * centered)
           / static_cast<double>(per_obs.rows());
}

MomentStats summarize(ObsMatrix const& per_obs, CovarianceMode mode)
{
    auto const n = static_cast<std::size_t>(per_obs.rows());
    if (n < 2)
        throw DegenerateError("covariance needs at least two observations");
    auto const J = per_obs.cols();

    MomentStats s;
    s.n = n;
    s.mbar = per_obs.colwise().mean().transpose();
    ObsMatrix centered = per_obs.rowwise() - s.mbar.transpose();
    if (mode == CovarianceMode::full)
    {
        s.sigma = (centered.transpose() * centered) / static_cast<double>(n);
        s.sigma = 0.5 * (s.sigma + s.sigma.transpose()).eval();
        s.vdiag = s.sigma.diagonal();
    }
    else
    {
        s.vdiag = centered.array().square().colwise().sum().transpose()
                  / static_cast<double>(n);
        s.sigma = s.vdiag.asDiagonal();
        s.diagonal_only = true;
    }

    s.omega = Matrix::Identity(J, J);
    if (mode == CovarianceMode::full)
    {
        Vector inv_sd(J);
        for (Eigen::Index j = 0; j < J; ++j)
            inv_sd[j] = s.vdiag[j] > 0 ? 1 / std::sqrt(s.vdiag[j]) : 0.0;
        s.omega = inv_sd.asDiagonal() * s.sigma * inv_sd.asDiagonal();
        for (Eigen::Index j = 0; j < J; ++j)
            if (s.vdiag[j] > 0)
                s.omega(j, j) = 1;
    }
    return s;
}

MomentStats moment_stats(MomentModel const& model,
                         Dataset const& data,
                         SimPanel const& panel,
                         ConstSpan theta,
                         CovarianceMode mode)
{
    return summarize(per_observation_moments(model, data, panel, theta), mode);
}

namespace {
void require_positive_variance(MomentStats const& stats)
{
    for (Eigen::Index j = 0; j < stats.vdiag.size(); ++j)
    {
        if (!(stats.vdiag[j] > 0))
            throw DegenerateError("moment " + std::to_string(j)
                                      + " has zero estimated variance",
                                  static_cast<std::size_t>(j));
    }
}
}  // namespace

Matrix regularized_covariance(MomentStats const& stats)
{
    if (stats.diagonal_only)
        throw ParameterError(
            "regularized covariance needs the full covariance estimate");
    require_positive_variance(stats);
    double const det = stats.omega.determinant();
    double const shift = std::max(0.012 - det, 0.0);
    Matrix result = stats.sigma;
    if (shift > 0)
        result.diagonal() += shift * stats.vdiag;
    return result;
}

Vector studentized_slackness(MomentStats const& stats, double kappa)
{
    if (!(kappa > 0))
        throw ParameterError("kappa must be positive");
    require_positive_variance(stats);
    double const scale = std::sqrt(static_cast<double>(stats.n)) / kappa;
    return scale * stats.mbar.cwiseQuotient(stats.vdiag.cwiseSqrt());
}

MomentStats restrict_moments(MomentStats const& stats,
                             std::span<std::size_t const> keep)
{
    auto const k = static_cast<Eigen::Index>(keep.size());
    MomentStats s;
    s.n = stats.n;
    s.diagonal_only = stats.diagonal_only;
    s.mbar.resize(k);
    s.vdiag.resize(k);
    s.sigma.resize(k, k);
    s.omega.resize(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
    {
        auto const ja = static_cast<Eigen::Index>(keep[a]);
        if (ja >= stats.mbar.size())
            throw ConformanceError("moment index out of range");
        s.mbar[a] = stats.mbar[ja];
        s.vdiag[a] = stats.vdiag[ja];
        for (Eigen::Index b = 0; b < k; ++b)
        {
            auto const jb = static_cast<Eigen::Index>(keep[b]);
            s.sigma(a, b) = stats.sigma(ja, jb);
            s.omega(a, b) = stats.omega(ja, jb);
        }
    }
    return s;
}

std::vector<std::size_t> nondegenerate_moments(MomentStats const& stats)
{
    std::vector<std::size_t> keep;
    for (Eigen::Index j = 0; j < stats.vdiag.size(); ++j)
        if (stats.vdiag[j] > 0)
            keep.push_back(static_cast<std::size_t>(j));
    return keep;
}

//---------------------------------------------------------------------------//
Resample bootstrap_resample(Dataset const& data,
                            MomentModel const& model,
                            std::size_t draws,
                            Stream const& stream)
{
    if (data.size() == 0)
        throw DegenerateError("cannot resample an empty dataset");
    auto const n = data.size();
    Resample result;
    result.indices.resize(n);
    auto index_gen = stream.substream(0).generator();
    for (auto& idx : result.indices)
        idx = index_gen.below(n);
    result.data = data.select(result.indices);

    result.panel = SimPanel(n, draws, model.shock_dim);
    if (model.shock_dim > 0)
    {
        auto shock_gen = stream.substream(1).generator();
        for (std::size_t i = 0; i < n; ++i)
        {
            auto x = result.data.row(i);
            for (std::size_t r = 0; r < draws; ++r)
                model.sample_shock(x, shock_gen, result.panel.draw(i, r));
        }
    }
    return result;
}

}  // namespace simineq
