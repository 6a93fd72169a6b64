#include "simineq/models/intersection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "simineq/error.hpp"
#include "simineq/inference.hpp"
#include "simineq/normal.hpp"

namespace simineq {
namespace {

//! Walker alias tables for Binomial(R, p), one per (observation, moment).
class BinomialTables
{
  public:
    BinomialTables(std::size_t count, std::size_t draws)
        : draws_(draws)
        , size_(draws + 1)
        , prob_(count * size_)
        , alias_(count * size_)
    {
    }

    void build(std::size_t t, double p)
    {
        double* prob = prob_.data() + t * size_;
        std::uint16_t* alias = alias_.data() + t * size_;
        auto const R = draws_;
        pmf_.assign(size_, 0.0);
        if (p <= 0)
            pmf_[0] = 1;
        else if (p >= 1)
            pmf_[R] = 1;
        else
        {
            double const log_p = std::log(p);
            double const log_q = std::log1p(-p);
            for (std::size_t k = 0; k <= R; ++k)
            {
                double const lc = std::lgamma(R + 1.0) - std::lgamma(k + 1.0)
                                  - std::lgamma(R - k + 1.0);
                pmf_[k] = std::exp(lc + k * log_p + (R - k) * log_q);
            }
        }
        double total = 0;
        for (auto v : pmf_)
            total += v;

        small_.clear();
        large_.clear();
        for (std::size_t k = 0; k < size_; ++k)
        {
            prob[k] = pmf_[k] / total * static_cast<double>(size_);
            alias[k] = static_cast<std::uint16_t>(k);
            (prob[k] < 1 ? small_ : large_).push_back(k);
        }
        while (!small_.empty() && !large_.empty())
        {
            auto const s = small_.back();
            small_.pop_back();
            auto const l = large_.back();
            alias[s] = static_cast<std::uint16_t>(l);
            prob[l] -= 1 - prob[s];
            if (prob[l] < 1)
            {
                large_.pop_back();
                small_.push_back(l);
            }
        }
        for (auto k : large_)
            prob[k] = 1;
        for (auto k : small_)
            prob[k] = 1;
    }

    std::size_t sample(std::size_t t, Generator& gen) const
    {
        auto const k = gen.below(size_);
        return gen.uniform() < prob_[t * size_ + k]
                   ? k
                   : alias_[t * size_ + k];
    }

  private:
    std::size_t draws_;
    std::size_t size_;
    std::vector<double> prob_;
    std::vector<std::uint16_t> alias_;
    std::vector<double> pmf_;
    std::vector<std::size_t> small_;
    std::vector<std::size_t> large_;
};

constexpr std::size_t alias_limit = 64;

double threshold(ConstSpan x, std::size_t j, std::size_t J, bool first_stage)
{
    return first_stage ? x[j] - x[J + j] : x[j];
}

}  // namespace

IntersectionConfig IntersectionConfig::slack_design(std::size_t J,
                                                    std::size_t n)
{
    IntersectionConfig cfg;
    cfg.J = J;
    cfg.n = n;
    cfg.slack_count = J / 5;
    cfg.slack_shift = 1 / std::sqrt(static_cast<double>(n));
    return cfg;
}

Dataset gen_intersection_data(IntersectionConfig const& cfg,
                              Stream const& stream)
{
    if (cfg.J == 0)
        throw ParameterError("intersection model needs J >= 1");
    if (cfg.slack_count > cfg.J)
        throw ParameterError("slack count exceeds J");
    if (cfg.first_stage && *cfg.first_stage < 2)
        throw ParameterError("first-stage sample size must be at least 2");

    auto const J = cfg.J;
    auto const width = cfg.width();
    std::vector<double> values(cfg.n * width);
    auto gen = stream.substream(0).generator();
    for (std::size_t i = 0; i < cfg.n; ++i)
    {
        for (std::size_t j = 0; j < J; ++j)
        {
            double x = gen.normal();
            if (j < cfg.slack_count)
                x += cfg.slack_shift;
            values[i * width + j] = x;
        }
    }
    if (cfg.first_stage)
    {
        auto aux = stream.substream(1).generator();
        auto const N1 = *cfg.first_stage;
        for (std::size_t j = 0; j < J; ++j)
        {
            double sum = 0;
            for (std::size_t k = 0; k < N1; ++k)
                sum += aux.normal();
            double const gamma_hat = sum / static_cast<double>(N1);
            for (std::size_t i = 0; i < cfg.n; ++i)
                values[i * width + J + j] = gamma_hat;
        }
    }
    return Dataset(width, std::move(values));
}

MomentModel intersection_moment_model(IntersectionConfig const& cfg)
{
    auto const J = cfg.J;
    bool const fs = cfg.first_stage.has_value();
    MomentModel model;
    model.moments = J;
    model.theta_dim = 1;
    model.shock_dim = J;
    model.kernel = [J, fs](ConstSpan x, ConstSpan u, ConstSpan theta,
                           MutSpan out) {
        for (std::size_t j = 0; j < J; ++j)
            out[j] = theta[0] - (u[j] < threshold(x, j, J, fs) ? 1.0 : 0.0);
    };
    model.analytic = [J, fs](ConstSpan x, ConstSpan theta, MutSpan out) {
        for (std::size_t j = 0; j < J; ++j)
            out[j] = theta[0] - normal_cdf(threshold(x, j, J, fs));
    };
    model.sample_shock = [J](ConstSpan, Generator& gen, MutSpan out) {
        for (std::size_t j = 0; j < J; ++j)
            out[j] = gen.normal();
    };
    model.average_sampler = [J, fs](Dataset const& data, ConstSpan theta,
                                    std::size_t draws) -> AverageSampler {
        double const th = theta[0];
        auto const n = data.size();
        auto const R = static_cast<double>(draws);
        if (draws > alias_limit)
        {
            std::vector<double> p(n * J);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < J; ++j)
                    p[i * J + j] = normal_cdf(threshold(data.row(i), j, J, fs));
            return [p = std::move(p), J, th, draws, R](
                       std::size_t i, Generator& gen, MutSpan out) {
                for (std::size_t j = 0; j < J; ++j)
                {
                    double const pj = p[i * J + j];
                    std::size_t hits = 0;
                    for (std::size_t r = 0; r < draws; ++r)
                        hits += gen.uniform() < pj;
                    out[j] = th - static_cast<double>(hits) / R;
                }
            };
        }
        auto tables = std::make_shared<BinomialTables>(n * J, draws);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < J; ++j)
                tables->build(i * J + j,
                              normal_cdf(threshold(data.row(i), j, J, fs)));
        return [tables, J, th, R](std::size_t i, Generator& gen, MutSpan out) {
            for (std::size_t j = 0; j < J; ++j)
                out[j] = th
                         - static_cast<double>(tables->sample(i * J + j, gen))
                               / R;
        };
    };
    return model;
}

double naive_critical_value(std::size_t J, double alpha)
{
    if (J == 0)
        throw ParameterError("J must be positive");
    if (!(alpha > 0 && alpha < 1))
        throw ParameterError("alpha must lie in (0, 1)");
    double const p = std::pow(1 - alpha, 1 / static_cast<double>(J));
    return normal_quantile(p) * std::sqrt(1.0 / 12);
}

double naive_critical_value_simulated(std::size_t J,
                                       double alpha,
                                       std::size_t draws,
                                       Stream const& stream)
{
    if (J == 0 || draws == 0)
        throw ParameterError("J and the number of draws must be positive");
    auto gen = stream.generator();
    double const sd = std::sqrt(1.0 / 12);
    std::vector<double> maxima(draws);
    for (auto& m : maxima)
    {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < J; ++j)
            best = std::max(best, sd * gen.normal());
        m = best;
    }
    return bootstrap_quantile(std::move(maxima), alpha);
}

double intersection_upper_bound(IntersectionConfig const& cfg)
{
    // E[Phi(X)] for X ~ N(s, 1) equals Phi(s / sqrt(2)).
    return cfg.slack_count < cfg.J
               ? 0.5
               : normal_cdf(cfg.slack_shift / std::sqrt(2.0));
}

}  // namespace simineq
