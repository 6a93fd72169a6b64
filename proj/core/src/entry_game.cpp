#include "simineq/models/entry_game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "simineq/error.hpp"
#include "simineq/normal.hpp"

namespace simineq {
namespace {

struct Thresholds
{
    double a1, a2, d;  // -z1 beta, -z2 beta, -delta
};

Thresholds thresholds(std::array<double, 2> const& z,
                      std::array<double, 2> const& theta)
{
    return {-z[0] * theta[0], -z[1] * theta[0], -theta[1]};
}

bool in_h1(Thresholds const& t, double u1, double u2)
{
    return u1 <= t.a1 + t.d && u2 > t.a2;
}

bool in_h2(Thresholds const& t, double u1, double u2)
{
    return (u1 <= t.a1 + t.d && u2 > t.a2 + t.d)
           || (u1 <= t.a1 && u2 >= t.a2 && u2 <= t.a2 + t.d);
}

struct CellProbs
{
    double h1, h2;
};

CellProbs analytic_probs(Thresholds const& t)
{
    double const f1d = normal_cdf(t.a1 + t.d);
    double const f1 = normal_cdf(t.a1);
    double const f2d = normal_cdf(t.a2 + t.d);
    double const f2 = normal_cdf(t.a2);
    return {f1d * (1 - f2), f1d * (1 - f2d) + f1 * (f2d - f2)};
}

std::size_t draw_discrete(std::vector<double> const& prob, Generator& gen)
{
    double u = gen.uniform();
    for (std::size_t k = 0; k + 1 < prob.size(); ++k)
    {
        if (u < prob[k])
            return k;
        u -= prob[k];
    }
    return prob.size() - 1;
}

}  // namespace

std::array<double, 2> EntryConfig::cell_z(std::size_t cell) const
{
    auto const nb = z2_support.size();
    return {z1_support.at(cell / nb), z2_support.at(cell % nb)};
}

double EntryConfig::cell_prob(std::size_t cell) const
{
    auto const nb = z2_prob.size();
    return z1_prob.at(cell / nb) * z2_prob.at(cell % nb);
}

void EntryConfig::validate() const
{
    if (!(delta < 0))
        throw ParameterError("entry game needs delta < 0");
    if (!(select_prob >= 0 && select_prob <= 1))
        throw ParameterError("selection probability must lie in [0, 1]");
    if (z1_support.empty() || z1_support.size() != z1_prob.size()
        || z2_support.empty() || z2_support.size() != z2_prob.size())
        throw ParameterError("covariate support and probabilities disagree");
    for (auto const* p : {&z1_prob, &z2_prob})
    {
        double const total = std::accumulate(p->begin(), p->end(), 0.0);
        if (std::abs(total - 1) > 1e-12
            || std::any_of(p->begin(), p->end(), [](double v) { return v < 0; }))
            throw ParameterError("covariate probabilities must sum to 1");
    }
}

Outcome equilibrium_region(std::array<double, 2> const& z,
                           std::array<double, 2> const& theta,
                           std::array<double, 2> const& u)
{
    auto const t = thresholds(z, theta);
    bool const first = u[0] > t.a1 && u[1] <= t.a2 + t.d;
    bool const second = u[0] <= t.a1 + t.d && u[1] > t.a2;
    if (first && second)
        return Outcome::multiple;
    if (first)
        return Outcome::first;
    if (second)
        return Outcome::second;
    if (u[0] <= t.a1 && u[1] <= t.a2)
        return Outcome::none;
    return Outcome::both;
}

Dataset gen_entry_data(EntryConfig const& cfg, std::size_t n,
                       Stream const& stream)
{
    cfg.validate();
    std::array<double, 2> const theta{cfg.beta, cfg.delta};
    std::vector<double> values(n * entry_record_width);
    auto gen = stream.generator();
    auto const nb = cfg.z2_support.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        auto const a = draw_discrete(cfg.z1_prob, gen);
        auto const b = draw_discrete(cfg.z2_prob, gen);
        std::array<double, 2> const z{cfg.z1_support[a], cfg.z2_support[b]};
        std::array<double, 2> const u{gen.normal(), gen.normal()};
        bool const pick_first = gen.uniform() < cfg.select_prob;
        double y1 = 0;
        double y2 = 0;
        switch (equilibrium_region(z, theta, u))
        {
            case Outcome::none:
                break;
            case Outcome::both:
                y1 = y2 = 1;
                break;
            case Outcome::first:
                y1 = 1;
                break;
            case Outcome::second:
                y2 = 1;
                break;
            case Outcome::multiple:
                (pick_first ? y1 : y2) = 1;
                break;
        }
        double* row = values.data() + i * entry_record_width;
        row[0] = y1;
        row[1] = y2;
        row[2] = z[0];
        row[3] = z[1];
        row[4] = static_cast<double>(a * nb + b);
    }
    return Dataset(entry_record_width, std::move(values));
}

EntryProbabilities entry_choice_probs(std::array<double, 2> const& z,
                                      std::array<double, 2> const& theta,
                                      std::optional<FrequencyMode> frequency)
{
    auto const t = thresholds(z, theta);
    if (!frequency)
    {
        auto p = analytic_probs(t);
        return {p.h1, p.h2};
    }
    if (frequency->draws == 0)
        throw ParameterError("frequency simulator needs at least one draw");
    auto gen = frequency->stream.generator();
    std::size_t c1 = 0;
    std::size_t c2 = 0;
    for (std::size_t r = 0; r < frequency->draws; ++r)
    {
        double const u1 = gen.normal();
        double const u2 = gen.normal();
        c1 += in_h1(t, u1, u2);
        c2 += in_h2(t, u1, u2);
    }
    auto const R = static_cast<double>(frequency->draws);
    return {c1 / R, c2 / R};
}

MomentModel entry_moment_model(EntryConfig const& cfg)
{
    cfg.validate();
    auto const K = cfg.cells();
    MomentModel model;
    model.moments = 2 * K;
    model.theta_dim = 2;
    model.shock_dim = 2;
    model.kernel = [K](ConstSpan x, ConstSpan u, ConstSpan theta, MutSpan out) {
        std::fill(out.begin(), out.end(), 0.0);
        auto const t = thresholds({x[2], x[3]}, {theta[0], theta[1]});
        auto const k = static_cast<std::size_t>(x[4]);
        double const y01 = (x[0] == 0 && x[1] == 1) ? 1.0 : 0.0;
        out[k] = y01 - (in_h1(t, u[0], u[1]) ? 1.0 : 0.0);
        out[K + k] = (in_h2(t, u[0], u[1]) ? 1.0 : 0.0) - y01;
    };
    model.analytic = [K](ConstSpan x, ConstSpan theta, MutSpan out) {
        std::fill(out.begin(), out.end(), 0.0);
        auto const p
            = analytic_probs(thresholds({x[2], x[3]}, {theta[0], theta[1]}));
        auto const k = static_cast<std::size_t>(x[4]);
        double const y01 = (x[0] == 0 && x[1] == 1) ? 1.0 : 0.0;
        out[k] = y01 - p.h1;
        out[K + k] = p.h2 - y01;
    };
    model.sample_shock = [](ConstSpan, Generator& gen, MutSpan out) {
        out[0] = gen.normal();
        out[1] = gen.normal();
    };
    // Each shock lands in H2, in H1 but not H2, or outside H1; the R-draw
    // counts are therefore multinomial with the analytic cell probabilities.
    model.average_sampler = [K](Dataset const& data, ConstSpan theta,
                                std::size_t draws) -> AverageSampler {
        std::vector<double> cut2(data.size());
        std::vector<double> cut1(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
        {
            auto x = data.row(i);
            auto p = analytic_probs(
                thresholds({x[2], x[3]}, {theta[0], theta[1]}));
            cut2[i] = p.h2;
            cut1[i] = p.h1;
        }
        auto const R = static_cast<double>(draws);
        return [&data, K, draws, R, cut1 = std::move(cut1),
                cut2 = std::move(cut2)](std::size_t i, Generator& gen,
                                        MutSpan out) {
            std::fill(out.begin(), out.end(), 0.0);
            std::size_t c1 = 0;
            std::size_t c2 = 0;
            for (std::size_t r = 0; r < draws; ++r)
            {
                double const v = gen.uniform();
                c2 += v < cut2[i];
                c1 += v < cut1[i];
            }
            auto x = data.row(i);
            auto const k = static_cast<std::size_t>(x[4]);
            double const y01 = (x[0] == 0 && x[1] == 1) ? 1.0 : 0.0;
            out[k] = y01 - c1 / R;
            out[K + k] = c2 / R - y01;
        };
    };
    return model;
}

double entry_population_outcome_prob(std::array<double, 2> const& z,
                                     std::array<double, 2> const& theta_true,
                                     double select_prob)
{
    if (!(theta_true[1] < 0))
        throw ParameterError("entry game needs delta < 0");
    auto const t = thresholds(z, theta_true);
    auto const p = analytic_probs(t);
    double const multiple = p.h1 - p.h2;
    return p.h2 + (1 - select_prob) * multiple;
}

double entry_identified_slack(EntryConfig const& cfg,
                              std::array<double, 2> const& theta)
{
    std::array<double, 2> const truth{cfg.beta, cfg.delta};
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cfg.cells(); ++k)
    {
        auto const z = cfg.cell_z(k);
        double const p01
            = entry_population_outcome_prob(z, truth, cfg.select_prob);
        auto const h = analytic_probs(thresholds(z, theta));
        slack = std::min({slack, h.h1 - p01, p01 - h.h2});
    }
    return slack;
}

LevelSet identified_set_grid(EntryConfig const& cfg,
                             std::vector<Vector> const& theta_grid)
{
    cfg.validate();
    if (theta_grid.empty())
        throw ParameterError("identified set needs a nonempty grid");
    LevelSet out;
    out.grid = theta_grid;
    out.level = 0;
    out.member.resize(theta_grid.size());
    for (std::size_t k = 0; k < theta_grid.size(); ++k)
    {
        auto const& th = theta_grid[k];
        if (th.size() != 2)
            throw ConformanceError("entry parameters are (beta, delta)");
        out.member[k] = entry_identified_slack(cfg, {th[0], th[1]}) >= 0;
    }
    return out;
}

std::vector<Vector> make_theta_grid(double beta_lo, double beta_hi,
                                    double delta_lo, double delta_hi,
                                    double step)
{
    if (!(step > 0) || beta_hi < beta_lo || delta_hi < delta_lo)
        throw ParameterError("invalid grid bounds");
    auto count = [step](double lo, double hi) {
        return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9))
               + 1;
    };
    std::vector<Vector> grid;
    auto const nb = count(beta_lo, beta_hi);
    auto const nd = count(delta_lo, delta_hi);
    grid.reserve(nb * nd);
    for (std::size_t a = 0; a < nb; ++a)
        for (std::size_t b = 0; b < nd; ++b)
            grid.push_back(Vector{{beta_lo + step * static_cast<double>(a),
                                   delta_lo + step * static_cast<double>(b)}});
    return grid;
}

void write_identified_set_csv(LevelSet const& set, std::string const& path)
{
    std::ofstream os(path);
    if (!os)
        throw Error("cannot open '" + path + "' for writing");
    os << "beta,delta,member\n";
    os << std::setprecision(10);
    for (std::size_t k = 0; k < set.grid.size(); ++k)
    {
        os << set.grid[k][0] << ',' << set.grid[k][1] << ','
           << (set.member[k] ? 1 : 0) << '\n';
    }
    if (!os)
        throw Error("failed writing '" + path + "'");
}

}  // namespace simineq
