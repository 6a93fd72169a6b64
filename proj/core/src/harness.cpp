#include "simineq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "simineq/error.hpp"
#include "simineq/models/intersection.hpp"

namespace simineq {
namespace {

constexpr std::uint64_t data_tag = 0xda7a;
constexpr std::uint64_t panel_tag = 0x9a2e1;
constexpr std::uint64_t boot_tag = 0xb0075;

std::uint64_t hash_string(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t bits(double x)
{
    std::uint64_t b;
    std::memcpy(&b, &x, sizeof b);
    return b;
}

std::uint64_t combine(std::uint64_t h, std::uint64_t v)
{
    return mix64(h ^ mix64(v));
}

std::uint64_t cell_key(ExperimentConfig const& cfg, Cell const& cell)
{
    auto const& m = cell.method;
    std::uint64_t h = hash_string(cfg.model.label());
    for (std::uint64_t v :
         {std::uint64_t(cell.n), std::uint64_t(cell.R), std::uint64_t(cell.J),
          std::uint64_t(m.method), std::uint64_t(m.analytic),
          std::uint64_t(m.B), std::uint64_t(m.kappa), bits(m.mu),
          std::uint64_t(m.R2), bits(cfg.alpha),
          bits(m.critical_value.value_or(-1.0))})
        h = combine(h, v);
    return h;
}

struct RepOutcome
{
    bool covered = false;
    double endpoint = std::numeric_limits<double>::quiet_NaN();
    int disagreement = -1;
};

IntersectionConfig intersection_config(ModelSpec const& spec,
                                       std::size_t J,
                                       std::size_t n)
{
    IntersectionConfig ic = spec.slack_design
                                ? IntersectionConfig::slack_design(J, n)
                                : IntersectionConfig{};
    ic.J = J;
    ic.n = n;
    ic.first_stage = spec.first_stage;
    return ic;
}

struct RepStreams
{
    Stream data;
    Stream panel;
    Stream boot;
};

RepStreams rep_streams(ExperimentConfig const& cfg,
                       Cell const& cell,
                       std::size_t R,
                       std::uint64_t key,
                       std::size_t k)
{
    Stream const master(cfg.master_seed);
    auto const model = hash_string(cfg.model.label());
    return {master.substream({data_tag, model, cell.n, cell.J, k}),
            master.substream({panel_tag, model, cell.n, cell.J, R, k}),
            master.substream({boot_tag, key, k})};
}

//! Largest theta accepted by the selection-dependent critical value.
double gms_interval_endpoint(Vector const& bounds,
                             Vector const& sd,
                             std::size_t n,
                             double kappa,
                             Matrix const& roots,
                             double alpha)
{
    auto const J = static_cast<std::size_t>(bounds.size());
    double const root_n = std::sqrt(static_cast<double>(n));
    // Moment j is selected once theta >= bounds_j - kappa sd_j / sqrt(n).
    std::vector<double> entry(J);
    for (std::size_t j = 0; j < J; ++j)
        entry[j] = bounds[j] - kappa * sd[j] / root_n;
    std::vector<std::size_t> order(J);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return entry[a] < entry[b]; });

    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> selected;
    for (std::size_t k = 0; k <= J; ++k)
    {
        if (k > 0)
            selected.push_back(order[k - 1]);
        double const lo = k == 0 ? -std::numeric_limits<double>::infinity()
                                 : entry[order[k - 1]];
        double const hi = k == J ? std::numeric_limits<double>::infinity()
                                 : entry[order[k]];
        double const cv = max_root_quantile(roots, selected, alpha);
        double const end = interval_upper_endpoint(EndpointRule::cv_corrected,
                                                   bounds, sd, n, cv);
        if (end >= lo)
            best = std::max(best, std::min(end, hi));
    }
    return best;
}

RepOutcome intersection_rep(ExperimentConfig const& cfg,
                            Cell const& cell,
                            std::uint64_t key,
                            std::size_t k)
{
    auto const ic = intersection_config(cfg.model, cell.J, cell.n);
    std::size_t const R = cell.method.analytic ? 1 : cell.R;
    auto streams = rep_streams(cfg, cell, R, key, k);
    auto const data = gen_intersection_data(ic, streams.data);
    auto const interval = intersection_interval(
        ic, data, cell.method, R, cfg.alpha, streams.panel, streams.boot);
    RepOutcome out;
    out.covered = interval.covered;
    out.endpoint = interval.endpoint;
    return out;
}

RepOutcome entry_rep(ExperimentConfig const& cfg,
                     Cell const& cell,
                     std::uint64_t key,
                     std::size_t k)
{
    auto const& method = cell.method;
    auto const& ec = cfg.model.entry;
    std::size_t const R = method.analytic ? 1 : cell.R;
    auto streams = rep_streams(cfg, cell, R, key, k);

    auto const data = gen_entry_data(ec, cell.n, streams.data);
    auto const base = entry_moment_model(ec);
    auto const model = method.analytic ? analytic_view(base) : base;
    auto const panel = simulate_panel(model, data, R, streams.panel);
    std::vector<double> const theta(entry_theta_upper.begin(),
                                    entry_theta_upper.end());

    auto const spec = IndexSpec::make(IndexKind::qlr, base.moments);
    CriticalValueSpec cv;
    cv.method = GmsBootstrap{method.kappa, method.B, RootScale::bootstrap};
    cv.alpha = cfg.alpha;
    cv.degenerate = DegeneratePolicy::drop_zero;
    auto const outcome
        = confidence_membership(theta, model, data, panel, spec, cv,
                                streams.boot);

    RepOutcome out;
    out.covered = outcome.covered;
    if (!method.analytic)
    {
        auto const ana_model = analytic_view(base);
        SimPanel const none(cell.n, 1, 0);
        auto const ana = moment_stats(ana_model, data, none, theta,
                                      CovarianceMode::diagonal);
        auto const sim
            = moment_stats(model, data, panel, theta, CovarianceMode::diagonal);
        out.disagreement = selection_disagreement(
            ana, sim, kappa_value(method.kappa, cell.n));
    }
    return out;
}

double median(std::vector<double> v)
{
    auto const mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double const upper = v[mid];
    if (v.size() % 2 == 1)
        return upper;
    double const lower = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lower + upper);
}

std::string cell_name(ExperimentConfig const& cfg, Cell const& cell)
{
    std::ostringstream os;
    os << cfg.model.label() << " n=" << cell.n << " R=" << cell.R
       << " J=" << cell.J << " method=" << to_string(cell.method.method);
    if (cell.method.method == MethodKind::smooth)
        os << " mu=" << cell.method.mu;
    return os.str();
}

std::string format_double(double x, char const* fmt)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, x);
    return buf;
}

}  // namespace

//---------------------------------------------------------------------------//
std::string_view to_string(MethodKind kind)
{
    switch (kind)
    {
        case MethodKind::naive:
            return "naive";
        case MethodKind::gms:
            return "gms";
        case MethodKind::smooth:
            return "smooth";
    }
    return "unknown";
}

MethodKind method_kind_from_string(std::string_view name)
{
    for (auto k : {MethodKind::naive, MethodKind::gms, MethodKind::smooth})
        if (to_string(k) == name)
            return k;
    throw ParameterError("unknown method '" + std::string(name) + "'");
}

IntervalOutcome intersection_interval(IntersectionConfig const& ic,
                                      Dataset const& data,
                                      MethodSpec const& method,
                                      std::size_t R,
                                      double alpha,
                                      Stream const& panel_stream,
                                      Stream const& boot_stream)
{
    if (method.analytic)
        R = 1;
    std::size_t const J = ic.J;
    std::size_t const n = data.size();
    auto const base = intersection_moment_model(ic);
    auto const model = method.analytic ? analytic_view(base) : base;
    auto const panel = simulate_panel(model, data, R, panel_stream);

    double const theta_u = intersection_upper_bound(ic);
    std::vector<double> const theta{theta_u};
    auto const stats
        = moment_stats(model, data, panel, theta, CovarianceMode::diagonal);
    Vector const bounds = theta_u - stats.mbar.array();
    Vector const sd = stats.vdiag.cwiseSqrt();

    IntervalOutcome out;
    switch (method.method)
    {
        case MethodKind::naive: {
            double const c = method.critical_value.value_or(
                naive_critical_value(J, alpha));
            auto const spec
                = IndexSpec::make(IndexKind::soft_min_boundary, J);
            out.covered = test_statistic(spec, stats) <= c;
            out.endpoint = interval_upper_endpoint(EndpointRule::naive_fixed,
                                                   bounds, sd, n, c);
            break;
        }
        case MethodKind::gms: {
            std::vector<std::size_t> keep(J);
            std::iota(keep.begin(), keep.end(), std::size_t{0});
            // Roots of the simulated frequencies, the negated moment roots.
            Matrix const roots
                = -bootstrap_roots(model, data, theta, R, stats, keep, method.B,
                                   RootScale::bootstrap, boot_stream);
            double const kappa = kappa_value(method.kappa, n);
            auto const selected = gms_selection(stats, kappa);
            double const cv = max_root_quantile(roots, selected, alpha);
            auto const spec = IndexSpec::make(IndexKind::max_plus, J);
            out.covered = test_statistic(spec, stats) <= cv;
            out.endpoint = gms_interval_endpoint(bounds, sd, n, kappa,
                                                 roots, alpha);
            break;
        }
        case MethodKind::smooth: {
            auto const spec
                = IndexSpec::make(IndexKind::soft_min_boundary, J);
            SmoothedBootstrap const sb{method.mu, method.B, method.R2};
            auto const cv = smoothed_bootstrap_cv(model, data, theta, spec, sb,
                                                  R, alpha, boot_stream);
            out.covered = smoothed_statistic(spec, stats, method.mu)
                          <= cv.critical_value;
            out.endpoint = interval_upper_endpoint(EndpointRule::smoothed,
                                                   bounds, sd, n,
                                                   cv.critical_value,
                                                   method.mu);
            break;
        }
    }
    return out;
}

std::string ModelSpec::label() const
{
    if (kind == ModelKind::entry)
        return "entry";
    std::string s = slack_design ? "intersection_slack" : "intersection";
    if (first_stage)
        s += "_fs" + std::to_string(*first_stage);
    return s;
}

void validate(ExperimentConfig const& cfg)
{
    auto positive = [](std::vector<std::size_t> const& v, char const* key) {
        if (v.empty())
            throw ConfigError(key, "must be a nonempty list");
        for (auto x : v)
            if (x == 0)
                throw ConfigError(key, "values must be positive");
    };
    positive(cfg.n_values, "nValues");
    positive(cfg.R_values, "RValues");
    for (auto n : cfg.n_values)
        if (n < 2)
            throw ConfigError("nValues", "sample sizes must be at least 2");
    if (cfg.model.kind == ModelKind::intersection)
        positive(cfg.J_values, "JValues");
    else
    {
        try
        {
            cfg.model.entry.validate();
        }
        catch (ParameterError const& e)
        {
            throw ConfigError("model", e.what());
        }
        auto const J = 2 * cfg.model.entry.cells();
        for (auto j : cfg.J_values)
            if (j != J)
                throw ConfigError("JValues", "the entry game has J = "
                                                 + std::to_string(J));
    }
    if (cfg.model.first_stage && *cfg.model.first_stage < 2)
        throw ConfigError("model", "firstStage must be at least 2");
    if (cfg.reps == 0)
        throw ConfigError("reps", "must be positive");
    if (!(cfg.alpha > 0 && cfg.alpha < 1))
        throw ConfigError("alpha", "must lie in (0, 1)");
    if (cfg.methods.empty())
        throw ConfigError("methods", "must list at least one method");
    if (cfg.parallelism == 0)
        throw ConfigError("parallelism", "must be positive");
    for (auto const& m : cfg.methods)
    {
        if (m.method != MethodKind::naive && m.B == 0)
            throw ConfigError("methods", "B must be positive");
        if (m.method == MethodKind::smooth)
        {
            if (!(m.mu > 0))
                throw ConfigError("methods", "mu must be positive");
            for (auto R : cfg.R_values)
                if (!m.analytic && m.R2 <= R)
                    throw ConfigError("methods", "R2 must exceed every R");
        }
        if (cfg.model.kind == ModelKind::entry && m.method != MethodKind::gms)
            throw ConfigError("methods",
                              "the entry game supports only the gms method");
    }
}

std::vector<Cell> expand_cells(ExperimentConfig const& cfg)
{
    std::vector<std::size_t> Js = cfg.J_values;
    if (cfg.model.kind == ModelKind::entry)
        Js = {2 * cfg.model.entry.cells()};
    std::vector<Cell> cells;
    for (auto n : cfg.n_values)
        for (auto J : Js)
            for (auto const& m : cfg.methods)
            {
                if (m.analytic)
                {
                    cells.push_back({n, 0, J, m});
                    continue;
                }
                for (auto R : cfg.R_values)
                    cells.push_back({n, R, J, m});
            }
    return cells;
}

std::vector<std::size_t> gms_selection(MomentStats const& stats, double kappa)
{
    if (!(kappa > 0))
        throw ParameterError("kappa must be positive");
    std::vector<std::size_t> selected;
    double const root_n = std::sqrt(static_cast<double>(stats.n));
    for (Eigen::Index j = 0; j < stats.mbar.size(); ++j)
    {
        if (!(stats.vdiag[j] > 0))
            continue;
        double const xi
            = root_n * stats.mbar[j] / (kappa * std::sqrt(stats.vdiag[j]));
        if (xi >= -1)
            selected.push_back(static_cast<std::size_t>(j));
    }
    return selected;
}

bool selection_disagreement(MomentStats const& analytic,
                            MomentStats const& simulated,
                            double kappa)
{
    if (analytic.moments() != simulated.moments())
        throw ConformanceError("statistics have different numbers of moments");
    return gms_selection(analytic, kappa) != gms_selection(simulated, kappa);
}

CellResult run_coverage_cell(ExperimentConfig const& cfg,
                             Cell const& cell,
                             RunOptions const& options)
{
    auto const start = std::chrono::steady_clock::now();
    auto const key = cell_key(cfg, cell);
    auto const reps = cfg.reps;
    std::vector<RepOutcome> outcomes(reps);
    std::vector<std::exception_ptr> errors(reps);

    auto work = [&](std::size_t k) {
        try
        {
            outcomes[k] = cfg.model.kind == ModelKind::intersection
                              ? intersection_rep(cfg, cell, key, k)
                              : entry_rep(cfg, cell, key, k);
        }
        catch (...)
        {
            errors[k] = std::current_exception();
        }
    };

    std::size_t const workers = std::min(cfg.parallelism, reps);
    if (workers <= 1)
    {
        for (std::size_t k = 0; k < reps; ++k)
        {
            work(k);
            if (errors[k])
                break;
        }
    }
    else
    {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
        {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < reps && !failed; k = next++)
                {
                    work(k);
                    if (errors[k])
                        failed = true;
                }
            });
        }
        for (auto& t : pool)
            t.join();
    }
    for (std::size_t k = 0; k < reps; ++k)
    {
        if (!errors[k])
            continue;
        std::string what = "unknown error";
        try
        {
            std::rethrow_exception(errors[k]);
        }
        catch (std::exception const& e)
        {
            what = e.what();
        }
        catch (...)
        {
        }
        throw Error("cell (" + cell_name(cfg, cell) + ") replication "
                    + std::to_string(k) + ": " + what);
    }

    CellResult result;
    result.model = cfg.model.label();
    result.cell = cell;
    result.reps = reps;
    result.seed = cfg.master_seed;
    std::vector<double> endpoints;
    std::size_t disagreements = 0;
    bool any_disagreement = false;
    for (auto const& o : outcomes)
    {
        result.covered += o.covered;
        if (!std::isnan(o.endpoint))
            endpoints.push_back(o.endpoint);
        if (o.disagreement >= 0)
        {
            any_disagreement = true;
            disagreements += static_cast<std::size_t>(o.disagreement);
        }
    }
    result.coverage
        = static_cast<double>(result.covered) / static_cast<double>(reps);
    if (!endpoints.empty())
    {
        auto const ic = intersection_config(cfg.model, cell.J, cell.n);
        result.median_excess_length
            = median(std::move(endpoints)) - intersection_upper_bound(ic);
    }
    if (any_disagreement)
        result.selection_disagreements = disagreements;
    if (options.record_timing)
    {
        result.wall_seconds = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
    }
    return result;
}

ExperimentResult run_experiment(ExperimentConfig const& cfg,
                                RunOptions const& options)
{
    validate(cfg);
    ExperimentResult result;
    result.config = cfg;
    for (auto const& cell : expand_cells(cfg))
        result.cells.push_back(run_coverage_cell(cfg, cell, options));
    return result;
}

std::string results_csv(ExperimentResult const& result)
{
    std::ostringstream os;
    os << csv_header << '\n';
    for (auto const& r : result.cells)
    {
        auto const& m = r.cell.method;
        os << r.model << ',' << r.cell.n << ',' << r.cell.R << ','
           << r.cell.J << ',' << to_string(m.method) << ',';
        if (m.method == MethodKind::smooth)
            os << format_double(m.mu, "%g");
        os << ',';
        if (m.method == MethodKind::gms)
            os << to_string(m.kappa);
        os << ',' << r.reps << ',' << format_double(r.coverage, "%.6f") << ',';
        if (r.median_excess_length)
            os << format_double(*r.median_excess_length, "%.6f");
        os << ',';
        if (r.selection_disagreements)
            os << *r.selection_disagreements;
        os << ',' << r.seed << ',' << format_double(r.wall_seconds, "%.3f")
           << '\n';
    }
    return os.str();
}

void export_results(ExperimentResult const& result,
                    std::string const& path,
                    ExportFormat format)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("cannot open '" + path + "' for writing");
    if (format == ExportFormat::csv)
        os << results_csv(result);
    else
        os << config_to_string(result.config) << '\n';
    if (!os)
        throw Error("failed writing '" + path + "'");
}

}  // namespace simineq
