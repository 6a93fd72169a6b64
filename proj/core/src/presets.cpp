#include <algorithm>

#include "simineq/error.hpp"
#include "simineq/harness.hpp"

namespace simineq {
namespace {

MethodSpec naive(bool analytic)
{
    MethodSpec m;
    m.method = MethodKind::naive;
    m.analytic = analytic;
    return m;
}

MethodSpec gms(KappaRule kappa, std::size_t B, bool analytic = false)
{
    MethodSpec m;
    m.method = MethodKind::gms;
    m.kappa = kappa;
    m.B = B;
    m.analytic = analytic;
    return m;
}

MethodSpec smooth(double mu)
{
    MethodSpec m;
    m.method = MethodKind::smooth;
    m.mu = mu;
    m.B = 1000;
    m.R2 = 100;
    return m;
}

ExperimentConfig intersection_grid()
{
    ExperimentConfig cfg;
    cfg.model.kind = ModelKind::intersection;
    cfg.n_values = {100, 250, 1000};
    cfg.R_values = {1, 5, 10, 20};
    cfg.J_values = {5, 10, 30};
    cfg.reps = 1000;
    cfg.alpha = 0.05;
    return cfg;
}

}  // namespace

TableId table_id_from_string(std::string_view name)
{
    for (auto id : {TableId::T1, TableId::T3, TableId::T4, TableId::T5,
                    TableId::T6, TableId::T7, TableId::T8, TableId::T9})
        if (to_string(id) == name)
            return id;
    throw ParameterError("unknown table '" + std::string(name) + "'");
}

std::string_view to_string(TableId id)
{
    switch (id)
    {
        case TableId::T1:
            return "T1";
        case TableId::T3:
            return "T3";
        case TableId::T4:
            return "T4";
        case TableId::T5:
            return "T5";
        case TableId::T6:
            return "T6";
        case TableId::T7:
            return "T7";
        case TableId::T8:
            return "T8";
        case TableId::T9:
            return "T9";
    }
    return "unknown";
}

Scale scale_from_string(std::string_view name)
{
    if (name == "full")
        return Scale::full;
    if (name == "desk")
        return Scale::desk;
    throw ParameterError("unknown scale '" + std::string(name) + "'");
}

ExperimentConfig table_preset(TableId id, Scale scale)
{
    ExperimentConfig cfg = intersection_grid();
    switch (id)
    {
        case TableId::T1:
            cfg.J_values = {2, 5, 10, 30};
            cfg.methods = {naive(true), naive(false)};
            break;
        case TableId::T3: {
            std::size_t const count = scale == Scale::desk ? 300 : 1000;
            cfg.model.kind = ModelKind::entry;
            cfg.n_values = {250, 500, 1000, 2000};
            cfg.J_values = {2 * cfg.model.entry.cells()};
            cfg.reps = count;
            cfg.methods = {gms(KappaRule::n_pow_1_16, count, true),
                           gms(KappaRule::n_pow_1_16, count)};
            break;
        }
        case TableId::T4:
        case TableId::T6:
            cfg.methods = {naive(false), gms(KappaRule::sqrt_log_n, 1000)};
            break;
        case TableId::T5:
        case TableId::T7:
            cfg.methods = {smooth(0.02), smooth(0.04)};
            break;
        case TableId::T8:
            cfg.model.slack_design = true;
            cfg.methods = {naive(false), gms(KappaRule::sqrt_log_n, 1000)};
            break;
        case TableId::T9:
            cfg.model.slack_design = true;
            cfg.methods = {smooth(0.02), smooth(0.04)};
            break;
    }
    return cfg;
}

ExperimentResult reproduce_table(TableId id,
                                 Scale scale,
                                 RunOptions const& options)
{
    return run_experiment(table_preset(id, scale), options);
}

}  // namespace simineq
