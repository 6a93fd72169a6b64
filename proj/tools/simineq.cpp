#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "simineq/error.hpp"
#include "simineq/harness.hpp"
#include "simineq/models/entry_game.hpp"
#include "simineq/models/intersection.hpp"
#include "simineq/selfcheck.hpp"

using namespace simineq;

namespace {

//! Bad input supplied on the command line (exit code 1).
struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Overrides
{
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::optional<double> alpha;
    std::optional<double> mu;
    std::optional<std::size_t> bootstrap;
    std::optional<std::string> method;
    bool timing = false;
};

void add_overrides(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--jobs", o.jobs, "Worker threads")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", o.alpha, "Significance level");
    cmd->add_option("--mu", o.mu, "Smoothing parameter for smooth methods");
    cmd->add_option("--bootstrap", o.bootstrap, "Bootstrap replicates B");
    cmd->add_option("--method", o.method, "Keep only this method")
        ->check(CLI::IsMember({"naive", "gms", "smooth"}));
    cmd->add_flag("--timing", o.timing, "Record wall-clock seconds per cell");
}

void apply(Overrides const& o, ExperimentConfig& cfg)
{
    if (o.seed)
        cfg.master_seed = *o.seed;
    if (o.jobs)
        cfg.parallelism = *o.jobs;
    if (o.alpha)
        cfg.alpha = *o.alpha;
    for (auto& m : cfg.methods)
    {
        if (o.mu && m.method == MethodKind::smooth)
            m.mu = *o.mu;
        if (o.bootstrap && m.method != MethodKind::naive)
            m.B = *o.bootstrap;
    }
    if (o.method)
    {
        auto const kind = method_kind_from_string(*o.method);
        std::erase_if(cfg.methods,
                      [&](MethodSpec const& m) { return m.method != kind; });
        if (cfg.methods.empty())
            throw ConfigError("methods",
                              "no configured method matches --method "
                                  + *o.method);
    }
    validate(cfg);
}

void write_outputs(ExperimentResult const& result, std::string const& out)
{
    export_results(result, out, ExportFormat::csv);
    export_results(result, out + ".json", ExportFormat::structured);
    std::cout << "wrote " << result.cells.size() << " cells to " << out
              << '\n';
}

//---------------------------------------------------------------------------//
struct Table
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Table read_csv(std::string const& path)
{
    std::ifstream is(path);
    if (!is)
        throw UsageError("cannot read '" + path + "'");
    Table t;
    std::string line;
    std::size_t lineno = 0;
    auto split = [](std::string const& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        return cells;
    };
    while (std::getline(is, line))
    {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto cells = split(line);
        if (t.header.empty())
        {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw UsageError(path + ":" + std::to_string(lineno)
                             + ": expected " + std::to_string(t.header.size())
                             + " fields");
        std::vector<double> row;
        for (auto const& c : cells)
        {
            try
            {
                std::size_t used = 0;
                row.push_back(std::stod(c, &used));
                if (used != c.size())
                    throw std::invalid_argument(c);
            }
            catch (std::exception const&)
            {
                throw UsageError(path + ":" + std::to_string(lineno)
                                 + ": not a number '" + c + "'");
            }
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty())
        throw UsageError("'" + path + "' has no header row");
    if (t.rows.size() < 2)
        throw UsageError("'" + path + "' needs at least two observations");
    return t;
}

Dataset to_dataset(Table const& t)
{
    std::vector<double> values;
    for (auto const& r : t.rows)
        values.insert(values.end(), r.begin(), r.end());
    return Dataset(t.header.size(), std::move(values));
}

//! Moments given directly as per-observation values.
MomentModel observed_moment_model(std::size_t J)
{
    MomentModel m;
    m.moments = J;
    m.kernel = [](ConstSpan x, ConstSpan, ConstSpan, MutSpan out) {
        std::copy(x.begin(), x.end(), out.begin());
    };
    m.analytic = [](ConstSpan x, ConstSpan, MutSpan out) {
        std::copy(x.begin(), x.end(), out.begin());
    };
    m.sample_shock = [](ConstSpan, Generator&, MutSpan) {};
    return analytic_view(m);
}

Dataset entry_dataset(Table const& t, EntryConfig const& cfg)
{
    if (t.header.size() != 4)
        throw UsageError("entry data needs columns y1,y2,z1,z2");
    auto index_of = [](std::vector<double> const& support, double z) {
        for (std::size_t k = 0; k < support.size(); ++k)
            if (std::abs(support[k] - z) < 1e-9)
                return k;
        throw UsageError("covariate value " + std::to_string(z)
                         + " is not in the support");
    };
    std::vector<double> values;
    for (auto const& r : t.rows)
    {
        auto const a = index_of(cfg.z1_support, r[2]);
        auto const b = index_of(cfg.z2_support, r[3]);
        values.insert(values.end(), r.begin(), r.end());
        values.push_back(static_cast<double>(a * cfg.z2_support.size() + b));
    }
    return Dataset(entry_record_width, std::move(values));
}

struct InferOptions
{
    std::string data;
    std::string model = "moments";
    std::string method = "gms";
    double alpha = 0.05;
    double mu = 0.02;
    std::size_t bootstrap = 1000;
    std::size_t draws = 1;
    std::size_t R2 = 100;
    bool analytic = false;
    std::uint64_t seed = 1;
    std::optional<std::string> kappa;
    std::optional<double> critical_value;
    std::vector<double> theta;
    std::string out;
};

int run_infer(InferOptions const& o)
{
    auto const table = read_csv(o.data);
    Stream const master(o.seed);
    Stream const panel_stream = master.substream(1);
    Stream const boot_stream = master.substream(2);
    auto const method = method_kind_from_string(o.method);

    std::ostringstream os;
    if (o.model == "intersection")
    {
        IntersectionConfig ic;
        ic.J = table.header.size();
        ic.n = table.rows.size();
        MethodSpec spec;
        spec.method = method;
        spec.analytic = o.analytic;
        spec.B = o.bootstrap;
        spec.mu = o.mu;
        spec.R2 = o.R2;
        spec.critical_value = o.critical_value;
        if (o.kappa)
            spec.kappa = kappa_rule_from_string(*o.kappa);
        if (method == MethodKind::smooth && !o.analytic && o.R2 <= o.draws)
            throw UsageError("--R2 must exceed --draws");
        auto const interval
            = intersection_interval(ic, to_dataset(table), spec, o.draws,
                                    o.alpha, panel_stream, boot_stream);
        os << "model,method,draws,upper_endpoint\n"
           << o.model << ',' << o.method << ','
           << (o.analytic ? 0 : o.draws) << ',';
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", interval.endpoint);
        os << buf << '\n';
    }
    else
    {
        MomentModel model;
        Dataset data;
        IndexSpec spec;
        std::vector<double> theta = o.theta;
        std::size_t draws = 1;
        KappaRule kappa = KappaRule::sqrt_log_n;
        RootScale scale = RootScale::original;
        if (o.model == "entry")
        {
            EntryConfig const cfg;
            data = entry_dataset(table, cfg);
            auto const base = entry_moment_model(cfg);
            model = o.analytic ? analytic_view(base) : base;
            if (theta.size() != 2)
                throw UsageError("entry inference needs --theta beta,delta");
            if (method != MethodKind::gms)
                throw UsageError("the entry game supports only --method gms");
            spec = IndexSpec::make(IndexKind::qlr, model.moments);
            draws = o.analytic ? 1 : o.draws;
            kappa = KappaRule::n_pow_1_16;
            scale = RootScale::bootstrap;
        }
        else
        {
            data = to_dataset(table);
            model = observed_moment_model(table.header.size());
            theta.clear();
            spec = IndexSpec::make(IndexKind::max_plus, model.moments);
        }
        if (o.kappa)
            kappa = kappa_rule_from_string(*o.kappa);

        CriticalValueSpec cv;
        cv.alpha = o.alpha;
        cv.degenerate = DegeneratePolicy::drop_zero;
        switch (method)
        {
            case MethodKind::naive:
                if (!o.critical_value)
                    throw UsageError("--method naive needs --critical-value");
                cv.method = Fixed{*o.critical_value};
                break;
            case MethodKind::gms:
                cv.method = GmsBootstrap{kappa, o.bootstrap, scale};
                break;
            case MethodKind::smooth:
                cv.method = SmoothedBootstrap{o.mu, o.bootstrap, o.R2};
                break;
        }
        auto const panel = simulate_panel(model, data, draws, panel_stream);
        auto const outcome = confidence_membership(theta, model, data, panel,
                                                   spec, cv, boot_stream);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%d", outcome.statistic,
                      outcome.critical_value, outcome.covered ? 1 : 0);
        os << "model,method,statistic,critical_value,member\n"
           << o.model << ',' << o.method << ',' << buf << '\n';
    }

    if (o.out.empty())
    {
        std::cout << os.str();
    }
    else
    {
        std::ofstream f(o.out, std::ios::binary);
        if (!f || !(f << os.str()))
            throw Error("failed writing '" + o.out + "'");
    }
    return 0;
}

//---------------------------------------------------------------------------//
struct IdsetOptions
{
    double beta = 0.9;
    double delta = -0.5;
    double select_prob = 0.7;
    std::vector<double> grid{0.5, 1.4, -1.5, -0.2, 0.025};
    std::string out;
};

int run_idset(IdsetOptions const& o)
{
    EntryConfig cfg;
    cfg.beta = o.beta;
    cfg.delta = o.delta;
    cfg.select_prob = o.select_prob;
    try
    {
        cfg.validate();
    }
    catch (ParameterError const& e)
    {
        throw UsageError(e.what());
    }
    if (o.grid.size() != 5 || !(o.grid[4] > 0) || o.grid[1] < o.grid[0]
        || o.grid[3] < o.grid[2])
        throw UsageError(
            "--grid expects beta_lo,beta_hi,delta_lo,delta_hi,step");
    auto const grid
        = make_theta_grid(o.grid[0], o.grid[1], o.grid[2], o.grid[3],
                          o.grid[4]);
    auto const set = identified_set_grid(cfg, grid);
    write_identified_set_csv(set, o.out);
    std::cout << "wrote " << grid.size() << " grid points ("
              << set.members().size() << " members) to " << o.out << '\n';
    return 0;
}

int run_selfcheck_command(std::uint64_t seed)
{
    bool ok = true;
    for (auto const& r : run_selfcheck(seed))
    {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": "
                  << r.detail << '\n';
        ok = ok && r.passed;
    }
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Confidence sets for moment inequalities with simulated "
                 "moments"};
    app.require_subcommand(1);

    Overrides run_over;
    std::string config_path;
    std::string run_out = "results.csv";
    auto* run = app.add_subcommand("run", "Run an experiment from a config");
    run->add_option("--config", config_path, "Experiment config (JSON)")
        ->required();
    run->add_option("--out", run_out, "Output CSV");
    add_overrides(run, run_over);

    Overrides rep_over;
    std::string table_name;
    std::string scale_name = "desk";
    std::string rep_out;
    auto* reproduce
        = app.add_subcommand("reproduce", "Reproduce a table preset");
    reproduce->add_option("table", table_name, "Table id")
        ->required()
        ->check(CLI::IsMember(
            {"T1", "T3", "T4", "T5", "T6", "T7", "T8", "T9"}));
    reproduce->add_option("--scale", scale_name, "Preset scale")
        ->check(CLI::IsMember({"full", "desk"}));
    reproduce->add_option("--out", rep_out, "Output CSV");
    add_overrides(reproduce, rep_over);

    InferOptions inf;
    auto* infer = app.add_subcommand(
        "infer", "Confidence-set membership or interval on supplied data");
    infer->add_option("--data", inf.data, "Data CSV with a header row")
        ->required();
    infer->add_option("--model", inf.model, "Data layout")
        ->check(CLI::IsMember({"moments", "intersection", "entry"}));
    infer->add_option("--method", inf.method, "Critical value method")
        ->check(CLI::IsMember({"naive", "gms", "smooth"}));
    infer->add_option("--alpha", inf.alpha, "Significance level")
        ->check(CLI::Range(0.0, 1.0));
    infer->add_option("--mu", inf.mu, "Smoothing parameter")
        ->check(CLI::PositiveNumber);
    infer->add_option("--bootstrap", inf.bootstrap, "Bootstrap replicates B")
        ->check(CLI::PositiveNumber);
    infer->add_option("--draws", inf.draws, "Simulation draws R")
        ->check(CLI::PositiveNumber);
    infer->add_option("--R2", inf.R2, "Centering draws for smoothing");
    infer->add_flag("--analytic", inf.analytic, "Use exact moments");
    infer->add_option("--seed", inf.seed, "Random seed");
    infer->add_option("--kappa", inf.kappa, "Selection tuning rule")
        ->check(CLI::IsMember({"sqrtLogN", "nPow1over16"}));
    infer->add_option("--critical-value", inf.critical_value,
                      "Fixed critical value for the naive method");
    infer->add_option("--theta", inf.theta, "Parameter value")
        ->delimiter(',');
    infer->add_option("--out", inf.out, "Output CSV (default stdout)");

    IdsetOptions ids;
    auto* idset = app.add_subcommand(
        "idset", "Export the entry-game identified set on a grid");
    idset->add_option("--beta", ids.beta, "True beta");
    idset->add_option("--delta", ids.delta, "True delta");
    idset->add_option("--select-prob", ids.select_prob,
                      "Probability of selecting (1,0) under multiplicity");
    idset->add_option("--grid", ids.grid,
                      "beta_lo,beta_hi,delta_lo,delta_hi,step")
        ->delimiter(',')
        ->expected(5);
    idset->add_option("--out", ids.out, "Output CSV")->required();

    std::uint64_t check_seed = 20240607;
    auto* selfcheck
        = app.add_subcommand("selfcheck", "Run the fast invariant suite");
    selfcheck->add_option("--seed", check_seed, "Random seed");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        app.exit(e);
        if (argc <= 1)
            std::cerr << app.help();
        return 1;
    }

    try
    {
        if (run->parsed())
        {
            auto cfg = load_config(config_path);
            apply(run_over, cfg);
            auto const result
                = run_experiment(cfg, RunOptions{run_over.timing});
            write_outputs(result, run_out);
        }
        else if (reproduce->parsed())
        {
            auto const id = table_id_from_string(table_name);
            auto cfg = table_preset(id, scale_from_string(scale_name));
            apply(rep_over, cfg);
            auto const result
                = run_experiment(cfg, RunOptions{rep_over.timing});
            write_outputs(result,
                          rep_out.empty() ? table_name + ".csv" : rep_out);
        }
        else if (infer->parsed())
        {
            return run_infer(inf);
        }
        else if (idset->parsed())
        {
            return run_idset(ids);
        }
        else if (selfcheck->parsed())
        {
            return run_selfcheck_command(check_seed);
        }
    }
    catch (ConfigError const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (UsageError const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
