#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "simineq/error.hpp"
#include "simineq/harness.hpp"
#include "simineq/models/entry_game.hpp"
#include "simineq/selfcheck.hpp"

using namespace simineq;

namespace {

int failures = 0;

void report(int id, std::string const& what, bool pass, std::string const& detail,
            double seconds)
{
    std::printf("criterion %2d: %s %s (%s) [%.0fs]\n", id, pass ? "PASS" : "FAIL",
                what.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    failures += !pass;
}

void run_criterion(int id, std::string const& what,
                   std::function<bool(std::ostringstream&)> const& body)
{
    auto const start = std::chrono::steady_clock::now();
    std::ostringstream detail;
    bool pass = false;
    try
    {
        pass = body(detail);
    }
    catch (std::exception const& e)
    {
        detail << "error: " << e.what();
    }
    double const secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    report(id, what, pass, detail.str(), secs);
}

MethodSpec find_method(ExperimentConfig const& cfg, MethodKind kind,
                       bool analytic = false, double mu = 0)
{
    for (auto const& m : cfg.methods)
        if (m.method == kind && m.analytic == analytic
            && (kind != MethodKind::smooth || m.mu == mu))
            return m;
    throw Error("preset has no such method");
}

CellResult cell(TableId table, Scale scale, std::size_t J, std::size_t n,
                std::size_t R, MethodSpec const& method)
{
    auto cfg = table_preset(table, scale);
    Cell c{n, method.analytic ? 0 : R, J, method};
    return run_coverage_cell(cfg, c);
}

bool within(std::ostringstream& os, std::string const& label, double got,
            double want, double tol)
{
    bool const ok = std::abs(got - want) <= tol;
    os << label << " " << got << " vs " << want << "+-" << tol
       << (ok ? "" : " MISS") << "; ";
    return ok;
}

std::string slurp(std::string const& path)
{
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int run_cli(std::string const& args)
{
    int const status
        = std::system((std::string(SIMINEQ_CLI_PATH) + " " + args).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double hausdorff_or_inf(std::vector<Vector> const& a, std::vector<Vector> const& b)
{
    if (a.empty() || b.empty())
        return std::numeric_limits<double>::infinity();
    return hausdorff_distance(a, b);
}

}  // namespace

int main()
{
    auto const desk = Scale::desk;

    run_criterion(1, "naive intervals, intersection bounds", [&](auto& os) {
        auto const cfg = table_preset(TableId::T1, desk);
        auto const sim = find_method(cfg, MethodKind::naive);
        auto const ana = find_method(cfg, MethodKind::naive, true);
        bool ok = true;
        ok &= within(os, "J=2 n=250 analytic",
                     cell(TableId::T1, desk, 2, 250, 0, ana).coverage, 0.954, 0.03);
        ok &= within(os, "J=2 n=250 R=1",
                     cell(TableId::T1, desk, 2, 250, 1, sim).coverage, 0.733, 0.03);
        ok &= within(os, "J=2 n=250 R=20",
                     cell(TableId::T1, desk, 2, 250, 20, sim).coverage, 0.945, 0.03);
        ok &= within(os, "J=30 n=100 R=1",
                     cell(TableId::T1, desk, 30, 100, 1, sim).coverage, 0.245, 0.05);
        return ok;
    });

    run_criterion(2, "critical-value correction coverage", [&](auto& os) {
        auto const gms = find_method(table_preset(TableId::T4, desk), MethodKind::gms);
        bool ok = true;
        ok &= within(os, "J=5 n=250 R=1",
                     cell(TableId::T4, desk, 5, 250, 1, gms).coverage, 0.998, 0.01);
        ok &= within(os, "J=10 n=250 R=5",
                     cell(TableId::T4, desk, 10, 250, 5, gms).coverage, 0.980, 0.02);
        return ok;
    });

    run_criterion(3, "smoothed coverage", [&](auto& os) {
        auto const cfg = table_preset(TableId::T5, desk);
        bool ok = true;
        ok &= within(os, "J=5 n=250 R=1 mu=0.02",
                     cell(TableId::T5, desk, 5, 250, 1,
                          find_method(cfg, MethodKind::smooth, false, 0.02))
                         .coverage,
                     0.961, 0.03);
        ok &= within(os, "J=30 n=1000 R=20 mu=0.04",
                     cell(TableId::T5, desk, 30, 1000, 20,
                          find_method(cfg, MethodKind::smooth, false, 0.04))
                         .coverage,
                     0.944, 0.03);
        return ok;
    });

    run_criterion(4, "median excess lengths", [&](auto& os) {
        auto const gms = find_method(table_preset(TableId::T6, desk), MethodKind::gms);
        auto const sm = find_method(table_preset(TableId::T7, desk),
                                    MethodKind::smooth, false, 0.02);
        bool ok = true;
        ok &= within(os, "CV correction J=5 n=100 R=1",
                     *cell(TableId::T6, desk, 5, 100, 1, gms).median_excess_length,
                     0.081, 0.01);
        ok &= within(os, "smoothed mu=0.02 J=5 n=100 R=1",
                     *cell(TableId::T7, desk, 5, 100, 1, sm).median_excess_length,
                     0.050, 0.01);
        return ok;
    });

    run_criterion(5, "slack design spot checks", [&](auto& os) {
        auto const sm = find_method(table_preset(TableId::T9, desk),
                                    MethodKind::smooth, false, 0.02);
        auto const gms = find_method(table_preset(TableId::T8, desk), MethodKind::gms);
        bool ok = true;
        ok &= within(os, "smoothed J=10 n=250 R=10 coverage",
                     cell(TableId::T9, desk, 10, 250, 10, sm).coverage, 0.986, 0.02);
        ok &= within(os, "CV correction J=30 n=100 R=1 length",
                     *cell(TableId::T8, desk, 30, 100, 1, gms).median_excess_length,
                     0.091, 0.012);
        return ok;
    });

    run_criterion(6, "entry game coverage, desk scale", [&](auto& os) {
        auto const cfg = table_preset(TableId::T3, desk);
        auto const ana = find_method(cfg, MethodKind::gms, true);
        auto const sim = find_method(cfg, MethodKind::gms);
        os << "reps " << cfg.reps << " B " << sim.B << "; ";
        bool ok = true;
        ok &= within(os, "n=250 analytic",
                     cell(TableId::T3, desk, 30, 250, 0, ana).coverage, 0.921, 0.06);
        ok &= within(os, "n=250 R=1",
                     cell(TableId::T3, desk, 30, 250, 1, sim).coverage, 0.391, 0.06);
        ok &= within(os, "n=1000 R=5",
                     cell(TableId::T3, desk, 30, 1000, 5, sim).coverage, 0.947, 0.04);
        return ok;
    });

    run_criterion(7, "selection disagreements, entry game n=500 R=20", [&](auto& os) {
        // Selection depends only on the sample, so the full 1000 replications
        // are affordable without the bootstrap.
        EntryConfig const ec;
        auto const model = entry_moment_model(ec);
        auto const exact = analytic_view(model);
        std::size_t const n = 500, R = 20, reps = 1000;
        double const kappa = kappa_value(KappaRule::n_pow_1_16, n);
        std::vector<double> const theta(entry_theta_upper.begin(),
                                        entry_theta_upper.end());
        Stream const master(20240607);
        std::size_t count = 0;
        for (std::size_t k = 0; k < reps; ++k)
        {
            auto const data = gen_entry_data(ec, n, master.substream({7, 0, k}));
            auto const panel = simulate_panel(model, data, R, master.substream({7, 1, k}));
            auto const sim = moment_stats(model, data, panel, theta, CovarianceMode::diagonal);
            auto const ana = moment_stats(exact, data, SimPanel(n, 1, 0), theta,
                                          CovarianceMode::diagonal);
            count += selection_disagreement(ana, sim, kappa);
        }
        return within(os, "count out of 1000", static_cast<double>(count), 448, 60);
    });

    run_criterion(8, "property suite", [&](auto& os) {
        bool ok = true;
        for (auto const& r : run_selfcheck(20240607))
        {
            os << r.name << " " << (r.passed ? "ok" : "FAILED") << " " << r.detail << "; ";
            ok &= r.passed;
        }
        return ok;
    });

    run_criterion(9, "level-set estimate converges (paired runs)", [&](auto& os) {
        EntryConfig const ec;
        auto const grid = make_theta_grid(0.5, 1.4, -1.5, -0.2, 0.025);
        auto const truth = identified_set_grid(ec, grid).members();
        auto const model = entry_moment_model(ec);
        Stream const master(20240607);
        auto distance = [&](std::size_t n, std::size_t k) {
            auto const data = gen_entry_data(ec, n, master.substream({9, n, 0, k}));
            auto const panel = simulate_panel(model, data, 1, master.substream({9, n, 1, k}));
            auto const est = level_set_estimate(model, data, panel, grid,
                                                std::log(static_cast<double>(n)));
            return hausdorff_or_inf(est.members(), truth);
        };
        std::size_t wins = 0;
        double d_small = 0, d_large = 0;
        for (std::size_t k = 0; k < 100; ++k)
        {
            double const a = distance(250, k);
            double const b = distance(4000, k);
            wins += b < a;
            d_small += a / 100;
            d_large += b / 100;
        }
        os << "n=4000 closer in " << wins << "/100 (need >= 80); mean distance "
           << d_small << " at n=250, " << d_large << " at n=4000";
        return wins >= 80;
    });

    run_criterion(10, "identified-set boundary", [&](auto& os) {
        EntryConfig const ec;
        std::vector<Vector> const pts{(Vector(2) << 0.8880, -0.4015).finished(),
                                      (Vector(2) << 0.8880, -0.3915).finished()};
        auto const set = identified_set_grid(ec, pts);
        os << "(0.8880,-0.4015) member=" << set.member[0]
           << " slack " << entry_identified_slack(ec, {0.8880, -0.4015})
           << "; (0.8880,-0.3915) member=" << set.member[1]
           << " slack " << entry_identified_slack(ec, {0.8880, -0.3915});
        return set.member[0] && !set.member[1];
    });

    run_criterion(11, "CSV identical across --jobs", [&](auto& os) {
        {
            std::ofstream f("determinism_intersection.json");
            f << R"({"model": {"kind": "intersection", "slackDesign": true},
                     "nValues": [100], "RValues": [1, 5], "JValues": [5, 10], "reps": 200,
                     "methods": ["naive", {"method": "gms", "B": 200},
                                 {"method": "smooth", "mu": 0.02, "B": 200}]})";
        }
        {
            std::ofstream f("determinism_entry.json");
            f << R"({"model": "entry", "nValues": [250], "RValues": [1], "reps": 40,
                     "methods": [{"method": "gms", "B": 100, "kappa": "nPow1over16"},
                                 {"method": "gms", "B": 100, "kappa": "nPow1over16",
                                  "analytic": true}]})";
        }
        bool ok = true;
        for (std::string const name : {"determinism_intersection", "determinism_entry"})
        {
            int const a = run_cli("run --config " + name + ".json --out " + name
                                  + "_1.csv --jobs 1 --seed 99 > /dev/null");
            int const b = run_cli("run --config " + name + ".json --out " + name
                                  + "_4.csv --jobs 4 --seed 99 > /dev/null");
            auto const ca = slurp(name + "_1.csv");
            auto const cb = slurp(name + "_4.csv");
            bool const same = a == 0 && b == 0 && !ca.empty() && ca == cb;
            os << name << (same ? " identical" : " DIFFERENT") << " ("
               << ca.size() << " bytes); ";
            ok &= same;
        }
        return ok;
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
