#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "simineq/error.hpp"
#include "simineq/harness.hpp"

using namespace simineq;

namespace {

std::string slurp(std::string const& path)
{
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::size_t count_lines(std::string const& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

int run_cli(std::string const& args)
{
    char const* cli = std::getenv("SIMINEQ_CLI");
    REQUIRE(cli != nullptr);
    int const status = std::system((std::string(cli) + " " + args).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig small_config()
{
    ExperimentConfig cfg;
    cfg.n_values = {100};
    cfg.R_values = {1, 5};
    cfg.J_values = {5};
    cfg.reps = 20;
    MethodSpec naive;
    MethodSpec gms;
    gms.method = MethodKind::gms;
    gms.B = 60;
    MethodSpec smooth;
    smooth.method = MethodKind::smooth;
    smooth.B = 60;
    smooth.R2 = 20;
    cfg.methods = {naive, gms, smooth};
    return cfg;
}

MomentStats stats_of(Vector m, Vector v, std::size_t n)
{
    MomentStats s;
    s.mbar = std::move(m);
    s.vdiag = std::move(v);
    s.n = n;
    return s;
}

}  // namespace

TEST_CASE("cell expansion")
{
    auto t1 = table_preset(TableId::T1, Scale::desk);
    CHECK(expand_cells(t1).size() == 4 * 3 * 4 + 4 * 3);
    auto t3 = table_preset(TableId::T3, Scale::desk);
    CHECK(t3.reps == 300);
    CHECK(t3.methods[0].B == 300);
    CHECK(expand_cells(t3).size() == 4 * 5);
    CHECK(table_preset(TableId::T3, Scale::full).reps == 1000);
    CHECK(table_preset(TableId::T4, Scale::desk).reps == 1000);

    auto const cells = expand_cells(small_config());
    REQUIRE(cells.size() == 6);
    CHECK(cells[0].method.method == MethodKind::naive);
    CHECK(cells[0].R == 1);
    CHECK(cells[1].R == 5);
    CHECK(cells[2].method.method == MethodKind::gms);
}

TEST_CASE("selection disagreement")
{
    auto const a = stats_of(Vector{{0.0, -0.5, 0.1}}, Vector{{1.0, 1.0, 1.0}}, 100);
    CHECK_FALSE(selection_disagreement(a, a, 1.0));
    // xi = 10 * m / kappa; moment 1 moves from -5 to -0.5.
    auto const b = stats_of(Vector{{0.0, -0.05, 0.1}}, Vector{{1.0, 1.0, 1.0}}, 100);
    CHECK(selection_disagreement(a, b, 1.0));
    CHECK(gms_selection(a, 1.0) == std::vector<std::size_t>{0, 2});
    auto const zero = stats_of(Vector{{0.0, 0.0}}, Vector{{1.0, 0.0}}, 100);
    CHECK(gms_selection(zero, 1.0) == std::vector<std::size_t>{0});
}

TEST_CASE("infinite fixed critical value covers every replication")
{
    ExperimentConfig cfg = small_config();
    cfg.methods.resize(1);
    cfg.methods[0].critical_value = std::numeric_limits<double>::infinity();
    cfg.R_values = {1};
    auto const r = run_experiment(cfg);
    REQUIRE(r.cells.size() == 1);
    CHECK(r.cells[0].coverage == 1.0);
    CHECK(r.cells[0].covered == cfg.reps);
}

TEST_CASE("results do not depend on the number of workers")
{
    ExperimentConfig cfg = small_config();
    auto const serial = run_experiment(cfg);
    cfg.parallelism = 3;
    auto const parallel = run_experiment(cfg);
    CHECK(results_csv(serial) == results_csv(parallel));
    for (auto const& c : serial.cells)
    {
        CHECK(c.coverage * static_cast<double>(c.reps)
              == doctest::Approx(static_cast<double>(c.covered)));
        CHECK(c.median_excess_length.has_value());
        CHECK_FALSE(c.selection_disagreements.has_value());
        CHECK(c.wall_seconds == 0);
    }
}

TEST_CASE("entry cells count selection disagreements")
{
    ExperimentConfig cfg;
    cfg.model.kind = ModelKind::entry;
    cfg.n_values = {250};
    cfg.R_values = {1};
    cfg.J_values = {30};
    cfg.reps = 5;
    MethodSpec gms;
    gms.method = MethodKind::gms;
    gms.kappa = KappaRule::n_pow_1_16;
    gms.B = 30;
    MethodSpec analytic = gms;
    analytic.analytic = true;
    cfg.methods = {analytic, gms};
    auto const r = run_experiment(cfg);
    REQUIRE(r.cells.size() == 2);
    CHECK_FALSE(r.cells[0].selection_disagreements.has_value());
    REQUIRE(r.cells[1].selection_disagreements.has_value());
    CHECK(*r.cells[1].selection_disagreements <= 5);
    CHECK_FALSE(r.cells[1].median_excess_length.has_value());
}

TEST_CASE("a failing replication names the cell and replication")
{
    ExperimentConfig cfg = small_config();
    cfg.n_values = {2};
    cfg.R_values = {1};
    cfg.methods = {cfg.methods[1]};
    cfg.reps = 30;
    try
    {
        run_experiment(cfg);
        FAIL("expected an error");
    }
    catch (Error const& e)
    {
        std::string const what = e.what();
        CHECK(what.find("n=2") != std::string::npos);
        CHECK(what.find("replication") != std::string::npos);
    }
}

TEST_CASE("csv export")
{
    ExperimentResult empty;
    CHECK(results_csv(empty) == std::string(csv_header) + "\n");

    ExperimentConfig cfg = small_config();
    cfg.methods.resize(1);
    cfg.R_values = {1};
    auto const r = run_experiment(cfg);
    auto const csv = results_csv(r);
    CHECK(count_lines(csv) == 2);
    CHECK(csv.find("intersection,100,1,5,naive,,,20,") != std::string::npos);

    export_results(r, "harness_test.csv", ExportFormat::csv);
    auto const first = slurp("harness_test.csv");
    export_results(r, "harness_test.csv", ExportFormat::csv);
    CHECK(slurp("harness_test.csv") == first);
    CHECK(first == csv);
    std::remove("harness_test.csv");

    CHECK_THROWS_AS(export_results(r, "/nonexistent-dir/x.csv", ExportFormat::csv), Error);
}

TEST_CASE("config parsing")
{
    auto const cfg = parse_config(R"({
        "model": {"kind": "intersection", "slackDesign": true},
        "nValues": [100, 250], "RValues": [1], "JValues": [5],
        "reps": 10, "alpha": 0.1, "masterSeed": 7, "parallelism": 2,
        "methods": ["naive", {"method": "gms", "B": 50, "kappa": "nPow1over16"},
                    {"method": "smooth", "mu": 0.04, "R2": 30}]
    })");
    CHECK(cfg.model.slack_design);
    CHECK(cfg.n_values == std::vector<std::size_t>{100, 250});
    CHECK(cfg.alpha == 0.1);
    CHECK(cfg.master_seed == 7);
    REQUIRE(cfg.methods.size() == 3);
    CHECK(cfg.methods[1].B == 50);
    CHECK(cfg.methods[1].kappa == KappaRule::n_pow_1_16);
    CHECK(cfg.methods[2].mu == 0.04);

    auto const again = parse_config(config_to_string(cfg));
    CHECK(config_to_string(again) == config_to_string(cfg));

    auto key_of = [](std::string const& text) {
        try
        {
            parse_config(text);
        }
        catch (ConfigError const& e)
        {
            return e.key();
        }
        return std::string("<none>");
    };
    CHECK(key_of(R"({"model": "intersection", "methods": ["naive"], "bogus": 1})") == "bogus");
    CHECK(key_of(R"({"model": "intersection", "methods": [{"method": "gms", "Bee": 3}]})") == "methods.Bee");
    CHECK(key_of(R"({"model": "intersection", "methods": ["naive"], "reps": 0})") == "reps");
    CHECK(key_of(R"({"model": "intersection", "methods": ["naive"], "alpha": 1.5})") == "alpha");
    CHECK(key_of(R"({"model": "entry", "methods": ["naive"]})") == "methods");
    CHECK(key_of(R"({"model": "intersection", "methods": [{"method": "smooth", "R2": 5}], "RValues": [5]})") == "methods");
    CHECK(key_of(R"({"model": "circle", "methods": ["naive"]})") == "model");
    CHECK(key_of(R"({"model": "intersection", "methods": ["naive"], "nValues": "x"})") == "nValues");
    CHECK(key_of("{not json") == "<document>");
}

TEST_CASE("command line")
{
    CHECK(run_cli("> /dev/null 2>&1") == 1);
    CHECK(run_cli("selfcheck > /dev/null") == 0);
    CHECK(run_cli("reproduce T2 > /dev/null 2>&1") == 1);

    {
        std::ofstream os("cli_bad.json");
        os << R"({"model": "intersection", "methods": ["naive"], "nValuez": [1]})";
    }
    CHECK(run_cli("run --config cli_bad.json --out cli_bad.csv > /dev/null 2> cli_err.txt") == 1);
    CHECK(slurp("cli_err.txt").find("nValuez") != std::string::npos);

    {
        std::ofstream os("cli_fail.json");
        os << R"({"model": "intersection", "nValues": [2], "RValues": [1], "JValues": [5],
                  "reps": 30, "methods": [{"method": "gms", "B": 60}]})";
    }
    CHECK(run_cli("run --config cli_fail.json --out cli_fail.csv > /dev/null 2> cli_err.txt") == 2);
    CHECK(slurp("cli_err.txt").find("replication") != std::string::npos);

    CHECK(run_cli("reproduce T1 --scale desk --out cli_t1.csv --jobs 1 > /dev/null") == 0);
    auto const t1 = slurp("cli_t1.csv");
    CHECK(count_lines(t1) == 1 + 60);
    CHECK(slurp("cli_t1.csv.json").find("\"nValues\"") != std::string::npos);

    CHECK(run_cli("idset --out cli_ids.csv --grid 0.8,0.9,-0.5,-0.4,0.05 > /dev/null") == 0);
    CHECK(count_lines(slurp("cli_ids.csv")) == 1 + 9);

    {
        std::ofstream os("cli_moments.csv");
        os << "m1,m2\n";
        for (int i = 0; i < 40; ++i)
            os << (i % 5) * 0.1 - 0.5 << ',' << (i % 3) * 0.2 - 0.3 << '\n';
    }
    CHECK(run_cli("infer --data cli_moments.csv --method gms --bootstrap 100 --out cli_inf.csv") == 0);
    auto const inf = slurp("cli_inf.csv");
    CHECK(inf.rfind("model,method,statistic,critical_value,member\nmoments,gms,", 0) == 0);
    CHECK(run_cli("infer --data cli_moments.csv --method naive > /dev/null 2>&1") == 1);

    for (char const* f : {"cli_bad.json", "cli_bad.csv", "cli_err.txt", "cli_fail.json",
                          "cli_fail.csv", "cli_t1.csv", "cli_t1.csv.json", "cli_ids.csv",
                          "cli_moments.csv", "cli_inf.csv"})
        std::remove(f);
}
