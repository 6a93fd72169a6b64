#include <doctest.h>

#include <cmath>

#include "simineq/error.hpp"
#include "simineq/models/intersection.hpp"
#include "simineq/normal.hpp"

using namespace simineq;

TEST_CASE("naive critical value")
{
    CHECK(naive_critical_value(2, 0.05) == doctest::Approx(0.56421795442518152).epsilon(1e-13));
    CHECK(naive_critical_value(5, 0.05) == doctest::Approx(0.66934503297883297).epsilon(1e-13));
    CHECK(naive_critical_value(10, 0.05) == doctest::Approx(0.74128176765116438).epsilon(1e-13));
    CHECK(naive_critical_value(30, 0.05) == doctest::Approx(0.84510589666979974).epsilon(1e-13));
    double const sim = naive_critical_value_simulated(5, 0.05, 200000, Stream(3));
    CHECK(sim == doctest::Approx(0.66934503297883297).epsilon(0.01));
    CHECK_THROWS_AS(naive_critical_value(0, 0.05), ParameterError);
}

TEST_CASE("data layout and determinism")
{
    IntersectionConfig cfg;
    cfg.J = 3;
    cfg.n = 50;
    auto const a = gen_intersection_data(cfg, Stream(1));
    auto const b = gen_intersection_data(cfg, Stream(1));
    CHECK(a.size() == 50);
    CHECK(a.width() == 3);
    CHECK(a.values() == b.values());

    cfg.first_stage = 40;
    auto const c = gen_intersection_data(cfg, Stream(1));
    CHECK(c.width() == 6);
}

TEST_CASE("slack design shifts the leading columns")
{
    auto const cfg = IntersectionConfig::slack_design(10, 400);
    CHECK(cfg.slack_count == 2);
    CHECK(cfg.slack_shift == doctest::Approx(0.05));
    IntersectionConfig big = cfg;
    big.n = 200000;
    auto const d = gen_intersection_data(big, Stream(2));
    std::vector<double> mean(10, 0);
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < 10; ++j)
            mean[j] += d.row(i)[j] / static_cast<double>(d.size());
    CHECK(mean[0] == doctest::Approx(0.05).epsilon(0.2));
    CHECK(mean[1] == doctest::Approx(0.05).epsilon(0.2));
    CHECK(std::abs(mean[2]) < 0.01);
    CHECK(intersection_upper_bound(cfg) == 0.5);
    IntersectionConfig all = cfg;
    all.slack_count = 10;
    CHECK(intersection_upper_bound(all) == doctest::Approx(normal_cdf(0.05 / std::sqrt(2.0))));
}

TEST_CASE("first-stage locations have variance 1/N1")
{
    IntersectionConfig cfg;
    cfg.J = 2;
    cfg.n = 5;
    cfg.first_stage = 25;
    double s = 0, s2 = 0;
    std::size_t const trials = 4000;
    for (std::size_t t = 0; t < trials; ++t)
    {
        auto const d = gen_intersection_data(cfg, Stream(4).substream(t));
        for (std::size_t i = 1; i < d.size(); ++i)
            CHECK(d.row(i)[2] == d.row(0)[2]);
        s += d.row(0)[2];
        s2 += d.row(0)[2] * d.row(0)[2];
    }
    double const n = static_cast<double>(trials);
    CHECK(std::abs(s / n) < 4 * std::sqrt(1.0 / 25 / n));
    CHECK(s2 / n == doctest::Approx(1.0 / 25).epsilon(0.07));
}

TEST_CASE("analytic moment")
{
    IntersectionConfig cfg;
    cfg.J = 2;
    auto const model = intersection_moment_model(cfg);
    std::vector<double> const x{0.3, -1.2};
    std::vector<double> const theta{0.4};
    std::vector<double> out(2);
    model.analytic(x, theta, out);
    CHECK(out[0] == doctest::Approx(0.4 - normal_cdf(0.3)));
    CHECK(out[1] == doctest::Approx(0.4 - normal_cdf(-1.2)));
}

TEST_CASE("fast sampler matches the generic simulator in distribution")
{
    IntersectionConfig cfg;
    cfg.J = 2;
    auto const fast_model = intersection_moment_model(cfg);
    auto generic_model = fast_model;
    generic_model.average_sampler = nullptr;
    Dataset const data(2, {0.3, -1.0});
    std::vector<double> const theta{0.0};
    for (std::size_t R : {1u, 7u, 100u})
    {
        auto fast = make_average_sampler(fast_model, data, theta, R);
        auto generic = make_average_sampler(generic_model, data, theta, R);
        auto g1 = Stream(10 + R).generator();
        auto g2 = Stream(20 + R).generator();
        std::size_t const N = 60000;
        double f1 = 0, f2 = 0, q1 = 0, q2 = 0;
        std::vector<double> o(2);
        for (std::size_t k = 0; k < N; ++k)
        {
            fast(0, g1, o);
            f1 += o[1];
            q1 += o[1] * o[1];
            generic(0, g2, o);
            f2 += o[1];
            q2 += o[1] * o[1];
        }
        double const p = normal_cdf(-1.0);
        double const var = p * (1 - p) / static_cast<double>(R);
        double const se = std::sqrt(var / N);
        CHECK(std::abs(f1 / N + p) < 4 * se);
        CHECK(std::abs(f2 / N + p) < 4 * se);
        CHECK(q1 / N - (f1 / N) * (f1 / N) == doctest::Approx(var).epsilon(0.05));
        CHECK(q2 / N - (f2 / N) * (f2 / N) == doctest::Approx(var).epsilon(0.05));
    }
}
