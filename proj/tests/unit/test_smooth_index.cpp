#include <doctest.h>

#include <cmath>

#include "simineq/error.hpp"
#include "simineq/qlr.hpp"
#include "simineq/random.hpp"
#include "simineq/smooth_index.hpp"

using namespace simineq;

namespace {

Vector m3() { return Vector{{0.3, -0.2, 0.05}}; }
Vector v3() { return Vector{{1.0, 4.0, 0.25}}; }

}  // namespace

TEST_CASE("smoothing constants")
{
    auto const sp = IndexSpec::make(IndexKind::sum_plus, 7).params;
    CHECK(sp.alpha == 7);
    CHECK(sp.beta == doctest::Approx(7 * std::log(2.0)));
    CHECK(sp.K == 0);
    CHECK(sp.chi == 1);

    auto const mp = IndexSpec::make(IndexKind::max_plus, 7).params;
    CHECK(mp.alpha == 1);
    CHECK(mp.beta == doctest::Approx(std::log(8.0)));
    CHECK(mp.chi == 1);

    auto const sm = IndexSpec::make(IndexKind::soft_min_boundary, 7).params;
    CHECK(sm.beta == doctest::Approx(std::log(7.0)));

    CHECK(IndexSpec::make(IndexKind::qlr, 3).params.chi == 2);
    CHECK(IndexSpec::make(IndexKind::sum_plus_sq, 3).params.chi == 2);
    CHECK(IndexSpec::make(IndexKind::sum_plus, 3).certified());
    CHECK_FALSE(IndexSpec::make(IndexKind::qlr, 3).certified());
    CHECK_FALSE(IndexSpec::make(IndexKind::sum_plus_sq, 3).certified());
}

TEST_CASE("kind names round trip")
{
    for (auto k : {IndexKind::sum_plus, IndexKind::max_plus,
                   IndexKind::soft_min_boundary, IndexKind::qlr,
                   IndexKind::sum_plus_sq})
        CHECK(index_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(index_kind_from_string("nope"), ParameterError);
}

TEST_CASE("index values at a reference point")
{
    auto const m = m3();
    auto const v = v3();
    double const mu = 0.1;
    auto spec = IndexSpec::make(IndexKind::sum_plus, 3);
    CHECK(eval_S_diag(spec, m, v) == doctest::Approx(0.4));
    CHECK(eval_S_mu_diag(spec, m, v, mu).value
          == doctest::Approx(0.46751107266101877).epsilon(1e-13));

    spec = IndexSpec::make(IndexKind::max_plus, 3);
    CHECK(eval_S_diag(spec, m, v) == doctest::Approx(0.3));
    CHECK(eval_S_mu_diag(spec, m, v, mu).value
          == doctest::Approx(0.31851824526038119).epsilon(1e-13));

    spec = IndexSpec::make(IndexKind::soft_min_boundary, 3);
    CHECK(eval_S_diag(spec, m, v) == doctest::Approx(-0.2));
    CHECK(eval_S_mu_diag(spec, m, v, mu).value
          == doctest::Approx(-0.20850972463643103).epsilon(1e-13));

    spec = IndexSpec::make(IndexKind::sum_plus_sq, 3);
    CHECK(eval_S_diag(spec, m, v) == doctest::Approx(0.1));
    CHECK_THROWS_AS(eval_S_mu_diag(spec, m, v, mu), ParameterError);

    spec = IndexSpec::make(IndexKind::max_plus, 3);
    CHECK_THROWS_AS(eval_S_mu_diag(spec, m, v, 0.0), ParameterError);
}

TEST_CASE("full and diagonal evaluations agree for studentized kinds")
{
    Matrix sigma{{1.0, 0.5, 0.0}, {0.5, 4.0, 0.3}, {0.0, 0.3, 0.25}};
    for (auto k : {IndexKind::sum_plus, IndexKind::max_plus,
                   IndexKind::sum_plus_sq})
    {
        auto const spec = IndexSpec::make(k, 3);
        CHECK(eval_S(spec, m3(), sigma)
              == doctest::Approx(eval_S_diag(spec, m3(), v3())));
    }
}

TEST_CASE("smoothed Qlr equals the scaled distance")
{
    Matrix const sigma{{1.0, 0.3, 0.1}, {0.3, 2.0, -0.4}, {0.1, -0.4, 1.5}};
    Vector const m{{0.5, -0.3, 0.8}};
    auto const spec = IndexSpec::make(IndexKind::qlr, 3);
    CHECK(eval_S(spec, m, sigma)
          == doctest::Approx(0.62751677852348997).epsilon(1e-12));
    for (double mu : {0.01, 0.1, 1.0})
    {
        auto const e = eval_S_mu(spec, m, sigma, mu);
        CHECK(e.value
              == doctest::Approx(0.62751677852348997 / (1 + 2 * mu))
                     .epsilon(1e-12));
    }
}

TEST_CASE("approximation gaps stay within beta mu")
{
    auto g = Stream(21).generator();
    for (int t = 0; t < 2000; ++t)
    {
        std::size_t const J = 1 + g.below(12);
        double const mu = 0.001 + g.uniform();
        Vector m(static_cast<Eigen::Index>(J));
        Vector v(static_cast<Eigen::Index>(J));
        for (Eigen::Index j = 0; j < m.size(); ++j)
        {
            m[j] = 3 * g.normal();
            v[j] = 0.1 + g.uniform();
        }
        Matrix const sigma = v.asDiagonal();
        auto spec = IndexSpec::make(IndexKind::sum_plus, J);
        double gap = approximation_gap(spec, m, sigma, mu);
        CHECK(gap >= -1e-12);
        CHECK(gap <= spec.params.beta * mu + 1e-12);

        spec = IndexSpec::make(IndexKind::max_plus, J);
        gap = approximation_gap(spec, m, sigma, mu);
        CHECK(gap >= -1e-12);
        CHECK(gap <= spec.params.beta * mu + 1e-12);

        spec = IndexSpec::make(IndexKind::soft_min_boundary, J);
        gap = approximation_gap(spec, m, sigma, mu);
        CHECK(gap <= 1e-12);
        CHECK(gap >= -spec.params.beta * mu - 1e-12);
    }
}

TEST_CASE("gradients match central differences")
{
    auto g = Stream(22).generator();
    for (int t = 0; t < 200; ++t)
    {
        std::size_t const J = 1 + g.below(6);
        auto const d = static_cast<Eigen::Index>(J);
        Vector m(d);
        Matrix a(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
        {
            m[i] = g.normal();
            for (Eigen::Index j = 0; j < d; ++j)
                a(i, j) = g.normal();
        }
        Matrix sigma = a * a.transpose() / static_cast<double>(J);
        sigma.diagonal().array() += 0.3;
        for (auto k : {IndexKind::sum_plus, IndexKind::max_plus,
                       IndexKind::soft_min_boundary, IndexKind::qlr})
        {
            auto const spec = IndexSpec::make(k, J);
            CHECK(gradient_check(spec, m, sigma, 0.2, 1e-5) <= 1e-6);
        }
    }
}

TEST_CASE("log-sum-exp is accurate for tiny and huge arguments")
{
    CHECK(log_sum_exp(Vector{{-40.0}}, 1) == doctest::Approx(std::exp(-40.0)).epsilon(1e-12));
    CHECK(log_sum_exp(Vector{{800.0, 800.0}})
          == doctest::Approx(800 + std::log(2.0)));
    CHECK(log_sum_exp(Vector{{0.0, 0.0}}, 1) == doctest::Approx(std::log(3.0)));
    CHECK(log_sum_exp(Vector{{5.0}}, 1) == doctest::Approx(std::log1p(std::exp(5.0))));
}
