#include <doctest.h>

#include <initializer_list>

#include "simineq/normal.hpp"

using namespace simineq;

TEST_CASE("normal cdf at reference points")
{
    CHECK(normal_cdf(0) == 0.5);
    CHECK(normal_cdf(1.96) == doctest::Approx(0.97500210485177952).epsilon(1e-14));
    CHECK(normal_cdf(-3) == doctest::Approx(0.0013498980316300933).epsilon(1e-12));
    CHECK(normal_cdf(2.5) + normal_cdf(-2.5) == doctest::Approx(1.0));
}

TEST_CASE("normal quantile inverts the cdf")
{
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
    CHECK(normal_quantile(1e-6) == doctest::Approx(-4.7534243088228987).epsilon(1e-12));
    for (double p : {0.001, 0.1, 0.3, 0.5, 0.77, 0.999})
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("normal quantile rejects probabilities outside (0, 1)")
{
    CHECK_THROWS(normal_quantile(0.0));
    CHECK_THROWS(normal_quantile(1.0));
}
