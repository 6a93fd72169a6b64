#include <doctest.h>

#include <set>

#include "simineq/random.hpp"

using namespace simineq;

TEST_CASE("generator is reproducible")
{
    auto a = Stream(42).generator();
    auto b = Stream(42).generator();
    for (int i = 0; i < 100; ++i)
        CHECK(a() == b());
}

TEST_CASE("substreams differ from each other and from the parent")
{
    Stream const s(7);
    std::set<std::uint64_t> keys{s.key()};
    for (std::uint64_t c = 0; c < 1000; ++c)
        keys.insert(s.substream(c).key());
    CHECK(keys.size() == 1001);
    CHECK(s.substream({1, 2}).key() == s.substream(1).substream(2).key());
    CHECK(s.substream({1, 2}).key() != s.substream({2, 1}).key());
}

TEST_CASE("uniform and below stay in range")
{
    auto g = Stream(3).generator();
    double sum = 0;
    std::size_t const N = 200000;
    for (std::size_t i = 0; i < N; ++i)
    {
        double const u = g.uniform();
        REQUIRE(u >= 0);
        REQUIRE(u < 1);
        sum += u;
    }
    CHECK(sum / N == doctest::Approx(0.5).epsilon(0.01));

    std::vector<std::size_t> counts(7, 0);
    for (std::size_t i = 0; i < 70000; ++i)
    {
        auto const k = g.below(7);
        REQUIRE(k < 7);
        ++counts[k];
    }
    for (auto c : counts)
        CHECK(c == doctest::Approx(10000).epsilon(0.05));
}

TEST_CASE("normal draws have unit variance")
{
    auto g = Stream(11).generator();
    double s1 = 0, s2 = 0;
    std::size_t const N = 200000;
    for (std::size_t i = 0; i < N; ++i)
    {
        double const z = g.normal();
        s1 += z;
        s2 += z * z;
    }
    CHECK(std::abs(s1 / N) < 0.01);
    CHECK(s2 / N == doctest::Approx(1.0).epsilon(0.02));
}
