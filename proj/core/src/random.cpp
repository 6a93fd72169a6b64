#include "simineq/random.hpp"

namespace simineq {
namespace {
__extension__ typedef unsigned __int128 uint128;
}  // namespace

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Generator::Generator(std::uint64_t seed)
{
    // SplitMix64 expansion of the seed; never yields the all-zero state.
    std::uint64_t s = seed;
    for (auto& word : state_)
    {
        s += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        word = z ^ (z >> 31);
    }
}

std::size_t Generator::below(std::size_t n)
{
    // Lemire's multiply-shift with rejection; unbiased.
    auto const bound = static_cast<std::uint64_t>(n);
    auto x = (*this)();
    auto m = static_cast<uint128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound)
    {
        auto const threshold = (0 - bound) % bound;
        while (low < threshold)
        {
            x = (*this)();
            m = static_cast<uint128>(x) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::size_t>(m >> 64);
}

Stream Stream::substream(std::uint64_t counter) const
{
    return Stream(mix64(key_ ^ mix64(counter + 0x632be59bd9b4e019ULL)));
}

Stream Stream::substream(std::initializer_list<std::uint64_t> counters) const
{
    Stream s = *this;
    for (auto c : counters)
        s = s.substream(c);
    return s;
}

}  // namespace simineq
