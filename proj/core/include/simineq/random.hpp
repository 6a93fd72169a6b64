#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace simineq {

//---------------------------------------------------------------------------//
/*!
 * Pseudo-random generator (xoshiro256**) with a normal-deviate helper.
 *
 * Satisfies UniformRandomBitGenerator so it can feed <random> distributions.
 * Generators are created from a Stream and are never shared between workers.
 */
class Generator
{
  public:
    using result_type = std::uint64_t;

    explicit Generator(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max()
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()()
    {
        auto const result = rotl(state_[1] * 5, 7) * 9;
        auto const t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    //! Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    //! Standard normal deviate.
    double normal() { return normal_(*this); }

    //! Uniform index in [0, n); n must be positive.
    std::size_t below(std::size_t n);

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k)
    {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_;
    std::normal_distribution<double> normal_;
};

//---------------------------------------------------------------------------//
/*!
 * Immutable handle on a reproducible random sub-stream.
 *
 * A stream is a 64-bit key. Child streams are derived by hashing the parent
 * key with a counter, so the draws used for (replication, bootstrap,
 * observation) do not depend on the order in which work is scheduled.
 */
class Stream
{
  public:
    constexpr explicit Stream(std::uint64_t seed) : key_(seed) {}

    //! Child stream for the given counter.
    Stream substream(std::uint64_t counter) const;

    //! Child stream keyed by a sequence of counters (nested split).
    Stream substream(std::initializer_list<std::uint64_t> counters) const;

    //! Fresh generator positioned at the start of this stream.
    Generator generator() const { return Generator(key_); }

    constexpr std::uint64_t key() const { return key_; }

  private:
    std::uint64_t key_;
};

//! SplitMix64 finalizer, exposed for hashing configuration values into keys.
std::uint64_t mix64(std::uint64_t x);

}  // namespace simineq
