#pragma once

#include <cstdint>
#include <random>

namespace rrnum {

using Rng = std::mt19937_64;

// Independent substreams of one run seed. Keeping concerns on separate
// streams lets two policies see the same channel realisation.
enum class Stream : std::uint32_t {
    Channel = 1,
    Coins = 2,
    Mixture = 3,
};

inline Rng make_stream(std::uint64_t seed, Stream stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

// 53-bit uniform in [0, 1); platform independent, unlike uniform_real_distribution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

struct RunStreams {
    explicit RunStreams(std::uint64_t seed)
        : channel(make_stream(seed, Stream::Channel)),
          coins(make_stream(seed, Stream::Coins)),
          mixture(make_stream(seed, Stream::Mixture))
    {
    }

    Rng channel;
    Rng coins;
    Rng mixture;
};

}  // namespace rrnum
