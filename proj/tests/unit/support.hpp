#pragma once

#include "core/channel.hpp"
#include "core/rng.hpp"
#include "core/sim.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace rrnum::testing {

using Matrix2 = std::array<std::array<double, 2>, 2>;

inline Matrix2 transition_matrix(const ChannelModel& m)
{
    return {{{m.p00(), m.p01()}, {m.p10(), m.p11()}}};
}

inline Matrix2 multiply(const Matrix2& a, const Matrix2& b)
{
    Matrix2 c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

/// k-fold product of the transition matrix, by repeated multiplication.
inline Matrix2 matrix_power(const ChannelModel& m, std::uint64_t k)
{
    Matrix2 r{{{1.0, 0.0}, {0.0, 1.0}}};
    const Matrix2 p = transition_matrix(m);
    for (std::uint64_t i = 0; i < k; ++i) r = multiply(r, p);
    return r;
}

/// Admissible (p01, p10) drawn uniformly from [lo, hi]^2 subject to p01 + p10 < 1.
inline ChannelModel random_model(Rng& rng, double lo = 0.02, double hi = 0.9)
{
    for (;;) {
        const double a = lo + (hi - lo) * uniform01(rng);
        const double b = lo + (hi - lo) * uniform01(rng);
        if (a + b < 0.98) return ChannelModel(a, b);
    }
}

inline ChannelSet random_models(Rng& rng, std::size_t n, double lo = 0.02, double hi = 0.9)
{
    ChannelSet out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_model(rng, lo, hi));
    return out;
}

inline RunConfig make_run(ChannelSet models, UtilityFunction utility, std::uint64_t horizon, std::uint64_t warmup,
                          std::uint64_t seed, std::optional<double> vg = std::nullopt,
                          SelectionMode mode = SelectionMode::Exhaustive)
{
    return RunConfig{.models = std::move(models),
                     .utility = std::move(utility),
                     .vg = vg,
                     .mode = mode,
                     .enumeration_cap = 16,
                     .horizon = horizon,
                     .warmup = warmup,
                     .seed = seed,
                     .age_cap = kDefaultAgeCap,
                     .record_frames = false};
}

}  // namespace rrnum::testing
