#pragma once

#include "core/activation.hpp"
#include "core/capacity.hpp"
#include "core/channel.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rrnum {

/// Empirical round statistics of perpetual RR(phi).
struct RoundSample {
    ActivationVector phi;
    std::uint64_t rounds = 0;
    double mean_length = 0.0;
    double mean_square_length = 0.0;
    std::vector<std::size_t> channels;              ///< active channels, ascending
    std::vector<std::vector<std::uint64_t>> stays;  ///< stays[i][j-1] = count of stay length j on channels[i]
};

RoundSample sample_rounds(std::span<const ChannelModel> models, const ActivationVector& phi, std::uint64_t rounds,
                          std::uint64_t seed);

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
    std::size_t bins = 0;

    bool passes(double alpha) const { return p_value >= alpha; }
};

/// Goodness of fit of observed stay-length counts against the analytic law.
/// Bins with expected count below 5 are pooled into a tail bin.
ChiSquareResult chi_square_stay_law(std::span<const std::uint64_t> counts, const StayLengthLaw& law);

}  // namespace rrnum
