#include "core/diagnostics.hpp"

#include "core/error.hpp"
#include "core/policy.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <numeric>

namespace rrnum {

RoundSample sample_rounds(std::span<const ChannelModel> models, const ActivationVector& phi, std::uint64_t rounds,
                          std::uint64_t seed)
{
    require(!phi.is_zero(), "sampling rounds needs a nonzero activation vector");
    ChannelSet set(models.begin(), models.end());
    RunStreams streams(seed);
    ServiceState st = ServiceState::initial(set, streams.channel);

    RoundSample out;
    out.phi = phi;
    out.rounds = rounds;
    out.channels = phi.channels();
    out.stays.resize(out.channels.size());
    std::vector<std::size_t> slot_of(models.size(), 0);
    for (std::size_t i = 0; i < out.channels.size(); ++i) slot_of[out.channels[i]] = i;

    RoundTrace trace;
    long double sum = 0, sum_sq = 0;
    for (std::uint64_t r = 0; r < rounds; ++r) {
        trace.clear(phi);
        run_rr_round(phi, st, streams, trace);
        const auto len = static_cast<long double>(trace.length());
        sum += len;
        sum_sq += len * len;
        // Consecutive slots on one channel form that channel's stay.
        std::size_t i = 0;
        while (i < trace.slots.size()) {
            std::size_t j = i;
            while (j < trace.slots.size() && trace.slots[j].channel == trace.slots[i].channel) ++j;
            auto& hist = out.stays[slot_of[trace.slots[i].channel]];
            const std::size_t stay = j - i;
            if (hist.size() < stay) hist.resize(stay, 0);
            ++hist[stay - 1];
            i = j;
        }
    }
    if (rounds > 0) {
        out.mean_length = static_cast<double>(sum / rounds);
        out.mean_square_length = static_cast<double>(sum_sq / rounds);
    }
    return out;
}

ChiSquareResult chi_square_stay_law(std::span<const std::uint64_t> counts, const StayLengthLaw& law)
{
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    require(total > 0, "chi-square needs at least one observation");

    // Individual bins while both the bin and the remaining tail expect >= 5.
    std::vector<double> expected, observed;
    std::uint64_t j = 1;
    for (;; ++j) {
        const double e = total * law.pmf(j);
        const double rest = total * law.tail(j);
        if (e < 5.0 || rest < 5.0) break;
        expected.push_back(e);
        observed.push_back(j <= counts.size() ? static_cast<double>(counts[j - 1]) : 0.0);
    }
    double tail_obs = 0.0;
    for (std::size_t k = j; k <= counts.size(); ++k) tail_obs += static_cast<double>(counts[k - 1]);
    expected.push_back(total * law.tail(j - 1));
    observed.push_back(tail_obs);

    ChiSquareResult r;
    r.bins = expected.size();
    for (std::size_t b = 0; b < expected.size(); ++b) {
        const double d = observed[b] - expected[b];
        r.statistic += expected[b] > 0 ? d * d / expected[b] : (observed[b] > 0 ? 1e300 : 0.0);
    }
    r.dof = r.bins > 1 ? r.bins - 1 : 1;
    boost::math::chi_squared dist(static_cast<double>(r.dof));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

}  // namespace rrnum
