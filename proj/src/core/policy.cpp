#include "core/policy.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace rrnum {
namespace {

// One served slot: observe via ACK/NACK, update beliefs, move to the next slot.
ChannelState serve(ServiceState& st, RunStreams& streams, std::size_t n, bool real, RoundTrace& trace)
{
    const ChannelState s = st.truth[n];
    trace.slots.push_back({st.slot, n, real, s, real && s == ChannelState::On});
    st.belief.observe_slot(Observation{n, s});
    st.lru.touch(n, st.slot);
    st.truth.advance(st.models, streams.channel);
    ++st.slot;
    return s;
}

}  // namespace

std::vector<std::size_t> lru_order(const ActivationVector& phi, const LruClock& clock)
{
    require(phi.size() == clock.size(), "activation vector size does not match the LRU clock");
    std::vector<std::size_t> order = phi.channels();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto la = clock.last_visit(a);
        const auto lb = clock.last_visit(b);
        if (!la || !lb) return !la && lb.has_value();
        return *la < *lb;
    });
    return order;
}

ServiceState ServiceState::initial(ChannelSet models, Rng& channel_rng, std::uint64_t age_cap)
{
    TrueChannelState truth = TrueChannelState::sample_stationary(models, channel_rng);
    BeliefState belief(models, age_cap);
    LruClock lru(models.size());
    return ServiceState{std::move(models), std::move(belief), std::move(truth), std::move(lru), 0};
}

void run_rr_round(const ActivationVector& phi, ServiceState& st, RunStreams& streams, RoundTrace& trace)
{
    require(phi.size() == st.models.size(), "activation vector size does not match channel count");
    require(!phi.is_zero(), "a round robin round needs at least one active channel");
    const std::uint64_t m = phi.count();
    for (std::size_t n : lru_order(phi, st.lru)) {
        const double omega = st.belief.omega(n);
        const double enter = k_step_prob(st.models[n], ChannelState::Off, m);
        if (enter > omega * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "round robin feasibility violated at slot " << st.slot << ": channel " << n + 1
               << " entry probability " << enter << " exceeds belief " << omega << " (M=" << m << ")";
            fail(ErrorCode::Feasibility, os.str());
        }
        if (bernoulli(streams.coins, enter / omega)) {
            while (serve(st, streams, n, true, trace) == ChannelState::On) {
            }
        } else {
            serve(st, streams, n, false, trace);
        }
    }
}

void run_idle_slot(ServiceState& st, RunStreams& streams, RoundTrace& trace)
{
    trace.slots.push_back({st.slot, kIdleChannel, false, ChannelState::Off, false});
    st.belief.observe_slot(std::nullopt);
    st.truth.advance(st.models, streams.channel);
    ++st.slot;
}

PolicyRandRR::PolicyRandRR(std::size_t channels, std::vector<MixtureComponent> components)
    : channels_(channels), components_(std::move(components))
{
    require(!components_.empty(), "a randomised round robin needs at least one component");
    double total = 0.0;
    for (const auto& c : components_) {
        require(c.phi.size() == channels_, "mixture component has the wrong channel count");
        require(std::isfinite(c.weight) && c.weight >= 0.0, "mixture weights must be nonnegative");
        total += c.weight;
        cumulative_.push_back(total);
    }
    require(std::abs(total - 1.0) <= 1e-9, "mixture weights must sum to 1");
}

PolicyRandRR PolicyRandRR::single(const ActivationVector& phi) { return PolicyRandRR(phi.size(), {{phi, 1.0}}); }

const ActivationVector& PolicyRandRR::sample(Rng& rng) const
{
    if (components_.size() == 1) return components_.front().phi;
    const double u = uniform01(rng) * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), components_.size() - 1);
    return components_[idx].phi;
}

void run_randrr_frame(const PolicyRandRR& policy, ServiceState& st, RunStreams& streams, RoundTrace& trace)
{
    require(policy.channels() == st.models.size(), "policy channel count does not match the channel set");
    const ActivationVector& phi = policy.sample(streams.mixture);
    trace.clear(phi);
    if (phi.is_zero())
        run_idle_slot(st, streams, trace);
    else
        run_rr_round(phi, st, streams, trace);
}

void write_trace_csv(std::ostream& os, const RoundTrace& trace, std::size_t channels, bool header)
{
    if (header) {
        os << "slot,channel,kind,state";
        for (std::size_t n = 0; n < channels; ++n) os << ",mu_" << n + 1;
        os << '\n';
    }
    for (const auto& r : trace.slots) {
        os << r.slot << ',' << (r.idle() ? 0 : r.channel + 1) << ',' << (r.idle() ? "idle" : r.real ? "real" : "dummy")
           << ',' << (r.idle() ? "-" : r.observed == ChannelState::On ? "on" : "off");
        for (std::size_t n = 0; n < channels; ++n) os << ',' << ((r.channel == n && r.success) ? 1 : 0);
        os << '\n';
    }
}

}  // namespace rrnum
