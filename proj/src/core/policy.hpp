#pragma once

#include "core/activation.hpp"
#include "core/channel.hpp"
#include "core/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

namespace rrnum {

/// Last slot in which each channel was served; nullopt = never served.
class LruClock {
public:
    explicit LruClock(std::size_t channels) : last_(channels) {}

    std::size_t size() const noexcept { return last_.size(); }
    std::optional<std::uint64_t> last_visit(std::size_t n) const { return last_.at(n); }
    void touch(std::size_t n, std::uint64_t slot) { last_.at(n) = slot; }

private:
    std::vector<std::optional<std::uint64_t>> last_;
};

/// Active channels, least recently used first. Never-served channels lead;
/// ties go to the lower channel index.
std::vector<std::size_t> lru_order(const ActivationVector& phi, const LruClock& clock);

inline constexpr std::size_t kIdleChannel = std::numeric_limits<std::size_t>::max();

struct SlotRecord {
    std::uint64_t slot = 0;
    std::size_t channel = kIdleChannel;  ///< kIdleChannel for an idle slot
    bool real = false;                   ///< data packet (true) or dummy sensing packet
    ChannelState observed = ChannelState::Off;
    bool success = false;                ///< mu_channel = 1

    bool idle() const noexcept { return channel == kIdleChannel; }
};

/// Slot-by-slot record of one frame: one RR round, or one idle slot.
struct RoundTrace {
    ActivationVector phi;
    std::vector<SlotRecord> slots;

    std::size_t length() const noexcept { return slots.size(); }
    void clear(const ActivationVector& next)
    {
        phi = next;
        slots.clear();
    }
};

/// Everything a service policy reads and mutates: hidden channel states,
/// beliefs, LRU clock and the slot counter.
struct ServiceState {
    ChannelSet models;
    BeliefState belief;
    TrueChannelState truth;
    LruClock lru;
    std::uint64_t slot = 0;

    /// Unobserved beliefs, stationary true states drawn from `channel_rng`.
    static ServiceState initial(ChannelSet models, Rng& channel_rng, std::uint64_t age_cap = kDefaultAgeCap);
};

/// One round of the dynamic round robin over `phi`. Appends to `trace`
/// (which the caller clears). Throws Error(Feasibility) if an entry
/// probability exceeds the current belief.
void run_rr_round(const ActivationVector& phi, ServiceState& state, RunStreams& streams, RoundTrace& trace);

/// Idle for one slot: nothing observed, every belief ages.
void run_idle_slot(ServiceState& state, RunStreams& streams, RoundTrace& trace);

struct MixtureComponent {
    ActivationVector phi;  ///< zero vector = idle slot
    double weight = 0.0;
};

/// Stationary randomised mixture of round robin rounds and idle slots.
class PolicyRandRR {
public:
    PolicyRandRR(std::size_t channels, std::vector<MixtureComponent> components);
    static PolicyRandRR single(const ActivationVector& phi);

    std::size_t channels() const noexcept { return channels_; }
    const std::vector<MixtureComponent>& components() const noexcept { return components_; }
    const ActivationVector& sample(Rng& rng) const;

private:
    std::size_t channels_;
    std::vector<MixtureComponent> components_;
    std::vector<double> cumulative_;
};

/// Sample a subset from the mixture and run one frame of it.
void run_randrr_frame(const PolicyRandRR& policy, ServiceState& state, RunStreams& streams, RoundTrace& trace);

/// CSV rendering: slot,channel,kind,state,mu_1..mu_N (channels 1-based, 0 = idle).
void write_trace_csv(std::ostream& os, const RoundTrace& trace, std::size_t channels, bool header);

}  // namespace rrnum
