#pragma once

#include "core/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace rrnum {

enum class ChannelState : std::uint8_t { Off = 0, On = 1 };

/// Two-state Markov ON/OFF channel. Construction enforces 0 < p01, p10 < 1 and
/// positive correlation p01 + p10 < 1.
class ChannelModel {
public:
    ChannelModel(double p01, double p10);

    double p01() const noexcept { return p01_; }
    double p10() const noexcept { return p10_; }
    double p00() const noexcept { return 1.0 - p01_; }
    double p11() const noexcept { return 1.0 - p10_; }
    /// p01 + p10, strictly below one.
    double correlation_sum() const noexcept { return p01_ + p10_; }
    double pi_on() const noexcept { return p01_ / (p01_ + p10_); }
    /// One-step probability of moving to ON from `from`.
    double to_on(ChannelState from) const noexcept { return from == ChannelState::On ? p11() : p01_; }

    friend bool operator==(const ChannelModel&, const ChannelModel&) = default;

private:
    double p01_;
    double p10_;
};

using ChannelSet = std::vector<ChannelModel>;

/// k-step probability of being ON given state `from` k slots earlier (k >= 1).
double k_step_prob(const ChannelModel& model, ChannelState from, std::uint64_t k);

/// True when every channel shares one transition matrix.
bool is_symmetric(std::span<const ChannelModel> models);

struct Observation {
    std::size_t channel;
    ChannelState state;
};

inline constexpr std::uint64_t kDefaultAgeCap = 1'000'000;

/// Per-channel information state, held as (last observed state, age) so that
/// omega is always an exact member of the countable belief set.
class BeliefState {
public:
    struct Entry {
        bool observed = false;
        ChannelState state = ChannelState::Off;
        std::uint64_t age = 0;

        friend bool operator==(const Entry&, const Entry&) = default;
    };

    /// All channels start unobserved, i.e. at the stationary prior.
    explicit BeliefState(ChannelSet models, std::uint64_t age_cap = kDefaultAgeCap);

    std::size_t size() const noexcept { return entries_.size(); }
    const Entry& entry(std::size_t n) const { return entries_.at(n); }
    double omega(std::size_t n) const;
    std::vector<double> omegas() const;
    const ChannelModel& model(std::size_t n) const { return (*models_)[n]; }
    std::uint64_t age_cap() const noexcept { return age_cap_; }

    /// End-of-slot update: the observed channel restarts at age 1, every other
    /// observed channel ages by one slot.
    void observe_slot(std::optional<Observation> observation);

    friend bool operator==(const BeliefState& a, const BeliefState& b) { return a.entries_ == b.entries_; }

private:
    std::shared_ptr<const ChannelSet> models_;
    std::vector<Entry> entries_;
    std::uint64_t age_cap_;
};

BeliefState update_belief(BeliefState belief, std::optional<Observation> observation);

/// Hidden channel states; only the simulator reads these.
class TrueChannelState {
public:
    TrueChannelState() = default;
    explicit TrueChannelState(std::vector<ChannelState> states) : states_(std::move(states)) {}

    /// Independent draws from each channel's stationary distribution.
    static TrueChannelState sample_stationary(std::span<const ChannelModel> models, Rng& rng);

    std::size_t size() const noexcept { return states_.size(); }
    ChannelState operator[](std::size_t n) const { return states_[n]; }
    const std::vector<ChannelState>& states() const noexcept { return states_; }

    /// Slot-boundary transition of every channel.
    void advance(std::span<const ChannelModel> models, Rng& rng);

private:
    std::vector<ChannelState> states_;
};

TrueChannelState advance_true_state(TrueChannelState state, std::span<const ChannelModel> models, Rng& rng);

}  // namespace rrnum
