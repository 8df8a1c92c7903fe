#include "core/channel.hpp"

#include "core/error.hpp"

#include <cmath>
#include <sstream>

namespace rrnum {

ChannelModel::ChannelModel(double p01, double p10) : p01_(p01), p10_(p10)
{
    if (!(p01 > 0.0 && p01 < 1.0) || !(p10 > 0.0 && p10 < 1.0)) {
        std::ostringstream os;
        os << "channel transition probabilities must lie in (0, 1), got p01=" << p01 << " p10=" << p10;
        fail(ErrorCode::InvalidArgument, os.str());
    }
    if (!(p01 + p10 < 1.0)) {
        std::ostringstream os;
        os << "channel must be positively correlated (p01 + p10 < 1), got " << p01 + p10;
        fail(ErrorCode::InvalidArgument, os.str());
    }
}

double k_step_prob(const ChannelModel& model, ChannelState from, std::uint64_t k)
{
    require(k >= 1, "k-step probability needs k >= 1");
    const double pi = model.pi_on();
    const double decay = std::pow(1.0 - model.correlation_sum(), static_cast<double>(k));
    if (from == ChannelState::On) return pi + (1.0 - pi) * decay;
    return pi * (1.0 - decay);
}

bool is_symmetric(std::span<const ChannelModel> models)
{
    for (const auto& m : models)
        if (!(m == models.front())) return false;
    return true;
}

BeliefState::BeliefState(ChannelSet models, std::uint64_t age_cap)
    : models_(std::make_shared<const ChannelSet>(std::move(models))),
      entries_(models_->size()),
      age_cap_(age_cap)
{
    require(age_cap >= 1, "belief age cap must be at least 1");
}

double BeliefState::omega(std::size_t n) const
{
    const Entry& e = entries_.at(n);
    const ChannelModel& m = (*models_)[n];
    if (!e.observed || e.age >= age_cap_) return m.pi_on();
    return k_step_prob(m, e.state, e.age);
}

std::vector<double> BeliefState::omegas() const
{
    std::vector<double> out(size());
    for (std::size_t n = 0; n < size(); ++n) out[n] = omega(n);
    return out;
}

void BeliefState::observe_slot(std::optional<Observation> observation)
{
    if (observation) require(observation->channel < size(), "observed channel index out of range");
    for (std::size_t n = 0; n < entries_.size(); ++n) {
        Entry& e = entries_[n];
        if (observation && observation->channel == n) {
            e = Entry{true, observation->state, 1};
        } else if (e.observed && e.age < age_cap_) {
            ++e.age;
        }
    }
}

BeliefState update_belief(BeliefState belief, std::optional<Observation> observation)
{
    belief.observe_slot(observation);
    return belief;
}

TrueChannelState TrueChannelState::sample_stationary(std::span<const ChannelModel> models, Rng& rng)
{
    std::vector<ChannelState> states;
    states.reserve(models.size());
    for (const auto& m : models) states.push_back(bernoulli(rng, m.pi_on()) ? ChannelState::On : ChannelState::Off);
    return TrueChannelState(std::move(states));
}

void TrueChannelState::advance(std::span<const ChannelModel> models, Rng& rng)
{
    for (std::size_t n = 0; n < states_.size(); ++n)
        states_[n] = bernoulli(rng, models[n].to_on(states_[n])) ? ChannelState::On : ChannelState::Off;
}

TrueChannelState advance_true_state(TrueChannelState state, std::span<const ChannelModel> models, Rng& rng)
{
    state.advance(models, rng);
    return state;
}

}  // namespace rrnum
