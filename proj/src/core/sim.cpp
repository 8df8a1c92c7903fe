#include "core/sim.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rrnum {
namespace {

constexpr double kLedgerTolerance = 1e-9;

// Neumaier compensated sum.
struct Accumulator {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v)
    {
        const double t = sum + v;
        carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

void validate(const RunConfig& c)
{
    require(!c.models.empty(), "run needs at least one channel");
    require(c.models.size() <= ActivationVector::kMaxChannels, "at most 64 channels are supported");
    require(c.utility.size() == c.models.size(), "utility dimension does not match the channel count");
    require(c.warmup <= c.horizon, "warmup may not exceed the horizon");
}

class Engine {
public:
    explicit Engine(const RunConfig& config)
        : cfg_(config),
          streams_(config.seed),
          state_(ServiceState::initial(config.models, streams_.channel, config.age_cap)),
          n_(config.models.size()),
          q_(n_, 0.0),
          admitted_(n_),
          delivered_(n_),
          win_admitted_(n_),
          win_delivered_(n_),
          win_backlog_(n_)
    {
        m_.channels = n_;
        m_.horizon = config.horizon;
        m_.warmup = config.warmup;
        m_.seed = config.seed;
    }

    bool done() const { return t_ >= cfg_.horizon; }
    std::span<const double> backlog() const { return q_; }
    ServiceState& state() { return state_; }
    RunStreams& streams() { return streams_; }
    RoundTrace& trace() { return trace_; }

    // Frame log entry; the queue is untouched until apply_frame.
    void record_frame(const ActivationVector& phi, std::span<const double> rates)
    {
        if (!cfg_.record_frames) return;
        FrameRecord rec;
        rec.index = m_.frames;
        rec.start = t_;
        rec.mask = phi.mask();
        rec.rates.assign(rates.begin(), rates.end());
        rec.backlog = q_;
        std::vector<double> avg(n_, 0.0);
        if (t_ > 0)
            for (std::size_t i = 0; i < n_; ++i) avg[i] = delivered_[i].value() / static_cast<double>(t_);
        rec.utility_of_average = cfg_.utility.value(avg);
        m_.frame_log.push_back(std::move(rec));
    }

    // Applies Q' = Q - min(Q, mu) + r for every traced slot before the horizon.
    void apply_frame(std::span<const double> rates)
    {
        std::uint64_t applied = 0;
        for (const SlotRecord& slot : trace_.slots) {
            if (t_ >= cfg_.horizon) break;
            const bool in_window = t_ >= cfg_.warmup;
            double total = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                const double mu = (slot.channel == i && slot.success) ? 1.0 : 0.0;
                const double y = std::min(q_[i], mu);
                if (in_window) {
                    win_backlog_[i].add(q_[i]);
                    win_admitted_[i].add(rates[i]);
                    win_delivered_[i].add(y);
                }
                total += q_[i];
                q_[i] = q_[i] - y + rates[i];
                admitted_[i].add(rates[i]);
                delivered_[i].add(y);
            }
            if (in_window) m_.trend.add(static_cast<double>(t_ - cfg_.warmup), total);
            ++t_;
            ++applied;
            for (std::size_t i = 0; i < n_; ++i) {
                const double err = std::abs(q_[i] - (admitted_[i].value() - delivered_[i].value())) / static_cast<double>(t_);
                m_.max_ledger_error = std::max(m_.max_ledger_error, err);
            }
        }
        if (m_.max_ledger_error > kLedgerTolerance)
            fail(ErrorCode::Internal, "queue ledger identity Q(t) = R(t) - Y(t) drifted beyond tolerance");
        if (applied == 0) return;
        ++m_.frames;
        if (trace_.phi.is_zero()) ++m_.idle_frames;
        m_.max_frame_length = std::max(m_.max_frame_length, applied);
        if (cfg_.record_frames) m_.frame_log.back().length = applied;
    }

    RunMetrics finish()
    {
        const double w = static_cast<double>(m_.window());
        m_.admitted_avg.assign(n_, 0.0);
        m_.delivered_avg.assign(n_, 0.0);
        m_.backlog_avg.assign(n_, 0.0);
        m_.admitted_total.resize(n_);
        m_.delivered_total.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            if (w > 0) {
                m_.admitted_avg[i] = win_admitted_[i].value() / w;
                m_.delivered_avg[i] = win_delivered_[i].value() / w;
                m_.backlog_avg[i] = win_backlog_[i].value() / w;
            }
            m_.admitted_total[i] = admitted_[i].value();
            m_.delivered_total[i] = delivered_[i].value();
        }
        m_.final_backlog = q_;
        m_.utility_of_delivered = cfg_.utility.value(m_.delivered_avg);
        m_.utility_of_admitted = cfg_.utility.value(m_.admitted_avg);
        return std::move(m_);
    }

    RunMetrics& metrics() { return m_; }

private:
    const RunConfig& cfg_;
    RunStreams streams_;
    ServiceState state_;
    std::size_t n_;
    std::uint64_t t_ = 0;
    std::vector<double> q_;
    std::vector<Accumulator> admitted_, delivered_;
    std::vector<Accumulator> win_admitted_, win_delivered_, win_backlog_;
    RoundTrace trace_;
    RunMetrics m_;
};

}  // namespace

double RunMetrics::mean_total_backlog() const { return std::accumulate(backlog_avg.begin(), backlog_avg.end(), 0.0); }

RunMetrics run_qrrnum(const RunConfig& config)
{
    validate(config);
    require(config.vg.has_value() && config.mode.has_value() && config.enumeration_cap.has_value(),
            "QRRNUM run needs V_g, selection mode and enumeration cap");
    require(std::isfinite(*config.vg) && *config.vg >= 0.0, "V_g must be finite and nonnegative");

    const PhiSelector selector(config.models, *config.mode, *config.enumeration_cap);
    Engine engine(config);
    engine.metrics().vg = config.vg;
    while (!engine.done()) {
        const FrameDecision d = qrrnum_frame(engine.backlog(), selector, config.utility, *config.vg);
        engine.trace().clear(d.selection.phi);
        engine.record_frame(d.selection.phi, d.admission.rates);
        if (d.selection.idle())
            run_idle_slot(engine.state(), engine.streams(), engine.trace());
        else
            run_rr_round(d.selection.phi, engine.state(), engine.streams(), engine.trace());
        engine.apply_frame(d.admission.rates);
    }
    return engine.finish();
}

RunMetrics run_fixed_policy(const RunConfig& config, const PolicyRandRR& policy, std::span<const double> fixed_rates)
{
    validate(config);
    require(policy.channels() == config.models.size(), "policy channel count does not match the channel set");
    require(fixed_rates.size() == config.models.size(), "fixed admission vector has the wrong dimension");
    for (double r : fixed_rates) require(r >= 0.0 && r <= 1.0, "fixed admissions must lie in [0, 1]");

    Engine engine(config);
    while (!engine.done()) {
        run_randrr_frame(policy, engine.state(), engine.streams(), engine.trace());
        engine.record_frame(engine.trace().phi, fixed_rates);
        engine.apply_frame(fixed_rates);
    }
    return engine.finish();
}

StabilityReport stability_diagnostic(const RunMetrics& metrics, double threshold)
{
    StabilityReport r;
    r.slope = metrics.trend.slope();
    const bool enough = metrics.window() >= 1000 && metrics.horizon >= 10 * metrics.warmup;
    if (!enough)
        r.verdict = Stability::Inconclusive;
    else
        r.verdict = r.slope < threshold ? Stability::Stable : Stability::Unstable;
    return r;
}

}  // namespace rrnum
