#pragma once

#include "core/channel.hpp"
#include "core/controller.hpp"
#include "core/policy.hpp"
#include "core/utility.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace rrnum {

/// Parameters of one simulation run. V_g, mode and enumeration cap have no
/// library defaults: run_qrrnum rejects a config that leaves them unset.
struct RunConfig {
    ChannelSet models;
    UtilityFunction utility;
    std::optional<double> vg;
    std::optional<SelectionMode> mode;
    std::optional<std::size_t> enumeration_cap;
    std::uint64_t horizon = 0;
    std::uint64_t warmup = 0;
    std::uint64_t seed = 0;
    std::uint64_t age_cap = kDefaultAgeCap;
    bool record_frames = false;
};

struct FrameRecord {
    std::uint64_t index = 0;
    std::uint64_t start = 0;   ///< t_k
    std::uint64_t length = 0;  ///< T_k (slots applied before the horizon)
    std::uint64_t mask = 0;    ///< 0 = idle slot
    std::vector<double> rates;
    std::vector<double> backlog;        ///< Q(t_k)
    double utility_of_average = 0.0;    ///< g(delivered total / t_k)
};

/// Running least-squares sums of total backlog against slot index over the
/// post-warmup window.
struct BacklogTrend {
    long double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;

    void add(double x, double y)
    {
        n += 1;
        sx += x;
        sy += y;
        sxx += static_cast<long double>(x) * x;
        sxy += static_cast<long double>(x) * y;
    }
    double slope() const
    {
        const long double den = n * sxx - sx * sx;
        return den > 0 ? static_cast<double>((n * sxy - sx * sy) / den) : 0.0;
    }
};

struct RunMetrics {
    std::size_t channels = 0;
    std::uint64_t horizon = 0;
    std::uint64_t warmup = 0;
    std::uint64_t seed = 0;
    std::optional<double> vg;

    std::uint64_t frames = 0;
    std::uint64_t idle_frames = 0;
    std::uint64_t max_frame_length = 0;

    // Averages over the post-warmup window [warmup, horizon).
    std::vector<double> admitted_avg;
    std::vector<double> delivered_avg;
    std::vector<double> backlog_avg;
    double utility_of_delivered = 0.0;  ///< g(delivered_avg)
    double utility_of_admitted = 0.0;

    // Totals from slot 0, for the ledger identity Q(t) = R(t) - Y(t).
    std::vector<double> admitted_total;
    std::vector<double> delivered_total;
    std::vector<double> final_backlog;
    double max_ledger_error = 0.0;  ///< max over slots of |Q - (R - Y)| / t

    BacklogTrend trend;
    std::vector<FrameRecord> frame_log;

    std::uint64_t window() const noexcept { return horizon - warmup; }
    double mean_frame_length() const noexcept
    {
        return frames ? static_cast<double>(horizon) / static_cast<double>(frames) : 0.0;
    }
    double mean_total_backlog() const;
};

/// Frame-based QRRNUM run: per-frame admission + subset selection, LRU round
/// robin service, queue law Q' = max(Q - mu, 0) + r every slot.
RunMetrics run_qrrnum(const RunConfig& config);

/// Same slot loop under a fixed randomised round robin and fixed admissions.
RunMetrics run_fixed_policy(const RunConfig& config, const PolicyRandRR& policy, std::span<const double> fixed_rates);

enum class Stability { Stable, Unstable, Inconclusive };

struct StabilityReport {
    Stability verdict = Stability::Inconclusive;
    double slope = 0.0;  ///< packets/slot of total backlog
};

inline constexpr double kDefaultStabilityThreshold = 1e-3;

StabilityReport stability_diagnostic(const RunMetrics& metrics, double threshold = kDefaultStabilityThreshold);

}  // namespace rrnum
