#pragma once

#include "core/activation.hpp"
#include "core/channel.hpp"
#include "core/utility.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rrnum {

/// Per-channel throughput vertex of one round robin subset. Inactive entries
/// are zero.
std::vector<double> eta_vector(std::span<const ChannelModel> models, const ActivationVector& phi);

/// Sum throughput of serving M identical channels in round robin; the
/// per-user rate is c_M / M.
double c_coefficient(const ChannelModel& model, std::uint32_t m);

/// Law of the number of slots a round robin stays on one channel when it is
/// entered with effective ON probability `enter_on`:
///   P(L = 1) = 1 - enter_on,  P(L = j) = enter_on * p11^(j-2) * p10  (j >= 2).
class StayLengthLaw {
public:
    StayLengthLaw(double enter_on, const ChannelModel& model);

    double enter_on() const noexcept { return enter_on_; }
    double pmf(std::uint64_t j) const;
    /// P(L > j).
    double tail(std::uint64_t j) const;
    double mean() const;
    double second_moment() const;
    double variance() const { return second_moment() - mean() * mean(); }

private:
    double enter_on_;
    double p11_;
    double p10_;
};

/// Round length T = sum of independent per-channel stays.
struct RoundLengthLaw {
    ActivationVector phi;
    std::vector<std::size_t> channels;  ///< active channels, ascending
    std::vector<StayLengthLaw> stays;   ///< parallel to `channels`

    double mean() const;
    double second_moment() const;
};

RoundLengthLaw round_length_law(std::span<const ChannelModel> models, const ActivationVector& phi);

/// B = N * E[T_max^2], T_max the round length with every channel active.
double b_constant(std::span<const ChannelModel> models);

inline constexpr std::size_t kDefaultEnumerationCap = 16;
/// Hard ceiling on the configurable enumeration cap (2^20 vertices).
inline constexpr std::size_t kMaxEnumerationCap = 20;
inline constexpr double kDefaultBoundaryTolerance = 1e-9;

enum class RegionKind { Full, Pairs };

struct RegionVertex {
    ActivationVector phi;
    std::vector<double> eta;
};

/// Down-closure of the convex hull of the round robin vertices (and the origin).
class InnerRegion {
public:
    /// Full: every nonzero subset (requires N <= enumeration_cap).
    /// Pairs: only two-channel subsets (requires N >= 2).
    static InnerRegion build(std::span<const ChannelModel> models, RegionKind kind,
                             std::size_t enumeration_cap = kDefaultEnumerationCap);

    std::size_t dimension() const noexcept { return dimension_; }
    RegionKind kind() const noexcept { return kind_; }
    const std::vector<RegionVertex>& vertices() const noexcept { return vertices_; }

private:
    std::size_t dimension_ = 0;
    RegionKind kind_ = RegionKind::Full;
    std::vector<RegionVertex> vertices_;
};

enum class Membership { Inside, Boundary, Outside };

struct MembershipResult {
    Membership verdict = Membership::Outside;
    /// Largest s with lambda + s*1 dominated by a hull point.
    double slack = 0.0;
    /// Convex weights over region vertices (plus origin_weight) whose
    /// combination dominates lambda; empty when outside.
    std::vector<double> weights;
    double origin_weight = 0.0;
    /// Separating direction d >= 0, sum d = 1, with d.lambda > d.eta for
    /// every vertex; empty unless outside.
    std::vector<double> direction;
};

MembershipResult region_membership(const InnerRegion& region, std::span<const double> lambda,
                                   double tolerance = kDefaultBoundaryTolerance);

/// Farthest point t*v of the region along a nonnegative, nonzero ray v.
std::vector<double> boundary_probe(const InnerRegion& region, std::span<const double> direction);

struct FrankWolfeOptions {
    double gap_tolerance = 1e-8;
    std::size_t max_iterations = 10'000;
};

struct OptimumResult {
    std::vector<double> point;
    double value = 0.0;
    /// Frank-Wolfe duality gap at the returned point (0 when a vertex won).
    double gap = 0.0;
    std::size_t iterations = 0;
    /// Set when the gradient stayed non-finite after damping.
    bool gradient_trouble = false;
};

/// Maximise a concave nondecreasing utility over the region.
OptimumResult solve_offline_optimum(const InnerRegion& region, const UtilityFunction& utility,
                                    const FrankWolfeOptions& options = {});

}  // namespace rrnum
