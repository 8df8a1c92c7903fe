#pragma once

#include "core/activation.hpp"
#include "core/channel.hpp"
#include "core/utility.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <optional>
#include <vector>

namespace rrnum {

enum class SelectionMode { Exhaustive, SymmetricFast, PairsOnly };

std::string_view to_string(SelectionMode mode);
std::optional<SelectionMode> parse_selection_mode(std::string_view text);

struct AdmissionDecision {
    std::vector<double> rates;  ///< r_n in [0, 1], held for the whole frame
    double h_star = 0.0;        ///< optimal value of V g(r) - Q.r
};

/// Per-user maximisation of V g_n(r) - Q_n r on [0, 1]. V = 0 admits nothing.
AdmissionDecision solve_admission(std::span<const double> backlog, const UtilityFunction& utility, double vg);

/// Backlog-weighted expected service per round over expected round length.
double ratio_metric(std::span<const double> backlog, std::span<const ChannelModel> models, const ActivationVector& phi);

struct SelectionDecision {
    ActivationVector phi;  ///< zero vector = idle one slot
    double value = 0.0;

    bool idle() const noexcept { return phi.is_zero(); }
};

/// Reusable subset selector; caches per-(channel, subset size) round statistics.
class PhiSelector {
public:
    PhiSelector(std::span<const ChannelModel> models, SelectionMode mode, std::size_t enumeration_cap);

    SelectionMode mode() const noexcept { return mode_; }
    SelectionDecision select(std::span<const double> backlog) const;

private:
    SelectionDecision exhaustive(std::span<const double> backlog) const;
    SelectionDecision symmetric_fast(std::span<const double> backlog) const;
    SelectionDecision pairs(std::span<const double> backlog) const;

    std::size_t n_;
    SelectionMode mode_;
    // data_[m][ch] = E[L] - 1 for channel ch in a subset of size m.
    std::vector<std::vector<double>> data_;
};

/// Argmax of the ratio metric. Ties: larger subset first, then smaller bitmask.
SelectionDecision select_phi(std::span<const double> backlog, std::span<const ChannelModel> models, SelectionMode mode,
                             std::size_t enumeration_cap);

struct FrameDecision {
    AdmissionDecision admission;
    SelectionDecision selection;
};

/// Both frame-start decisions from one backlog snapshot.
FrameDecision qrrnum_frame(std::span<const double> backlog, const PhiSelector& selector, const UtilityFunction& utility,
                           double vg);

}  // namespace rrnum
