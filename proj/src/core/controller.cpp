#include "core/controller.hpp"

#include "core/capacity.hpp"
#include "core/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

namespace rrnum {
namespace {

void check_backlog(std::span<const double> q, std::size_t n)
{
    require(q.size() == n, "backlog vector has the wrong dimension");
    for (double v : q) require(std::isfinite(v) && v >= 0.0, "backlog entries must be finite and nonnegative");
}

// Golden-section maximiser of a concave f on [0, 1]; verifies concavity on
// every bracket it inspects.
template <class F>
double concave_argmax(F&& f, std::size_t user)
{
    constexpr double inv_phi = 0.6180339887498949;
    constexpr double width = 1e-9;
    double a = 0.0, b = 1.0;
    double fa = f(a), fb = f(b);
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    const double tol = 1e-10 * (1.0 + std::max({std::abs(fa), std::abs(fb), std::abs(fc), std::abs(fd)}));

    auto chord_ok = [&](double x0, double f0, double x1, double f1, double x2, double f2) {
        const double chord = f0 + (f2 - f0) * (x1 - x0) / (x2 - x0);
        return f1 >= chord - tol;
    };
    auto check = [&] {
        if (!chord_ok(a, fa, c, fc, d, fd) || !chord_ok(c, fc, d, fd, b, fb))
            fail(ErrorCode::NonConcave, "utility for user " + std::to_string(user + 1) + " is not concave on [0, 1]");
    };

    check();
    while (b - a > width) {
        if (fc < fd) {
            a = c;
            fa = fc;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        } else {
            b = d;
            fb = fd;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        }
        check();
    }
    double best = 0.5 * (a + b);
    double fbest = f(best);
    if (f(0.0) > fbest) {
        best = 0.0;
        fbest = f(0.0);
    }
    if (f(1.0) >= fbest) best = 1.0;
    return best;
}

bool ties(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

std::string_view to_string(SelectionMode mode)
{
    switch (mode) {
    case SelectionMode::Exhaustive:
        return "exhaustive";
    case SelectionMode::SymmetricFast:
        return "symmetric_fast";
    case SelectionMode::PairsOnly:
        return "pairs_only";
    }
    return "exhaustive";
}

std::optional<SelectionMode> parse_selection_mode(std::string_view text)
{
    if (text == "exhaustive") return SelectionMode::Exhaustive;
    if (text == "symmetric_fast") return SelectionMode::SymmetricFast;
    if (text == "pairs_only") return SelectionMode::PairsOnly;
    return std::nullopt;
}

AdmissionDecision solve_admission(std::span<const double> backlog, const UtilityFunction& utility, double vg)
{
    const std::size_t n = utility.size();
    check_backlog(backlog, n);
    require(std::isfinite(vg) && vg >= 0.0, "V_g must be finite and nonnegative");

    AdmissionDecision out;
    out.rates.assign(n, 0.0);
    if (vg == 0.0) return out;

    for (std::size_t i = 0; i < n; ++i) {
        const UtilityTerm& t = utility.term(i);
        const double q = backlog[i];
        double r = 1.0;
        switch (t.kind) {
        case UtilityKind::Log1p:
            r = q == 0.0 ? 1.0 : std::clamp(vg * t.weight / q - 1.0, 0.0, 1.0);
            break;
        case UtilityKind::Linear:
            r = vg * t.weight >= q ? 1.0 : 0.0;
            break;
        case UtilityKind::Generic:
            r = q == 0.0 ? 1.0 : concave_argmax([&](double x) { return vg * t.value(x) - q * x; }, i);
            break;
        }
        out.rates[i] = r;
        out.h_star += vg * t.value(r) - q * r;
    }
    return out;
}

double ratio_metric(std::span<const double> backlog, std::span<const ChannelModel> models, const ActivationVector& phi)
{
    check_backlog(backlog, models.size());
    const auto law = round_length_law(models, phi);
    double num = 0.0;
    for (std::size_t i = 0; i < law.channels.size(); ++i) num += backlog[law.channels[i]] * (law.stays[i].mean() - 1.0);
    return num / law.mean();
}

PhiSelector::PhiSelector(std::span<const ChannelModel> models, SelectionMode mode, std::size_t enumeration_cap)
    : n_(models.size()), mode_(mode)
{
    require(n_ >= 1 && n_ <= ActivationVector::kMaxChannels, "selector needs between 1 and 64 channels");
    switch (mode) {
    case SelectionMode::Exhaustive:
        require(enumeration_cap <= kMaxEnumerationCap,
                "enumeration cap may not exceed " + std::to_string(kMaxEnumerationCap));
        if (n_ > enumeration_cap)
            fail(ErrorCode::CapExceeded, std::to_string(n_) + " channels exceed the enumeration cap of " +
                                             std::to_string(enumeration_cap) + "; use mode pairs_only");
        break;
    case SelectionMode::SymmetricFast:
        require(is_symmetric(models), "symmetric_fast mode needs every channel to share one transition matrix");
        break;
    case SelectionMode::PairsOnly:
        require(n_ >= 2, "pairs_only mode needs at least two channels");
        break;
    }
    data_.assign(n_ + 1, std::vector<double>(n_, 0.0));
    for (std::size_t m = 1; m <= n_; ++m)
        for (std::size_t ch = 0; ch < n_; ++ch)
            data_[m][ch] = k_step_prob(models[ch], ChannelState::Off, m) / models[ch].p10();
}

SelectionDecision PhiSelector::select(std::span<const double> backlog) const
{
    check_backlog(backlog, n_);
    SelectionDecision d;
    switch (mode_) {
    case SelectionMode::Exhaustive:
        d = exhaustive(backlog);
        break;
    case SelectionMode::SymmetricFast:
        d = symmetric_fast(backlog);
        break;
    case SelectionMode::PairsOnly:
        d = pairs(backlog);
        break;
    }
    if (!(d.value > 0.0)) return {ActivationVector::zero(n_), 0.0};
    return d;
}

SelectionDecision PhiSelector::exhaustive(std::span<const double> q) const
{
    const std::uint64_t last = (std::uint64_t{1} << n_) - 1;
    std::uint64_t best_mask = 0;
    int best_m = 0;
    double best = 0.0;
    for (std::uint64_t mask = 1; mask <= last; ++mask) {
        const int m = std::popcount(mask);
        const auto& data = data_[static_cast<std::size_t>(m)];
        double num = 0.0, den = static_cast<double>(m);
        for (std::uint64_t bits = mask; bits; bits &= bits - 1) {
            const auto ch = static_cast<std::size_t>(std::countr_zero(bits));
            num += q[ch] * data[ch];
            den += data[ch];
        }
        const double v = num / den;
        if (best_mask == 0 || (ties(v, best) ? m > best_m : v > best)) {
            best = v;
            best_m = m;
            best_mask = mask;
        }
    }
    return {ActivationVector(n_, best_mask), best};
}

SelectionDecision PhiSelector::symmetric_fast(std::span<const double> q) const
{
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return q[a] > q[b]; });

    // data_[K][0] = P01^(K) / P10, so P01^(K) / (K (P10 + P01^(K))) = a / (K (1 + a)).
    std::size_t best_k = 0;
    double best = 0.0;
    double prefix = 0.0;
    for (std::size_t k = 1; k <= n_; ++k) {
        prefix += q[order[k - 1]];
        const double a = data_[k][0];
        const double v = a / (static_cast<double>(k) * (1.0 + a)) * prefix;
        if (best_k == 0 || ties(v, best) || v > best) {
            best = v;
            best_k = k;
        }
    }
    std::uint64_t mask = 0;
    for (std::size_t k = 0; k < best_k; ++k) mask |= std::uint64_t{1} << order[k];
    return {ActivationVector(n_, mask), best};
}

SelectionDecision PhiSelector::pairs(std::span<const double> q) const
{
    const auto& data = data_[2];
    std::uint64_t best_mask = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double v = (q[i] * data[i] + q[j] * data[j]) / (2.0 + data[i] + data[j]);
            const std::uint64_t mask = (std::uint64_t{1} << i) | (std::uint64_t{1} << j);
            if (best_mask == 0 || (!ties(v, best) && v > best) || (ties(v, best) && mask < best_mask)) {
                best = v;
                best_mask = mask;
            }
        }
    return {ActivationVector(n_, best_mask), best};
}

SelectionDecision select_phi(std::span<const double> backlog, std::span<const ChannelModel> models, SelectionMode mode,
                             std::size_t enumeration_cap)
{
    return PhiSelector(models, mode, enumeration_cap).select(backlog);
}

FrameDecision qrrnum_frame(std::span<const double> backlog, const PhiSelector& selector, const UtilityFunction& utility,
                           double vg)
{
    FrameDecision d;
    d.admission = solve_admission(backlog, utility, vg);
    d.selection = selector.select(backlog);
    return d;
}

}  // namespace rrnum
