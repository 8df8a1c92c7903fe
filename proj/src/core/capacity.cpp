#include "core/capacity.hpp"

#include "core/error.hpp"
#include "core/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace rrnum {
namespace {

// P01 (1 - (1 - x)^M) / (x P10): expected data slots of one stay.
double stay_gain(const ChannelModel& m, std::size_t active)
{
    const double x = m.correlation_sum();
    return m.p01() * (1.0 - std::pow(1.0 - x, static_cast<double>(active))) / (x * m.p10());
}

void check_rate_vector(std::span<const double> v, std::size_t n, const char* what)
{
    require(v.size() == n, std::string(what) + " has the wrong dimension");
    for (double e : v) require(std::isfinite(e) && e >= 0.0, std::string(what) + " must be finite and nonnegative");
}

}  // namespace

std::vector<double> eta_vector(std::span<const ChannelModel> models, const ActivationVector& phi)
{
    require(phi.size() == models.size(), "activation vector size does not match channel count");
    require(!phi.is_zero(), "eta is undefined for the zero activation vector");
    const std::size_t m = phi.count();
    std::vector<double> eta(models.size(), 0.0);
    double denom = static_cast<double>(m);
    for (std::size_t n = 0; n < models.size(); ++n)
        if (phi.active(n)) {
            eta[n] = stay_gain(models[n], m);
            denom += eta[n];
        }
    for (double& e : eta) e /= denom;
    return eta;
}

double c_coefficient(const ChannelModel& model, std::uint32_t m)
{
    require(m >= 1, "c_M needs M >= 1");
    const double x = model.correlation_sum();
    const double num = model.p01() * (1.0 - std::pow(1.0 - x, static_cast<double>(m)));
    return num / (x * model.p10() + num);
}

StayLengthLaw::StayLengthLaw(double enter_on, const ChannelModel& model)
    : enter_on_(enter_on), p11_(model.p11()), p10_(model.p10())
{
    require(enter_on >= 0.0 && enter_on <= 1.0, "stay entry probability must lie in [0, 1]");
}

double StayLengthLaw::pmf(std::uint64_t j) const
{
    if (j == 0) return 0.0;
    if (j == 1) return 1.0 - enter_on_;
    return enter_on_ * std::pow(p11_, static_cast<double>(j - 2)) * p10_;
}

double StayLengthLaw::tail(std::uint64_t j) const
{
    if (j == 0) return 1.0;
    return enter_on_ * std::pow(p11_, static_cast<double>(j - 1));
}

double StayLengthLaw::mean() const { return 1.0 + enter_on_ / p10_; }

double StayLengthLaw::second_moment() const
{
    // L = 1 + G on the data branch, G geometric on {1, 2, ...} with success p10.
    const double eg = 1.0 / p10_;
    const double eg2 = (2.0 - p10_) / (p10_ * p10_);
    return (1.0 - enter_on_) + enter_on_ * (1.0 + 2.0 * eg + eg2);
}

double RoundLengthLaw::mean() const
{
    double s = 0.0;
    for (const auto& l : stays) s += l.mean();
    return s;
}

double RoundLengthLaw::second_moment() const
{
    double var = 0.0;
    for (const auto& l : stays) var += l.variance();
    const double mu = mean();
    return var + mu * mu;
}

RoundLengthLaw round_length_law(std::span<const ChannelModel> models, const ActivationVector& phi)
{
    require(phi.size() == models.size(), "activation vector size does not match channel count");
    require(!phi.is_zero(), "round length is undefined for the zero activation vector");
    RoundLengthLaw law;
    law.phi = phi;
    law.channels = phi.channels();
    const std::uint64_t m = phi.count();
    for (std::size_t n : law.channels) law.stays.emplace_back(k_step_prob(models[n], ChannelState::Off, m), models[n]);
    return law;
}

double b_constant(std::span<const ChannelModel> models)
{
    if (models.empty()) return 0.0;
    const auto law = round_length_law(models, ActivationVector::all(models.size()));
    return static_cast<double>(models.size()) * law.second_moment();
}

InnerRegion InnerRegion::build(std::span<const ChannelModel> models, RegionKind kind, std::size_t enumeration_cap)
{
    const std::size_t n = models.size();
    require(n >= 1, "region needs at least one channel");
    require(n <= ActivationVector::kMaxChannels, "at most 64 channels are supported");
    InnerRegion region;
    region.dimension_ = n;
    region.kind_ = kind;

    if (kind == RegionKind::Pairs) {
        require(n >= 2, "the pair-restricted region needs at least two channels");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                ActivationVector phi(n, (std::uint64_t{1} << i) | (std::uint64_t{1} << j));
                region.vertices_.push_back({phi, eta_vector(models, phi)});
            }
        return region;
    }

    require(enumeration_cap <= kMaxEnumerationCap,
            "enumeration cap may not exceed " + std::to_string(kMaxEnumerationCap));
    if (n > enumeration_cap)
        fail(ErrorCode::CapExceeded, std::to_string(n) + " channels exceed the vertex enumeration cap of " +
                                         std::to_string(enumeration_cap) +
                                         "; use the pair-restricted region (mode pairs_only) instead");

    // gain[m][ch] reused across all subsets of size m.
    std::vector<std::vector<double>> gain(n + 1, std::vector<double>(n));
    for (std::size_t m = 1; m <= n; ++m)
        for (std::size_t ch = 0; ch < n; ++ch) gain[m][ch] = stay_gain(models[ch], m);

    const std::uint64_t count = (std::uint64_t{1} << n) - 1;
    region.vertices_.reserve(count);
    for (std::uint64_t mask = 1; mask <= count; ++mask) {
        ActivationVector phi(n, mask);
        const std::size_t m = phi.count();
        std::vector<double> eta(n, 0.0);
        double denom = static_cast<double>(m);
        for (std::size_t ch = 0; ch < n; ++ch)
            if (phi.active(ch)) {
                eta[ch] = gain[m][ch];
                denom += eta[ch];
            }
        for (double& e : eta) e /= denom;
        region.vertices_.push_back({phi, std::move(eta)});
    }
    return region;
}

MembershipResult region_membership(const InnerRegion& region, std::span<const double> lambda, double tolerance)
{
    const std::size_t n = region.dimension();
    check_rate_vector(lambda, n, "rate vector");
    require(tolerance >= 0.0, "boundary tolerance must be nonnegative");
    const auto& verts = region.vertices();
    const std::size_t k = verts.size();

    // Variables: w_1..w_K, s+, s-.  maximise s+ - s-
    //   -sum_k eta_kn w_k + s+ - s- <= -lambda_n   (n = 1..N)
    //    sum_k w_k                  <= 1
    lp::Problem p;
    p.num_vars = k + 2;
    p.objective.assign(k + 2, 0.0);
    p.objective[k] = 1.0;
    p.objective[k + 1] = -1.0;
    for (std::size_t row = 0; row < n; ++row) {
        lp::Constraint c{std::vector<double>(k + 2, 0.0), lp::Sense::LessEqual, -lambda[row]};
        for (std::size_t v = 0; v < k; ++v) c.coefficients[v] = -verts[v].eta[row];
        c.coefficients[k] = 1.0;
        c.coefficients[k + 1] = -1.0;
        p.constraints.push_back(std::move(c));
    }
    lp::Constraint total{std::vector<double>(k + 2, 0.0), lp::Sense::LessEqual, 1.0};
    std::fill_n(total.coefficients.begin(), k, 1.0);
    p.constraints.push_back(std::move(total));

    const lp::Solution sol = lp::solve(p);
    if (sol.status != lp::Status::Optimal) fail(ErrorCode::Numeric, "region membership LP did not reach an optimum");

    MembershipResult out;
    out.slack = sol.objective;
    if (out.slack > tolerance)
        out.verdict = Membership::Inside;
    else if (out.slack >= -tolerance)
        out.verdict = Membership::Boundary;
    else
        out.verdict = Membership::Outside;

    if (out.verdict != Membership::Outside) {
        out.weights.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(k));
        const double used = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
        out.origin_weight = std::max(0.0, 1.0 - used);
    } else {
        out.direction.resize(n);
        double total_weight = 0.0;
        for (std::size_t row = 0; row < n; ++row) {
            out.direction[row] = std::max(0.0, sol.duals[row]);
            total_weight += out.direction[row];
        }
        if (!(total_weight > 0.0)) fail(ErrorCode::Numeric, "region membership LP returned an empty separating direction");
        for (double& d : out.direction) d /= total_weight;
    }
    return out;
}

std::vector<double> boundary_probe(const InnerRegion& region, std::span<const double> direction)
{
    const std::size_t n = region.dimension();
    check_rate_vector(direction, n, "probe direction");
    require(std::any_of(direction.begin(), direction.end(), [](double d) { return d > 0.0; }),
            "probe direction must be nonzero");
    const auto& verts = region.vertices();
    const std::size_t k = verts.size();

    // Variables: w_1..w_K, t.  maximise t
    //   t v_n - sum_k eta_kn w_k <= 0,   sum_k w_k <= 1
    lp::Problem p;
    p.num_vars = k + 1;
    p.objective.assign(k + 1, 0.0);
    p.objective[k] = 1.0;
    for (std::size_t row = 0; row < n; ++row) {
        lp::Constraint c{std::vector<double>(k + 1, 0.0), lp::Sense::LessEqual, 0.0};
        for (std::size_t v = 0; v < k; ++v) c.coefficients[v] = -verts[v].eta[row];
        c.coefficients[k] = direction[row];
        p.constraints.push_back(std::move(c));
    }
    lp::Constraint total{std::vector<double>(k + 1, 0.0), lp::Sense::LessEqual, 1.0};
    std::fill_n(total.coefficients.begin(), k, 1.0);
    p.constraints.push_back(std::move(total));

    const lp::Solution sol = lp::solve(p);
    if (sol.status != lp::Status::Optimal) fail(ErrorCode::Numeric, "boundary probe LP did not reach an optimum");
    std::vector<double> point(n);
    for (std::size_t row = 0; row < n; ++row) point[row] = sol.objective * direction[row];
    return point;
}

namespace {

// Golden-section maximiser of a concave function on [0, 1].
template <class F>
double golden_max(F&& f, double tol)
{
    constexpr double inv_phi = 0.6180339887498949;
    double a = 0.0, b = 1.0;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        }
    }
    return 0.5 * (a + b);
}

bool all_finite(const std::vector<double>& v)
{
    return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

}  // namespace

OptimumResult solve_offline_optimum(const InnerRegion& region, const UtilityFunction& utility,
                                    const FrankWolfeOptions& options)
{
    const std::size_t n = region.dimension();
    require(utility.size() == n, "utility dimension does not match the region");
    const auto& verts = region.vertices();

    std::vector<double> centroid(n, 0.0);
    for (const auto& v : verts)
        for (std::size_t i = 0; i < n; ++i) centroid[i] += v.eta[i] / static_cast<double>(verts.size() + 1);

    // Exact linear oracle on the down-closed hull: clip negative slopes.
    // Fills `target` and returns the duality gap at `at`.
    auto oracle = [&](const std::vector<double>& grad, const std::vector<double>& at, std::vector<double>& target) {
        double best_score = 0.0;
        std::fill(target.begin(), target.end(), 0.0);
        for (const auto& v : verts) {
            double score = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (grad[i] > 0.0) score += grad[i] * v.eta[i];
            if (score > best_score) {
                best_score = score;
                for (std::size_t i = 0; i < n; ++i) target[i] = grad[i] > 0.0 ? v.eta[i] : 0.0;
            }
        }
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g += grad[i] * (target[i] - at[i]);
        return g;
    };

    OptimumResult out;
    std::vector<double> y(n, 0.0);
    std::vector<double> target(n);
    double gap = 0.0;

    for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
        std::vector<double> grad = utility.gradient(y);
        for (int damp = 0; !all_finite(grad) && damp < 20; ++damp) {
            for (std::size_t i = 0; i < n; ++i) y[i] += 1e-6 * (centroid[i] - y[i]);
            grad = utility.gradient(y);
        }
        if (!all_finite(grad)) {
            out.gradient_trouble = true;
            break;
        }

        gap = oracle(grad, y, target);
        if (gap < options.gap_tolerance) break;

        std::vector<double> trial(n);
        auto along = [&](double step) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = y[i] + step * (target[i] - y[i]);
            return utility.value(trial);
        };
        double step = golden_max(along, 1e-12);
        if (along(1.0) >= along(step)) step = 1.0;
        for (std::size_t i = 0; i < n; ++i) y[i] += step * (target[i] - y[i]);
    }

    out.point = y;
    out.value = utility.value(y);
    out.gap = std::max(0.0, gap);
    for (const auto& v : verts) {
        const double g = utility.value(v.eta);
        if (g > out.value) {
            out.value = g;
            out.point = v.eta;
            const auto grad = utility.gradient(out.point);
            out.gap = all_finite(grad) ? std::max(0.0, oracle(grad, out.point, target)) : out.gap;
        }
    }
    return out;
}

}  // namespace rrnum
