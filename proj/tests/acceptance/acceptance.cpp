// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is the number of failing criteria.
#include "support.hpp"

#include "core/capacity.hpp"
#include "core/channel.hpp"
#include "core/controller.hpp"
#include "core/diagnostics.hpp"
#include "core/policy.hpp"
#include "core/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace rrnum;
using rrnum::testing::make_run;

namespace {

// ---- pinned tolerances and budgets ----------------------------------------
constexpr double kVertexTol = 1e-6;            // 1: vertices vs hand values
constexpr double kFormulaAgreementTol = 1e-12;  // 1: vertex formula vs c_M / M vs matrix powers
constexpr double kThroughputTol = 0.005;        // 2: Monte Carlo vs vertex, per coordinate
constexpr std::uint64_t kThroughputSlots = 1'000'000;
constexpr std::uint64_t kThroughputWarmup = 100'000;
constexpr double kChiSquareAlpha = 0.01;     // 3
constexpr std::uint64_t kChiSquareRounds = 100'000;
constexpr double kRoundMeanTol = 0.01;       // 3
constexpr std::uint64_t kRoundMeanRounds = 4'000'000;
constexpr double kUtilityAllowance = 0.01;   // 4: Monte Carlo allowance on the utility bound
constexpr double kGridStep = 1e-3;           // 4: grid search validating Frank-Wolfe
// Every region point has a grid point below it (down-closure) and log1p is
// 1-Lipschitz per coordinate, so the two-user grid optimum is within 2 steps.
constexpr double kGridTol = 2.0 * kGridStep;
constexpr std::uint64_t kHorizon = 2'000'000;
constexpr std::uint64_t kWarmup = 200'000;
constexpr double kSlopeThreshold = 1e-3;     // 5
constexpr double kOverDemandSlope = 0.1;     // 5
constexpr double kIdentityTol = 1e-12;       // 6
constexpr double kKktTol = 1e-6;             // 7
constexpr double kBeliefTol = 1e-12;         // 8
constexpr double kBeliefSigmas = 3.0;        // 8

const ChannelSet kTwoUser(2, ChannelModel(0.2, 0.2));
const std::vector<double> kSweepVg{10.0, 50.0, 250.0};
const std::vector<std::uint64_t> kSeeds{1, 2, 3};

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::string misses;

    void check(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            misses += " [miss: " + what + "]";
        }
    }
};

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

// QRRNUM runs shared by the utility-bound and stability criteria.
std::map<std::pair<double, std::uint64_t>, RunMetrics>& sweep_runs()
{
    static std::map<std::pair<double, std::uint64_t>, RunMetrics> runs = [] {
        std::map<std::pair<double, std::uint64_t>, RunMetrics> out;
        for (double vg : kSweepVg)
            for (std::uint64_t seed : kSeeds)
                out.emplace(std::pair{vg, seed},
                            run_qrrnum(make_run(kTwoUser, UtilityFunction::log1p(2), kHorizon, kWarmup, seed, vg)));
        return out;
    }();
    return runs;
}

// ---- 1 ----------------------------------------------------------------------
Outcome region_reproduction()
{
    Outcome o;
    const auto region = InnerRegion::build(kTwoUser, RegionKind::Full);
    const std::vector<std::vector<double>> expected{{0.5, 0.0}, {0.0, 0.5}, {0.307692, 0.307692}};
    o.check(region.vertices().size() == 3, "three vertices");
    double worst = 0.0;
    for (std::size_t k = 0; k < std::min<std::size_t>(3, region.vertices().size()); ++k)
        for (std::size_t i = 0; i < 2; ++i)
            worst = std::max(worst, std::abs(region.vertices()[k].eta[i] - expected[k][i]));
    o.check(worst <= kVertexTol, "vertex values");

    // Vertex formula vs the per-user c_M / M form vs first principles with
    // brute-force matrix powers, on the example and random symmetric sets.
    double agreement = 0.0;
    Rng rng(1);
    for (int trial = 0; trial < 201; ++trial) {
        const std::size_t n = trial == 0 ? 2 : 1 + rng() % 8;
        const ChannelSet models(n, trial == 0 ? kTwoUser[0] : rrnum::testing::random_model(rng));
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
            const ActivationVector phi(n, mask);
            const auto m = static_cast<std::uint32_t>(phi.count());
            const auto eta = eta_vector(models, phi);
            const double per_user = c_coefficient(models[0], m) / m;
            const auto p = rrnum::testing::matrix_power(models[0], m);
            const double extra = p[0][1] / models[0].p10();  // E[L] - 1
            const double direct = extra / (m * (1.0 + extra));
            for (std::size_t i = 0; i < n; ++i) {
                if (!phi.active(i)) continue;
                agreement = std::max({agreement, std::abs(eta[i] - per_user), std::abs(eta[i] - direct)});
            }
        }
    }
    o.check(agreement <= kFormulaAgreementTol, "formula agreement");
    o.detail << "max vertex error " << worst << " (tol " << kVertexTol << "), formula disagreement " << agreement
             << " (tol " << kFormulaAgreementTol << ")";
    return o;
}

// ---- 2 ----------------------------------------------------------------------
Outcome throughput_monte_carlo()
{
    Outcome o;
    double worst = 0.0;
    std::string worst_at;
    int runs = 0;
    for (std::size_t n : {2u, 3u, 5u}) {
        for (std::uint64_t seed : kSeeds) {
            Rng draw(1000 * n + seed);
            const auto models = rrnum::testing::random_models(draw, n, 0.15, 0.45);
            std::vector<ActivationVector> subsets;
            for (std::size_t i = 0; i < n; ++i) subsets.push_back(ActivationVector::single(n, i));
            subsets.push_back(ActivationVector::all(n));
            for (const auto& phi : subsets) {
                const auto cfg = make_run(models, UtilityFunction::log1p(n), kThroughputWarmup + kThroughputSlots,
                                          kThroughputWarmup, seed);
                const std::vector<double> saturate(n, 1.0);
                const auto m = run_fixed_policy(cfg, PolicyRandRR::single(phi), saturate);
                const auto eta = eta_vector(models, phi);
                ++runs;
                for (std::size_t i = 0; i < n; ++i) {
                    const double err = std::abs(m.delivered_avg[i] - eta[i]);
                    if (err > worst) {
                        worst = err;
                        worst_at = "N=" + std::to_string(n) + " seed=" + std::to_string(seed) + " phi=" + phi.to_string();
                    }
                }
            }
        }
    }
    o.check(worst <= kThroughputTol, "per-coordinate error");
    o.detail << runs << " runs, max |ybar - eta| " << worst << " at " << worst_at << " (tol " << kThroughputTol << ")";
    return o;
}

// ---- 3 ----------------------------------------------------------------------
Outcome round_length_law_check()
{
    Outcome o;
    double min_p = 1.0;
    const ChannelSet hetero{ChannelModel(0.15, 0.3), ChannelModel(0.3, 0.2), ChannelModel(0.25, 0.45)};
    for (const ChannelSet* models : {&kTwoUser, &hetero}) {
        const auto phi = ActivationVector::all(models->size());
        const auto sample = sample_rounds(*models, phi, kChiSquareRounds, 2024);
        const auto law = round_length_law(*models, phi);
        for (std::size_t i = 0; i < law.stays.size(); ++i)
            min_p = std::min(min_p, chi_square_stay_law(sample.stays[i], law.stays[i]).p_value);
    }
    o.check(min_p >= kChiSquareAlpha, "chi-square");

    // The mean needs more rounds than the chi-square: Var(T) = 23.68 gives a
    // standard error of 0.015 at 1e5 rounds, above the 0.01 allowance.
    const auto phi = ActivationVector::all(2);
    const double analytic = round_length_law(kTwoUser, phi).mean();
    const auto short_run = sample_rounds(kTwoUser, phi, kChiSquareRounds, 77);
    const auto long_run = sample_rounds(kTwoUser, phi, kRoundMeanRounds, 78);
    const double err = std::abs(long_run.mean_length - analytic);
    o.check(std::abs(analytic - 5.2) <= 1e-12, "analytic E[T] = 5.2");
    o.check(err <= kRoundMeanTol, "E[T]");
    o.detail << "min chi-square p " << min_p << " over 5 channels at " << kChiSquareRounds << " rounds (alpha "
             << kChiSquareAlpha << "); E[T] " << long_run.mean_length << " vs " << analytic << " over "
             << kRoundMeanRounds << " rounds, |err| " << err << " (tol " << kRoundMeanTol << "); at "
             << kChiSquareRounds << " rounds E[T] " << short_run.mean_length;
    return o;
}

// Concave maximisation over the explicit two-user region: the upper hull runs
// (0, 0.5) -> (4/13, 4/13) -> (0.5, 0).
double grid_optimum()
{
    const double v = 4.0 / 13.0;
    auto upper = [&](double y1) { return y1 <= v ? 0.5 + (v - 0.5) * y1 / v : v * (0.5 - y1) / (0.5 - v); };
    double best = 0.0;
    for (int k = 0; k * kGridStep <= 0.5 + 1e-12; ++k) {
        const double y1 = k * kGridStep;
        const double top = upper(y1);
        for (int j = 0; j * kGridStep <= top + 1e-12; ++j) best = std::max(best, std::log1p(y1) + std::log1p(j * kGridStep));
    }
    return best;
}

// ---- 4 ----------------------------------------------------------------------
Outcome utility_bound()
{
    Outcome o;
    const auto region = InnerRegion::build(kTwoUser, RegionKind::Full);
    const auto opt = solve_offline_optimum(region, UtilityFunction::log1p(2));
    const double grid = grid_optimum();
    const double closed = 2.0 * std::log(17.0 / 13.0);
    o.check(opt.value >= grid - 1e-12 && opt.value - grid <= kGridTol, "Frank-Wolfe vs grid");
    o.check(std::abs(opt.value - closed) <= 1e-9, "Frank-Wolfe vs closed form");
    const double b = b_constant(kTwoUser);
    o.detail << "g* " << opt.value << " (grid " << grid << " within " << kGridTol << ", closed form 2 log(17/13) = " << closed
             << "; the quoted 0.536895 is off by " << 0.536895 - closed << "), B " << b << ";";
    for (double vg : kSweepVg) {
        double worst_margin = 1e300;
        double worst_g = 0.0;
        for (std::uint64_t seed : kSeeds) {
            const auto& m = sweep_runs().at({vg, seed});
            const double bound = opt.value - b / vg - kUtilityAllowance;
            worst_margin = std::min(worst_margin, m.utility_of_delivered - bound);
            if (worst_margin == m.utility_of_delivered - bound) worst_g = m.utility_of_delivered;
        }
        o.check(worst_margin >= 0.0, "V_g=" + std::to_string(vg));
        o.detail << " V_g " << vg << ": min g(ybar) " << worst_g << " >= " << opt.value - b / vg - kUtilityAllowance
                 << ", gap to g* " << opt.value - worst_g << ";";
    }
    return o;
}

// ---- 5 ----------------------------------------------------------------------
Outcome stability()
{
    Outcome o;
    double worst = -1e300;
    for (const auto& [key, m] : sweep_runs()) {
        const auto s = stability_diagnostic(m, kSlopeThreshold);
        worst = std::max(worst, s.slope);
        o.check(s.verdict == Stability::Stable, "QRRNUM V_g=" + std::to_string(key.first));
    }
    const auto cfg = make_run(kTwoUser, UtilityFunction::log1p(2), kHorizon, kWarmup, 1);
    const std::vector<double> over{0.45, 0.45};
    const auto over_run = run_fixed_policy(cfg, PolicyRandRR::single(ActivationVector::all(2)), over);
    const auto s = stability_diagnostic(over_run, kSlopeThreshold);
    o.check(s.verdict == Stability::Unstable && s.slope > kOverDemandSlope, "over-demand slope");
    o.detail << "max QRRNUM slope " << worst << " over " << sweep_runs().size() << " runs (threshold "
             << kSlopeThreshold << "); over-demand (0.45, 0.45) slope " << s.slope << " (needs > " << kOverDemandSlope
             << ", drift 0.9 - 8/13 = " << 0.9 - 8.0 / 13.0 << ")";
    return o;
}

// ---- 6 ----------------------------------------------------------------------
Outcome controller_identities()
{
    Outcome o;
    double fast_gap = 0.0, mixture_excess = 0.0, scale_gap = 0.0;
    int scale_mismatch = 0;
    Rng rng(6);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 10;
        const ChannelSet models(n, rrnum::testing::random_model(rng));
        std::vector<double> q(n);
        for (double& v : q) v = 50.0 * uniform01(rng);
        const auto ex = select_phi(q, models, SelectionMode::Exhaustive, 16);
        const auto fast = select_phi(q, models, SelectionMode::SymmetricFast, 16);
        double mass_ex = 0.0, mass_fast = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mass_ex += ex.phi.active(i) ? q[i] : 0.0;
            mass_fast += fast.phi.active(i) ? q[i] : 0.0;
        }
        fast_gap = std::max({fast_gap, rel_gap(ex.value, fast.value), rel_gap(mass_ex, mass_fast)});
    }
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 2 + rng() % 4;
        const auto models = rrnum::testing::random_models(rng, n);
        std::vector<double> q(n);
        for (double& v : q) v = 20.0 * uniform01(rng);
        const std::size_t k = 2 + rng() % 4;
        double num = 0.0, den = 0.0, best = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const ActivationVector phi(n, 1 + rng() % ((std::uint64_t{1} << n) - 1));
            const auto law = round_length_law(models, phi);
            double f = 0.0;
            for (std::size_t i = 0; i < law.channels.size(); ++i) f += q[law.channels[i]] * (law.stays[i].mean() - 1.0);
            const double alpha = uniform01(rng);
            num += alpha * f;
            den += alpha * law.mean();
            best = std::max(best, f / law.mean());
        }
        mixture_excess = std::max(mixture_excess, (num / den - best) / std::max(1.0, best));
    }
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 6;
        const auto models = rrnum::testing::random_models(rng, n);
        std::vector<double> q(n);
        for (double& v : q) v = 30.0 * uniform01(rng);
        const auto base = select_phi(q, models, SelectionMode::Exhaustive, 16);
        for (double c : {1e-3, 1.0, 1e3}) {
            std::vector<double> scaled(q);
            for (double& v : scaled) v *= c;
            const auto d = select_phi(scaled, models, SelectionMode::Exhaustive, 16);
            scale_mismatch += d.phi.mask() != base.phi.mask();
            scale_gap = std::max(scale_gap, rel_gap(d.value, c * base.value));
        }
    }
    o.check(fast_gap <= kIdentityTol, "fast path");
    o.check(mixture_excess <= kIdentityTol, "mixture dominance");
    o.check(scale_mismatch == 0 && scale_gap <= kIdentityTol, "scale invariance");
    o.detail << "fast path vs exhaustive " << fast_gap << " (1000 instances), mixture excess " << mixture_excess
             << " (10000 instances), scaling: " << scale_mismatch << " argmax changes, value gap " << scale_gap
             << " (tol " << kIdentityTol << ")";
    return o;
}

// ---- 7 ----------------------------------------------------------------------
Outcome admission_kkt()
{
    Outcome o;
    double kkt = 0.0, golden = 0.0;
    Rng rng(7);
    const UtilityFunction closed({UtilityTerm::log1p(1.0)});
    const UtilityFunction generic({UtilityTerm::generic([](double r) { return std::log1p(r); })});
    for (int trial = 0; trial < 1000; ++trial) {
        const double vg = 0.1 + 200.0 * uniform01(rng);
        const double q = 400.0 * uniform01(rng);
        const std::vector<double> backlog{q};
        const double r = solve_admission(backlog, closed, vg).rates[0];
        const double grad = vg / (1.0 + r);
        double violation = 0.0;
        if (r > 0.0 && r < 1.0)
            violation = std::abs(grad - q);
        else if (r == 0.0)
            violation = std::max(0.0, grad - q);
        else
            violation = std::max(0.0, q - grad);
        kkt = std::max(kkt, violation);
        golden = std::max(golden, std::abs(r - solve_admission(backlog, generic, vg).rates[0]));
    }
    o.check(kkt <= kKktTol, "stationarity");
    o.check(golden <= kKktTol, "golden section");
    o.detail << "max KKT violation " << kkt << ", max |golden - closed| " << golden << " over 1000 pairs (tol "
             << kKktTol << ")";
    return o;
}

// ---- 8 ----------------------------------------------------------------------
Outcome belief_exactness()
{
    Outcome o;
    double worst = 0.0;
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = rrnum::testing::random_model(rng);
        BeliefState b(ChannelSet{m});
        for (ChannelState start : {ChannelState::Off, ChannelState::On}) {
            b.observe_slot(Observation{0, start});
            for (std::uint64_t k = 1; k <= 64; ++k) {
                const auto p = rrnum::testing::matrix_power(m, k);
                const double brute = start == ChannelState::On ? p[1][1] : p[0][1];
                worst = std::max(worst, std::abs(b.omega(0) - brute));
                b.observe_slot(std::nullopt);
            }
        }
    }
    o.check(worst <= kBeliefTol, "matrix powers");

    // Forced observations: probe with probability 0.15 per slot, independent
    // of the state; compare the predicted omega with realised ON frequency.
    const ChannelSet models{ChannelModel(0.1, 0.15)};
    Rng chain(11), pattern(12);
    BeliefState b(models);
    auto truth = TrueChannelState::sample_stationary(models, chain);
    std::map<std::pair<int, std::uint64_t>, std::pair<std::uint64_t, std::uint64_t>> tally;
    for (int t = 0; t < 1'000'000; ++t) {
        const auto& e = b.entry(0);
        if (e.observed && e.age <= 10) {
            auto& cell = tally[{static_cast<int>(e.state), e.age}];
            ++cell.first;
            cell.second += truth[0] == ChannelState::On;
        }
        std::optional<Observation> obs;
        if (uniform01(pattern) < 0.15) obs = Observation{0, truth[0]};
        b.observe_slot(obs);
        truth.advance(models, chain);
    }
    double worst_z = 0.0;
    for (const auto& [key, cell] : tally) {
        const double omega = k_step_prob(models[0], static_cast<ChannelState>(key.first), key.second);
        const double n = static_cast<double>(cell.first);
        const double z = std::abs(static_cast<double>(cell.second) / n - omega) / std::sqrt(omega * (1.0 - omega) / n);
        worst_z = std::max(worst_z, z);
    }
    o.check(tally.size() == 20, "20 (state, age) cells");
    o.check(worst_z <= kBeliefSigmas, "conditional frequency");
    o.detail << "max |omega - matrix power| " << worst << " for k <= 64 (tol " << kBeliefTol << "); max |z| "
             << worst_z << " over " << tally.size() << " (state, age) cells (tol " << kBeliefSigmas << " sigma)";
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "region reproduction", 1.0, region_reproduction},
        {2, "Monte Carlo throughput vs vertices", 30.0, throughput_monte_carlo},
        {3, "round-length law", 30.0, round_length_law_check},
        {4, "utility bound", 300.0, utility_bound},
        {5, "stability", 120.0, stability},
        {6, "controller identities", 1.0, controller_identities},
        {7, "admission KKT", 1.0, admission_kkt},
        {8, "belief exactness", 1.0, belief_exactness},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.misses += std::string(" [exception: ") + e.what() + "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !o.pass;
        std::printf("CRITERION %d %s: %s | %s%s | %.2f s (budget %.0f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
                    o.detail.str().c_str(), o.misses.c_str(), secs, c.budget_seconds);
        std::fflush(stdout);
    }
    return failures;
}
