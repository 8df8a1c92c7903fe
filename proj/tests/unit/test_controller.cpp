#include "support.hpp"

#include "core/capacity.hpp"
#include "core/controller.hpp"
#include "core/error.hpp"
#include "core/sim.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace rrnum;

namespace {

const ChannelSet kSymmetric2(2, ChannelModel(0.2, 0.2));

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

double log1p_closed_form(double vg, double w, double q)
{
    return q == 0.0 ? 1.0 : std::clamp(vg * w / q - 1.0, 0.0, 1.0);
}

}  // namespace

TEST_CASE("log1p admission: closed-form examples")
{
    const auto g = UtilityFunction::log1p(3);
    const std::vector<double> q{5.0, 8.0, 0.0};
    const auto d = solve_admission(q, g, 10.0);
    CHECK(d.rates[0] == doctest::Approx(1.0));
    CHECK(d.rates[1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(d.rates[2] == 1.0);
    const double expected = 10.0 * (std::log(2.0) + std::log(1.25) + std::log(2.0)) - 5.0 - 8.0 * 0.25;
    CHECK(d.h_star == doctest::Approx(expected).epsilon(1e-14));
    CHECK(d.h_star >= 10.0 * g.value(std::vector<double>(3, 0.0)));
}

TEST_CASE("linear admission is bang-bang with ties admitted")
{
    const std::vector<double> w{2.0, 2.0, 2.0};
    const auto g = UtilityFunction::linear(w);
    const auto d = solve_admission(std::vector<double>{19.0, 20.0, 21.0}, g, 10.0);
    CHECK(d.rates == std::vector<double>{1.0, 1.0, 0.0});
}

TEST_CASE("zero backlog admits fully for every kind")
{
    const UtilityFunction g({UtilityTerm::log1p(0.5), UtilityTerm::linear(3.0),
                             UtilityTerm::generic([](double r) { return std::sqrt(r); })});
    const auto d = solve_admission(std::vector<double>(3, 0.0), g, 1e-6);
    CHECK(d.rates == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("admission limits in V_g")
{
    const auto g = UtilityFunction::log1p(2);
    const std::vector<double> q{3.0, 0.5};
    const auto small = solve_admission(q, g, 1e-9);
    CHECK(small.rates[0] == 0.0);
    CHECK(small.rates[1] == 0.0);
    const auto huge = solve_admission(q, g, 1e9);
    CHECK(huge.rates[0] == 1.0);
    CHECK(huge.rates[1] == 1.0);
    const auto none = solve_admission(q, g, 0.0);
    CHECK(none.rates == std::vector<double>{0.0, 0.0});
    CHECK(none.h_star == 0.0);
}

TEST_CASE("admission rejects bad inputs")
{
    const auto g = UtilityFunction::log1p(2);
    CHECK_THROWS_AS(solve_admission(std::vector<double>{1.0}, g, 1.0), Error);
    CHECK_THROWS_AS(solve_admission(std::vector<double>{1.0, -1.0}, g, 1.0), Error);
    CHECK_THROWS_AS(solve_admission(std::vector<double>{1.0, 1.0}, g, -1.0), Error);
    CHECK_THROWS_AS(solve_admission(std::vector<double>{1.0, 1.0}, g, std::nan("")), Error);
}

TEST_CASE("log1p admission satisfies KKT stationarity on random inputs")
{
    Rng rng(404);
    int interior = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double vg = 0.1 + 500.0 * uniform01(rng);
        const double w = 0.1 + 2.0 * uniform01(rng);
        const double q = 1000.0 * uniform01(rng);
        const UtilityFunction g({UtilityTerm::log1p(w)});
        const double r = solve_admission(std::vector<double>{q}, g, vg).rates[0];
        const double grad = vg * w / (1.0 + r);
        if (r > 0.0 && r < 1.0) {
            ++interior;
            CHECK(std::abs(grad - q) <= 1e-6);
        } else if (r == 0.0) {
            CHECK(grad <= q + 1e-6);
        } else {
            CHECK(grad >= q - 1e-6);
        }
    }
    CHECK(interior > 10);
}

TEST_CASE("golden-section path matches the log1p closed form")
{
    Rng rng(405);
    for (int trial = 0; trial < 1000; ++trial) {
        const double vg = 0.1 + 200.0 * uniform01(rng);
        const double q = 400.0 * uniform01(rng);
        const UtilityFunction closed({UtilityTerm::log1p(1.0)});
        const UtilityFunction generic({UtilityTerm::generic([](double r) { return std::log1p(r); })});
        const std::vector<double> backlog{q};
        const double a = solve_admission(backlog, closed, vg).rates[0];
        const double b = solve_admission(backlog, generic, vg).rates[0];
        CHECK(a == doctest::Approx(log1p_closed_form(vg, 1.0, q)).epsilon(1e-15));
        CHECK(std::abs(a - b) <= 1e-6);
    }
}

TEST_CASE("generic path handles other concave shapes")
{
    // sqrt: maximiser of V sqrt(r) - Q r is (V / 2Q)^2.
    const UtilityFunction g({UtilityTerm::generic([](double r) { return std::sqrt(r); })});
    const double r = solve_admission(std::vector<double>{10.0}, g, 8.0).rates[0];
    CHECK(std::abs(r - 0.16) <= 1e-6);
}

TEST_CASE("non-concave generic utility is rejected naming the user")
{
    const UtilityFunction g({UtilityTerm::log1p(), UtilityTerm::generic([](double r) { return r * r; })});
    try {
        solve_admission(std::vector<double>{1.0, 0.5}, g, 1.0);
        FAIL("expected a non-concavity error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonConcave);
        CHECK(std::string(e.what()).find("user 2") != std::string::npos);
    }
}

TEST_CASE("ratio metric: hand values")
{
    const std::vector<double> q{10.0, 1.0};
    CHECK(ratio_metric(q, kSymmetric2, ActivationVector(2, 0b01)) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(ratio_metric(q, kSymmetric2, ActivationVector(2, 0b11)) ==
          doctest::Approx(11.0 * 1.6 / 5.2).epsilon(1e-14));
    CHECK(11.0 * 1.6 / 5.2 == doctest::Approx(3.3846).epsilon(1e-4));
    for (std::uint64_t m = 1; m < 4; ++m) CHECK(ratio_metric(std::vector<double>{0, 0}, kSymmetric2, {2, m}) == 0.0);
}

TEST_CASE("selection: hand values and idle")
{
    for (auto mode : {SelectionMode::Exhaustive, SelectionMode::SymmetricFast}) {
        const auto a = select_phi(std::vector<double>{10.0, 1.0}, kSymmetric2, mode, 16);
        CHECK(a.phi.mask() == 0b01);
        CHECK(a.value == doctest::Approx(5.0).epsilon(1e-14));
        const auto b = select_phi(std::vector<double>{10.0, 10.0}, kSymmetric2, mode, 16);
        CHECK(b.phi.mask() == 0b11);
        CHECK(b.value == doctest::Approx(20.0 * 0.32 / 1.04).epsilon(1e-14));
        CHECK(b.value == doctest::Approx(6.1538).epsilon(1e-4));
        const auto c = select_phi(std::vector<double>{0.0, 0.0}, kSymmetric2, mode, 16);
        CHECK(c.idle());
        CHECK(c.value == 0.0);
    }
}

TEST_CASE("selection tie-break: larger subset, then smaller mask")
{
    // Four identical channels with equal backlog on channels 2 and 3 only:
    // {2}, {3} tie at M = 1; the winner must be reported deterministically.
    const ChannelSet models(4, ChannelModel(0.2, 0.2));
    const std::vector<double> q{0.0, 7.0, 7.0, 0.0};
    const auto d = select_phi(q, models, SelectionMode::Exhaustive, 16);
    const auto single = ratio_metric(q, models, ActivationVector(4, 0b0010));
    const auto pair = ratio_metric(q, models, ActivationVector(4, 0b0110));
    const auto expected = pair > single ? 0b0110u : 0b0010u;
    CHECK(d.phi.mask() == expected);

    // Exact tie between equal-size subsets resolves to the smaller bitmask.
    const ChannelSet three(3, ChannelModel(0.3, 0.1));
    const auto t = select_phi(std::vector<double>{5.0, 5.0, 5.0}, three, SelectionMode::PairsOnly, 16);
    CHECK(t.phi.mask() == 0b011);
}

TEST_CASE("exhaustive value equals the best ratio over all subsets")
{
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng() % 6;
        const auto models = rrnum::testing::random_models(rng, n);
        std::vector<double> q(n);
        for (double& v : q) v = 100.0 * uniform01(rng);
        const auto d = select_phi(q, models, SelectionMode::Exhaustive, 16);
        double best = 0.0;
        for (std::uint64_t m = 1; m < (std::uint64_t{1} << n); ++m)
            best = std::max(best, ratio_metric(q, models, ActivationVector(n, m)));
        CHECK(rel_gap(d.value, best) <= 1e-12);
        CHECK(rel_gap(d.value, ratio_metric(q, models, d.phi)) <= 1e-12);
    }
}

TEST_CASE("symmetric fast path equals exhaustive search")
{
    Rng rng(408);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 10;
        const ChannelSet models(n, rrnum::testing::random_model(rng));
        std::vector<double> q(n);
        for (double& v : q) v = 50.0 * uniform01(rng);
        const auto ex = select_phi(q, models, SelectionMode::Exhaustive, 16);
        const auto fast = select_phi(q, models, SelectionMode::SymmetricFast, 16);
        CHECK(rel_gap(ex.value, fast.value) <= 1e-12);
        double mass_ex = 0.0, mass_fast = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mass_ex += ex.phi.active(i) ? q[i] : 0.0;
            mass_fast += fast.phi.active(i) ? q[i] : 0.0;
        }
        CHECK(rel_gap(mass_ex, mass_fast) <= 1e-12);
        CHECK(ex.phi.count() == fast.phi.count());
    }
}

TEST_CASE("a single round robin dominates every mixture of rounds")
{
    Rng rng(1);
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
            const double d = law.mean();
            const double alpha = uniform01(rng);
            num += alpha * f;
            den += alpha * d;
            best = std::max(best, f / d);
        }
        CHECK(best >= num / den - 1e-12 * std::max(1.0, best));
    }
}

TEST_CASE("selection is invariant to scaling the backlog")
{
    Rng rng(9);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng() % 6;
        const auto models = rrnum::testing::random_models(rng, n);
        std::vector<double> q(n);
        for (double& v : q) v = 30.0 * uniform01(rng);
        const auto base = select_phi(q, models, SelectionMode::Exhaustive, 16);
        for (double c : {1e-3, 1.0, 1e3}) {
            std::vector<double> scaled(q);
            for (double& v : scaled) v *= c;
            const auto d = select_phi(scaled, models, SelectionMode::Exhaustive, 16);
            CHECK(d.phi.mask() == base.phi.mask());
            CHECK(rel_gap(d.value, c * base.value) <= 1e-12);
        }
    }
}

TEST_CASE("pairs mode only picks two-channel subsets or idles")
{
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng() % 6;
        const auto models = rrnum::testing::random_models(rng, n);
        std::vector<double> q(n);
        for (double& v : q) v = uniform01(rng) < 0.2 ? 0.0 : 10.0 * uniform01(rng);
        const auto d = select_phi(q, models, SelectionMode::PairsOnly, 16);
        const bool any = std::any_of(q.begin(), q.end(), [](double v) { return v > 0; });
        if (!any) {
            CHECK(d.idle());
            continue;
        }
        REQUIRE(d.phi.count() == 2);
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                best = std::max(best, ratio_metric(q, models, ActivationVector(n, (1ull << i) | (1ull << j))));
        CHECK(rel_gap(d.value, best) <= 1e-12);
    }
}

TEST_CASE("selector rejects mode/model mismatches")
{
    const ChannelSet mixed{ChannelModel(0.2, 0.2), ChannelModel(0.1, 0.3)};
    CHECK_THROWS_AS(PhiSelector(mixed, SelectionMode::SymmetricFast, 16), Error);
    CHECK_THROWS_AS(PhiSelector(ChannelSet(1, ChannelModel(0.2, 0.2)), SelectionMode::PairsOnly, 16), Error);
    try {
        PhiSelector(ChannelSet(17, ChannelModel(0.2, 0.2)), SelectionMode::Exhaustive, 16);
        FAIL("expected cap error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CapExceeded);
        CHECK(std::string(e.what()).find("pairs_only") != std::string::npos);
    }
    CHECK_THROWS_AS(select_phi(std::vector<double>{1.0}, mixed, SelectionMode::Exhaustive, 16), Error);
}

TEST_CASE("frame decision composes admission and selection on one snapshot")
{
    const PhiSelector selector(kSymmetric2, SelectionMode::Exhaustive, 16);
    const auto g = UtilityFunction::log1p(2);
    const std::vector<double> q{10.0, 10.0};
    const auto d = qrrnum_frame(q, selector, g, 15.0);
    CHECK(d.admission.rates[0] == doctest::Approx(0.5));
    CHECK(d.selection.phi.mask() == 0b11);
    const auto idle = qrrnum_frame(std::vector<double>{0.0, 0.0}, selector, g, 15.0);
    CHECK(idle.selection.idle());
    CHECK(idle.admission.rates == std::vector<double>{1.0, 1.0});
}

TEST_CASE("golden frame trace on the two-user benchmark")
{
    // Recorded once from a reviewed run (seed 1, V_g = 5) and pinned: the
    // first frame idles on empty queues, then admission tracks V/Q - 1.
    struct Row {
        std::uint64_t start, length, mask;
        double r[2], q[2];
    };
    const Row golden[] = {
        {0, 1, 0, {1, 1}, {0, 0}},
        {1, 3, 3, {1, 1}, {1, 1}},
        {4, 4, 3, {0.66666666666666674, 0.25}, {3, 4}},
        {8, 1, 1, {0, 0.66666666666666674}, {5.6666666666666679, 3}},
        {9, 3, 3, {0, 0.36363636363636354}, {5.6666666666666679, 3.666666666666667}},
        {12, 2, 3, {0.071428571428571175, 0.050955414012739064}, {4.6666666666666679, 4.7575757575757569}},
        {14, 2, 3, {0.039603960396039417, 0.028915279818882533}, {4.8095238095238102, 4.8594865856012346}},
        {16, 11, 3, {0.022760150448452032, 0.016814627228397327}, {4.8887317303158895, 4.9173171452389992}},
        {27, 1, 1, {1, 1}, {2.1390933852488594, 0.10088776337038396}},
        {28, 1, 1, {0.59281658312424268, 1}, {3.1390933852488594, 1.100887763370384}},
        {29, 9, 1, {0.33979652306020447, 1}, {3.7319099683731021, 2.100887763370384}},
        {38, 1, 2, {1, 0}, {0.67959304612040894, 11.100887763370384}},
    };
    auto cfg = rrnum::testing::make_run(kSymmetric2, UtilityFunction::log1p(2), 60, 0, 1, 5.0);
    cfg.record_frames = true;
    const auto m = run_qrrnum(cfg);
    REQUIRE(m.frame_log.size() >= std::size(golden));
    for (std::size_t k = 0; k < std::size(golden); ++k) {
        const auto& f = m.frame_log[k];
        const auto& g = golden[k];
        INFO("frame " << k);
        CHECK(f.index == k);
        CHECK(f.start == g.start);
        CHECK(f.length == g.length);
        CHECK(f.mask == g.mask);
        for (std::size_t n = 0; n < 2; ++n) {
            CHECK(std::abs(f.rates[n] - g.r[n]) <= 1e-12);
            CHECK(std::abs(f.backlog[n] - g.q[n]) <= 1e-12);
        }
    }
    // Every frame decision is reproducible from its own backlog snapshot.
    const PhiSelector selector(kSymmetric2, SelectionMode::Exhaustive, 16);
    for (const auto& f : m.frame_log) {
        const auto d = qrrnum_frame(f.backlog, selector, cfg.utility, 5.0);
        CHECK(d.selection.phi.mask() == f.mask);
        CHECK(d.admission.rates == f.rates);
    }
}
