#include "core/lp.hpp"
#include "core/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace rrnum;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

TEST_CASE("textbook maximisation with duals")
{
    // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), value 36,
    // duals (0, 1.5, 1).
    lp::Problem p{2, {3, 5}, {}};
    p.constraints.push_back({{1, 0}, lp::Sense::LessEqual, 4});
    p.constraints.push_back({{0, 2}, lp::Sense::LessEqual, 12});
    p.constraints.push_back({{3, 2}, lp::Sense::LessEqual, 18});
    const auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.objective == doctest::Approx(36));
    CHECK(s.x[0] == doctest::Approx(2));
    CHECK(s.x[1] == doctest::Approx(6));
    CHECK(s.duals[0] == doctest::Approx(0).epsilon(1e-12));
    CHECK(s.duals[1] == doctest::Approx(1.5));
    CHECK(s.duals[2] == doctest::Approx(1));
}

TEST_CASE("equality and >= rows need phase one")
{
    // max x + y  s.t. x + y = 3, x >= 1, y <= 1.5 -> value 3
    lp::Problem p{2, {1, 1}, {}};
    p.constraints.push_back({{1, 1}, lp::Sense::Equal, 3});
    p.constraints.push_back({{1, 0}, lp::Sense::GreaterEqual, 1});
    p.constraints.push_back({{0, 1}, lp::Sense::LessEqual, 1.5});
    const auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.objective == doctest::Approx(3));
    CHECK(s.x[0] + s.x[1] == doctest::Approx(3));
    CHECK(s.x[0] >= 1 - 1e-12);
}

TEST_CASE("negative right-hand sides are normalised")
{
    // max -x  s.t. -x <= -2  -> x = 2
    lp::Problem p{1, {-1}, {}};
    p.constraints.push_back({{-1}, lp::Sense::LessEqual, -2});
    const auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.x[0] == doctest::Approx(2));
    CHECK(s.objective == doctest::Approx(-2));
    CHECK(s.duals[0] == doctest::Approx(1));
}

TEST_CASE("infeasible and unbounded are reported")
{
    lp::Problem infeasible{1, {1}, {}};
    infeasible.constraints.push_back({{1}, lp::Sense::LessEqual, 1});
    infeasible.constraints.push_back({{1}, lp::Sense::GreaterEqual, 2});
    CHECK(lp::solve(infeasible).status == lp::Status::Infeasible);

    lp::Problem unbounded{2, {1, 0}, {}};
    unbounded.constraints.push_back({{0, 1}, lp::Sense::LessEqual, 1});
    CHECK(lp::solve(unbounded).status == lp::Status::Unbounded);
}

TEST_CASE("strong duality and complementary slackness on random packing LPs")
{
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t vars = 2 + rng() % 6;
        const std::size_t rows = 1 + rng() % 6;
        lp::Problem p{vars, std::vector<double>(vars), {}};
        for (double& c : p.objective) c = uniform01(rng);
        std::vector<double> b;
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<double> a(vars);
            for (double& e : a) e = 0.1 + uniform01(rng);
            b.push_back(0.5 + uniform01(rng));
            p.constraints.push_back({a, lp::Sense::LessEqual, b.back()});
        }
        const auto s = lp::solve(p);
        REQUIRE(s.status == lp::Status::Optimal);
        // Primal feasibility.
        for (std::size_t r = 0; r < rows; ++r) CHECK(dot(p.constraints[r].coefficients, s.x) <= b[r] + 1e-9);
        // Dual feasibility: y >= 0 and A^T y >= c.
        for (double y : s.duals) CHECK(y >= -1e-9);
        for (std::size_t j = 0; j < vars; ++j) {
            double col = 0.0;
            for (std::size_t r = 0; r < rows; ++r) col += p.constraints[r].coefficients[j] * s.duals[r];
            CHECK(col >= p.objective[j] - 1e-9);
        }
        // Strong duality.
        CHECK(std::abs(dot(b, s.duals) - s.objective) <= 1e-9);
        // Complementary slackness.
        for (std::size_t r = 0; r < rows; ++r)
            CHECK(std::abs(s.duals[r] * (b[r] - dot(p.constraints[r].coefficients, s.x))) <= 1e-9);
    }
}

TEST_CASE("degenerate problem terminates")
{
    // Classic cycling-prone instance (Beale).
    lp::Problem p{4, {0.75, -150, 0.02, -6}, {}};
    p.constraints.push_back({{0.25, -60, -0.04, 9}, lp::Sense::LessEqual, 0});
    p.constraints.push_back({{0.5, -90, -0.02, 3}, lp::Sense::LessEqual, 0});
    p.constraints.push_back({{0, 0, 1, 0}, lp::Sense::LessEqual, 1});
    const auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.objective == doctest::Approx(0.05));
}
