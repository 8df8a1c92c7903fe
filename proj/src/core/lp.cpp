#include "core/lp.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rrnum::lp {
namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kOptimalityTol = 1e-11;
constexpr double kFeasibilityTol = 1e-9;
constexpr int kDegenerateBeforeBland = 50;

class Tableau {
public:
    Tableau(const Problem& p) : m_(p.constraints.size()), n_(p.num_vars)
    {
        std::size_t surplus = 0;
        row_sign_.resize(m_);
        sense_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            const Constraint& c = p.constraints[i];
            require(c.coefficients.size() == n_, "lp constraint width does not match variable count");
            Sense s = c.sense;
            row_sign_[i] = c.rhs < 0.0 ? -1.0 : 1.0;
            if (row_sign_[i] < 0.0 && s != Sense::Equal) s = (s == Sense::LessEqual) ? Sense::GreaterEqual : Sense::LessEqual;
            sense_[i] = s;
            if (s == Sense::GreaterEqual) ++surplus;
        }
        width_ = n_ + m_ + surplus;
        cells_.assign(m_ * (width_ + 1), 0.0);
        artificial_.assign(width_, false);
        basis_.resize(m_);

        std::size_t next_surplus = n_ + m_;
        for (std::size_t i = 0; i < m_; ++i) {
            const Constraint& c = p.constraints[i];
            double* r = row(i);
            for (std::size_t j = 0; j < n_; ++j) r[j] = row_sign_[i] * c.coefficients[j];
            r[width_] = row_sign_[i] * c.rhs;
            r[n_ + i] = 1.0;
            basis_[i] = n_ + i;
            if (sense_[i] != Sense::LessEqual) artificial_[n_ + i] = true;
            if (sense_[i] == Sense::GreaterEqual) r[next_surplus++] = -1.0;
        }
        reduced_.assign(width_ + 1, 0.0);
    }

    Solution run(const Problem& p, std::size_t iteration_limit)
    {
        Solution out;
        // Phase 1: maximise -sum(artificials).
        std::vector<double> phase1(width_, 0.0);
        bool any_artificial = false;
        for (std::size_t j = 0; j < width_; ++j)
            if (artificial_[j]) {
                phase1[j] = -1.0;
                any_artificial = true;
            }
        if (any_artificial) {
            price(phase1);
            if (!iterate(iteration_limit, /*allow_artificial=*/true)) {
                out.status = Status::IterationLimit;
                return out;
            }
            if (reduced_[width_] < -kFeasibilityTol * (1.0 + rhs_scale())) {
                out.status = Status::Infeasible;
                return out;
            }
            evict_artificials();
        }

        std::vector<double> phase2(width_, 0.0);
        std::copy(p.objective.begin(), p.objective.end(), phase2.begin());
        price(phase2);
        const auto result = iterate(iteration_limit, /*allow_artificial=*/false);
        if (!result) {
            out.status = unbounded_ ? Status::Unbounded : Status::IterationLimit;
            return out;
        }

        out.status = Status::Optimal;
        out.objective = reduced_[width_];
        out.x.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) out.x[basis_[i]] = std::max(0.0, row(i)[width_]);
        out.duals.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) out.duals[i] = row_sign_[i] * reduced_[n_ + i];
        return out;
    }

private:
    double* row(std::size_t i) { return cells_.data() + i * (width_ + 1); }

    double rhs_scale()
    {
        double s = 0.0;
        for (std::size_t i = 0; i < m_; ++i) s = std::max(s, std::abs(row(i)[width_]));
        return s;
    }

    void price(const std::vector<double>& cost)
    {
        cost_ = cost;
        std::fill(reduced_.begin(), reduced_.end(), 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost_[basis_[i]];
            if (cb == 0.0) continue;
            const double* r = row(i);
            for (std::size_t j = 0; j <= width_; ++j) reduced_[j] += cb * r[j];
        }
        for (std::size_t j = 0; j < width_; ++j) reduced_[j] -= cost_[j];
    }

    void pivot(std::size_t pr, std::size_t pc)
    {
        double* prow = row(pr);
        const double inv = 1.0 / prow[pc];
        for (std::size_t j = 0; j <= width_; ++j) prow[j] *= inv;
        prow[pc] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == pr) continue;
            double* r = row(i);
            const double f = r[pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= width_; ++j) r[j] -= f * prow[j];
            r[pc] = 0.0;
        }
        const double f = reduced_[pc];
        if (f != 0.0) {
            for (std::size_t j = 0; j <= width_; ++j) reduced_[j] -= f * prow[j];
            reduced_[pc] = 0.0;
        }
        basis_[pr] = pc;
    }

    // Returns false on iteration limit or unboundedness.
    bool iterate(std::size_t limit, bool allow_artificial)
    {
        int degenerate = 0;
        for (std::size_t it = 0; it < limit; ++it) {
            const bool bland = degenerate >= kDegenerateBeforeBland;
            std::size_t enter = width_;
            double best = -kOptimalityTol;
            for (std::size_t j = 0; j < width_; ++j) {
                if (!allow_artificial && artificial_[j]) continue;
                if (reduced_[j] < best) {
                    enter = j;
                    if (bland) break;
                    best = reduced_[j];
                }
            }
            if (enter == width_) return true;

            std::size_t leave = m_;
            double ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = row(i)[enter];
                if (a <= kPivotTol) continue;
                const double r = std::max(0.0, row(i)[width_]) / a;
                if (leave == m_ || r < ratio - 1e-14 ||
                    (r <= ratio + 1e-14 && (bland ? basis_[i] < basis_[leave] : a > row(leave)[enter]))) {
                    leave = i;
                    ratio = std::min(ratio, r);
                }
            }
            if (leave == m_) {
                unbounded_ = true;
                return false;
            }
            degenerate = ratio <= 1e-14 ? degenerate + 1 : 0;
            pivot(leave, enter);
        }
        return false;
    }

    void evict_artificials()
    {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!artificial_[basis_[i]]) continue;
            const double* r = row(i);
            std::size_t best = width_;
            double mag = 1e-9;
            for (std::size_t j = 0; j < width_; ++j)
                if (!artificial_[j] && std::abs(r[j]) > mag) {
                    mag = std::abs(r[j]);
                    best = j;
                }
            // A row with no usable column is redundant; its artificial stays at zero.
            if (best != width_) pivot(i, best);
        }
    }

    std::size_t m_;
    std::size_t n_;
    std::size_t width_ = 0;
    std::vector<double> cells_;
    std::vector<double> reduced_;
    std::vector<double> cost_;
    std::vector<double> row_sign_;
    std::vector<Sense> sense_;
    std::vector<bool> artificial_;
    std::vector<std::size_t> basis_;
    bool unbounded_ = false;
};

}  // namespace

Solution solve(const Problem& problem)
{
    require(problem.objective.size() == problem.num_vars, "lp objective width does not match variable count");
    Tableau t(problem);
    const std::size_t limit = 200 * (problem.constraints.size() + problem.num_vars) + 1000;
    return t.run(problem, limit);
}

}  // namespace rrnum::lp
