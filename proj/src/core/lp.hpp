#pragma once

#include <cstddef>
#include <vector>

namespace rrnum::lp {

enum class Sense { LessEqual, GreaterEqual, Equal };

struct Constraint {
    std::vector<double> coefficients;
    Sense sense;
    double rhs;
};

/// maximize objective . x  subject to constraints, x >= 0.
struct Problem {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<Constraint> constraints;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
    Status status = Status::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    /// One multiplier per constraint, sign convention of the row as given
    /// (>= 0 for <= rows of a maximisation).
    std::vector<double> duals;
};

/// Dense two-phase tableau simplex. Dantzig pricing, switching to Bland's
/// rule after a run of degenerate pivots.
Solution solve(const Problem& problem);

}  // namespace rrnum::lp
