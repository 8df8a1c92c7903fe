#include "core/utility.hpp"

#include "core/error.hpp"

#include <cmath>

namespace rrnum {

double UtilityTerm::value(double r) const
{
    switch (kind) {
    case UtilityKind::Log1p:
        return weight * std::log1p(r);
    case UtilityKind::Linear:
        return weight * r;
    case UtilityKind::Generic:
        return weight * evaluator(r);
    }
    return 0.0;
}

double UtilityTerm::derivative(double r) const
{
    switch (kind) {
    case UtilityKind::Log1p:
        return weight / (1.0 + r);
    case UtilityKind::Linear:
        return weight;
    case UtilityKind::Generic: {
        constexpr double h = 1e-6;
        const double lo = std::max(0.0, r - h);
        const double hi = std::min(1.0, r + h);
        return weight * (evaluator(hi) - evaluator(lo)) / (hi - lo);
    }
    }
    return 0.0;
}

UtilityTerm UtilityTerm::log1p(double weight) { return {UtilityKind::Log1p, weight, {}, "log1p"}; }

UtilityTerm UtilityTerm::linear(double weight) { return {UtilityKind::Linear, weight, {}, "linear"}; }

UtilityTerm UtilityTerm::generic(std::function<double(double)> evaluator, double weight, std::string label)
{
    require(static_cast<bool>(evaluator), "generic utility needs an evaluator");
    return {UtilityKind::Generic, weight, std::move(evaluator), label.empty() ? "generic" : std::move(label)};
}

UtilityFunction::UtilityFunction(std::vector<UtilityTerm> terms) : terms_(std::move(terms))
{
    require(!terms_.empty(), "utility needs at least one user");
    for (std::size_t n = 0; n < terms_.size(); ++n) {
        const UtilityTerm& t = terms_[n];
        require(std::isfinite(t.weight) && t.weight >= 0.0,
                "utility weight for user " + std::to_string(n + 1) + " must be finite and nonnegative");
        if (t.kind == UtilityKind::Generic) {
            require(static_cast<bool>(t.evaluator), "generic utility for user " + std::to_string(n + 1) + " has no evaluator");
            const double g0 = t.value(0.0);
            const double g1 = t.value(1.0);
            require(std::isfinite(g0) && std::isfinite(g1) && g0 >= 0.0 && g1 >= g0,
                    "generic utility for user " + std::to_string(n + 1) + " must be finite, nonnegative and nondecreasing on [0, 1]");
        }
    }
}

UtilityFunction UtilityFunction::log1p(std::size_t users, double weight)
{
    return UtilityFunction(std::vector<UtilityTerm>(users, UtilityTerm::log1p(weight)));
}

UtilityFunction UtilityFunction::linear(std::span<const double> weights)
{
    std::vector<UtilityTerm> terms;
    for (double w : weights) terms.push_back(UtilityTerm::linear(w));
    return UtilityFunction(std::move(terms));
}

double UtilityFunction::value(std::span<const double> r) const
{
    require(r.size() == terms_.size(), "utility argument has the wrong dimension");
    double sum = 0.0;
    for (std::size_t n = 0; n < terms_.size(); ++n) sum += terms_[n].value(r[n]);
    return sum;
}

std::vector<double> UtilityFunction::gradient(std::span<const double> r) const
{
    require(r.size() == terms_.size(), "utility argument has the wrong dimension");
    std::vector<double> g(terms_.size());
    for (std::size_t n = 0; n < terms_.size(); ++n) g[n] = terms_[n].derivative(r[n]);
    return g;
}

double UtilityFunction::max_value() const
{
    std::vector<double> ones(terms_.size(), 1.0);
    return value(ones);
}

}  // namespace rrnum
