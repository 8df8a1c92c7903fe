#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rrnum {

enum class UtilityKind { Log1p, Linear, Generic };

/// One separable term g_n(r) on [0, 1].
///   Log1p   : weight * log(1 + r)
///   Linear  : weight * r
///   Generic : weight * evaluator(r); evaluator must be concave, nondecreasing
///             and nonnegative on [0, 1]. Concavity is checked lazily by the
///             admission search.
struct UtilityTerm {
    UtilityKind kind = UtilityKind::Log1p;
    double weight = 1.0;
    std::function<double(double)> evaluator;
    /// Free-form tag carried into config echoes (e.g. "power:0.5").
    std::string label;

    double value(double r) const;
    double derivative(double r) const;

    static UtilityTerm log1p(double weight = 1.0);
    static UtilityTerm linear(double weight = 1.0);
    static UtilityTerm generic(std::function<double(double)> evaluator, double weight = 1.0, std::string label = {});
};

/// Separable utility g(r) = sum_n g_n(r_n).
class UtilityFunction {
public:
    explicit UtilityFunction(std::vector<UtilityTerm> terms);

    static UtilityFunction log1p(std::size_t users, double weight = 1.0);
    static UtilityFunction linear(std::span<const double> weights);

    std::size_t size() const noexcept { return terms_.size(); }
    const UtilityTerm& term(std::size_t n) const { return terms_.at(n); }

    double value(std::span<const double> r) const;
    std::vector<double> gradient(std::span<const double> r) const;
    /// g(1), the largest value on the unit box.
    double max_value() const;

private:
    std::vector<UtilityTerm> terms_;
};

}  // namespace rrnum
