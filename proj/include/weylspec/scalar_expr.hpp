#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace weylspec {

/// Real scalar function of the form  c + sum_k a_k cos(b_k x) + sum_k a_k sin(b_k x).
///
/// Grammar accepted by parse():
///   expr  := ['+'|'-'] term (('+'|'-') term)*
///   term  := coeff ['*'] ('cos'|'sin') '(' [coeff ['*']] 'x' ')'  |  coeff
///   coeff := atom (['*'|'/'] atom)*       atom := number | 'pi'
/// Whitespace is ignored, so "2cos(2x)", "2*cos(2*x)" and "-0.5 + sin(pi*x)/2" are all valid
/// (the trailing "/2" divides the whole term).
class ScalarExpr {
public:
    enum class Func { cos, sin };
    struct Wave {
        double amplitude;
        double frequency;
        Func func;
    };

    ScalarExpr() = default;
    explicit ScalarExpr(double constant) : constant_(constant) {}

    static ScalarExpr parse(std::string_view text);

    ScalarExpr& add_wave(double amplitude, double frequency, Func func);
    ScalarExpr& add_constant(double c);

    /// order-th derivative at x; every order is available.
    double evaluate(double x, int order = 0) const;

    double constant() const noexcept { return constant_; }
    const std::vector<Wave>& waves() const noexcept { return waves_; }
    bool is_constant() const noexcept { return waves_.empty(); }
    std::string to_string() const;

private:
    double constant_ = 0.0;
    std::vector<Wave> waves_;
};

/// Evaluates a purely numeric coefficient expression such as "pi", "2*pi", "0.5" or "pi/2".
double parse_number_expr(std::string_view text);

}  // namespace weylspec
