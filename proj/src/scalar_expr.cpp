#include "weylspec/scalar_expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "weylspec/types.hpp"

namespace weylspec {
namespace {

class Cursor {
public:
    explicit Cursor(std::string_view text) : text_(text) {}

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool done() {
        skip_ws();
        return pos_ >= text_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    bool accept_word(std::string_view w) {
        skip_ws();
        if (text_.substr(pos_, w.size()) == w) {
            pos_ += w.size();
            return true;
        }
        return false;
    }
    bool at_number() {
        char c = peek();
        return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
    }
    double number() {
        skip_ws();
        std::string rest(text_.substr(pos_));
        char* end = nullptr;
        double v = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) fail("expected a number");
        pos_ += static_cast<std::size_t>(end - rest.c_str());
        return v;
    }
    std::size_t position() const { return pos_; }
    void rewind(std::size_t pos) { pos_ = pos; }
    [[noreturn]] void fail(const std::string& what) const {
        throw PreconditionError("cannot parse expression '" + std::string(text_) + "' at offset " +
                                std::to_string(pos_) + ": " + what);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

bool at_atom(Cursor& c) {
    if (c.at_number()) return true;
    return c.peek() == 'p';
}

// True (and consumes the '*') when '*' is followed by another atom.
bool accept_star_atom(Cursor& c) {
    const std::size_t saved = c.position();
    if (c.accept('*') && at_atom(c)) return true;
    c.rewind(saved);
    return false;
}

double atom(Cursor& c) {
    if (c.at_number()) return c.number();
    if (c.accept_word("pi")) return pi;
    c.fail("expected a number or 'pi'");
}

// coeff := atom (['*'|'/'] atom)*, where '*' may be omitted only between atoms
double coefficient(Cursor& c) {
    double v = atom(c);
    for (;;) {
        if (c.peek() == '/') {
            c.accept('/');
            v /= atom(c);
        } else if (accept_star_atom(c) || at_atom(c)) {
            v *= atom(c);
        } else {
            break;
        }
    }
    return v;
}

// Optional multiplier chain after a function call: ('*' atom | '/' atom)*
double trailing_factor(Cursor& c) {
    double v = 1.0;
    for (;;) {
        if (c.accept('/')) {
            v /= atom(c);
        } else if (c.peek() == '*') {
            c.accept('*');
            v *= atom(c);
        } else {
            return v;
        }
    }
}

}  // namespace

ScalarExpr ScalarExpr::parse(std::string_view text) {
    Cursor c(text);
    ScalarExpr expr;
    if (c.done()) c.fail("empty expression");
    bool first = true;
    while (!c.done()) {
        double sign = 1.0;
        if (c.accept('+')) {
        } else if (c.accept('-')) {
            sign = -1.0;
        } else if (!first) {
            c.fail("expected '+' or '-'");
        }
        first = false;

        double coeff = 1.0;
        bool have_coeff = false;
        if (at_atom(c)) {
            coeff = coefficient(c);
            have_coeff = true;
            c.accept('*');
        }
        Func func{};
        bool is_wave = false;
        if (c.accept_word("cos")) {
            func = Func::cos;
            is_wave = true;
        } else if (c.accept_word("sin")) {
            func = Func::sin;
            is_wave = true;
        }
        if (!is_wave) {
            if (!have_coeff) c.fail("expected a term");
            expr.add_constant(sign * coeff);
            continue;
        }
        if (!c.accept('(')) c.fail("expected '('");
        double freq = 1.0;
        if (at_atom(c)) {
            freq = coefficient(c);
            c.accept('*');
        }
        if (!c.accept('x')) c.fail("expected 'x'");
        if (!c.accept(')')) c.fail("expected ')'");
        coeff *= trailing_factor(c);
        expr.add_wave(sign * coeff, freq, func);
    }
    return expr;
}

double parse_number_expr(std::string_view text) {
    Cursor c(text);
    double sign = 1.0;
    if (c.accept('-')) sign = -1.0;
    double v = coefficient(c);
    if (!c.done()) c.fail("trailing characters");
    return sign * v;
}

ScalarExpr& ScalarExpr::add_wave(double amplitude, double frequency, Func func) {
    waves_.push_back({amplitude, frequency, func});
    return *this;
}

ScalarExpr& ScalarExpr::add_constant(double c) {
    constant_ += c;
    return *this;
}

double ScalarExpr::evaluate(double x, int order) const {
    double value = order == 0 ? constant_ : 0.0;
    for (const auto& w : waves_) {
        // d^n/dx^n cos(bx) = b^n cos(bx + n pi/2), likewise for sin; phase handled exactly.
        const double arg = w.frequency * x;
        const double c = std::cos(arg), s = std::sin(arg);
        const int phase = ((order % 4) + 4) % 4;
        double base;
        if (w.func == Func::cos) {
            constexpr double cos_shift[4][2] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
            base = cos_shift[phase][0] * c + cos_shift[phase][1] * s;
        } else {
            constexpr double sin_shift[4][2] = {{0, 1}, {1, 0}, {0, -1}, {-1, 0}};
            base = sin_shift[phase][0] * c + sin_shift[phase][1] * s;
        }
        value += w.amplitude * std::pow(w.frequency, order) * base;
    }
    return value;
}

std::string ScalarExpr::to_string() const {
    std::ostringstream os;
    os.precision(17);
    os << constant_;
    for (const auto& w : waves_) {
        os << (w.amplitude < 0 ? " - " : " + ") << std::abs(w.amplitude) << "*"
           << (w.func == Func::cos ? "cos(" : "sin(") << w.frequency << "*x)";
    }
    return os.str();
}

}  // namespace weylspec
