#include <algorithm>

#include "weylspec/weyl.hpp"

namespace weylspec {

WordPolynomial WordPolynomial::generator(int order, cplx coefficient) {
    WordPolynomial p;
    if (coefficient != cplx(0.0)) p.terms_[{order}] = coefficient;
    return p;
}

WordPolynomial WordPolynomial::derivative() const {
    WordPolynomial d;
    for (const auto& [word, c] : terms_) {
        for (std::size_t i = 0; i < word.size(); ++i) {
            Word w = word;
            ++w[i];
            d.terms_[w] += c;
        }
    }
    std::erase_if(d.terms_, [](const auto& t) { return t.second == cplx(0.0); });
    return d;
}

WordPolynomial WordPolynomial::operator*(const WordPolynomial& other) const {
    WordPolynomial p;
    for (const auto& [a, ca] : terms_) {
        for (const auto& [b, cb] : other.terms_) {
            Word w = a;
            w.insert(w.end(), b.begin(), b.end());
            p.terms_[w] += ca * cb;
        }
    }
    std::erase_if(p.terms_, [](const auto& t) { return t.second == cplx(0.0); });
    return p;
}

WordPolynomial& WordPolynomial::operator+=(const WordPolynomial& other) {
    for (const auto& [w, c] : other.terms_) terms_[w] += c;
    std::erase_if(terms_, [](const auto& t) { return t.second == cplx(0.0); });
    return *this;
}

WordPolynomial WordPolynomial::operator*(cplx c) const {
    WordPolynomial p;
    if (c == cplx(0.0)) return p;
    for (const auto& [w, v] : terms_) p.terms_[w] = v * c;
    return p;
}

int WordPolynomial::max_order() const {
    int k = -1;
    for (const auto& [w, c] : terms_) k = std::max(k, *std::max_element(w.begin(), w.end()));
    return k;
}

CMatrix WordPolynomial::evaluate(std::span<const CMatrix> derivs) const {
    if (derivs.empty()) throw PreconditionError("no derivative data supplied");
    const auto m = derivs.front().rows();
    CMatrix out = CMatrix::Zero(m, m);
    for (const auto& [w, c] : terms_) {
        CMatrix prod = CMatrix::Identity(m, m);
        for (int k : w) {
            if (k >= static_cast<int>(derivs.size()))
                throw PreconditionError("derivative Q^(" + std::to_string(k) + ") not supplied");
            prod = (prod * derivs[static_cast<std::size_t>(k)]).eval();
        }
        out += c * prod;
    }
    return out;
}

std::vector<WordPolynomial> asymptotic_polynomials(int N, Side side) {
    if (N < 0) throw PreconditionError("asymptotic order must be nonnegative");
    const double s = side_sign(side);
    std::vector<WordPolynomial> m;
    if (N == 0) return m;
    m.push_back(WordPolynomial::generator(0, s / cplx(0.0, 2.0)));
    for (int k = 1; k < N; ++k) {
        WordPolynomial next = m[static_cast<std::size_t>(k - 1)].derivative();
        for (int l = 1; l <= k - 1; ++l) next += m[static_cast<std::size_t>(l - 1)] * m[static_cast<std::size_t>(k - l - 1)];
        m.push_back(next * (s * cplx(0.0, 0.5)));
    }
    return m;
}

AsymptoticSeries asymptotic_coefficients(std::span<const CMatrix> derivs, int N, Side side, double x) {
    if (derivs.empty()) throw PreconditionError("asymptotic coefficients need Q(x)");
    if (N > static_cast<int>(derivs.size()))
        throw PreconditionError("order " + std::to_string(N) + " needs derivatives up to Q^(" + std::to_string(N - 1) +
                                ")");
    AsymptoticSeries series;
    series.side = side;
    series.x = x;
    series.m = static_cast<int>(derivs.front().rows());
    for (const auto& p : asymptotic_polynomials(N, side)) series.coefficients.push_back(p.evaluate(derivs));
    return series;
}

AsymptoticSeries asymptotic_coefficients(const PotentialSpec& Q, double x, int N, Side side) {
    if (N - 1 > Q.max_derivative_order())
        throw PreconditionError("potential provides derivatives only up to order " +
                                std::to_string(Q.max_derivative_order()));
    std::vector<CMatrix> derivs;
    for (int k = 0; k < std::max(1, N); ++k) derivs.push_back(Q.evaluate(x, k));
    return asymptotic_coefficients(derivs, N, side, x);
}

CMatrix asymptotic_eval(const AsymptoticSeries& series, cplx z) {
    const cplx r = sqrt_upper(z);
    CMatrix out = CMatrix::Identity(series.m, series.m) * (side_sign(series.side) * cplx(0.0, 1.0) * r);
    cplx power = 1.0 / r;
    for (const auto& c : series.coefficients) {
        out += c * power;
        power /= r;
    }
    return out;
}

}  // namespace weylspec
