#pragma once

#include <map>
#include <span>
#include <vector>

#include "weylspec/propagator.hpp"

namespace weylspec {

enum class Side { plus, minus };

inline double side_sign(Side s) { return s == Side::plus ? 1.0 : -1.0; }
const char* to_string(Side s);

enum class WeylMethod { disk_limit, floquet_split };

/// Half-line Weyl-Titchmarsh matrix M_+(z, x0) or M_-(z, x0).
struct WeylMatrix {
    CMatrix value;
    Side side = Side::plus;
    cplx z;
    double x0 = 0.0;
    double convergence = 0.0;  ///< norm of the last Cauchy increment (or extrapolation residual)
    WeylMethod method = WeylMethod::disk_limit;
    double herglotz_min_eigenvalue = 0.0;  ///< smallest eigenvalue of Im(+-M)
};

struct WeylOptions {
    double tol = 1e-10;  ///< Cauchy stopping tolerance, relative to max(1, ||M||)
    IntegratorOptions integrator{};
    int max_radii = 80;  ///< number of radii tried before giving up
};

/// Smallest eigenvalue of the Hermitian part Im M = (M - M^*) / (2i).
double min_imag_eigenvalue(const CMatrix& M);
/// (M - M^*) / (2i).
CMatrix imag_part(const CMatrix& M);

/// Finite-radius disk value -phi1(z, R, x0)^{-1} theta1(z, R, x0); the side is that of R
/// relative to x0. Computed by transporting the Dirichlet frame [0; I] from R back to x0.
CMatrix weyl_disk_approx(const PotentialSpec& Q, cplx z, double x0, double R, const IntegratorOptions& options = {});

/// Limit of weyl_disk_approx over the radii x0 +- (5 + 5j) / max(1, Im sqrt(z)).
WeylMatrix weyl_m(const PotentialSpec& Q, cplx z, double x0, Side side, const WeylOptions& options = {});

/// ||M_+' + M_+^2 - Q(x) + z I|| with M_+' from a centered difference of step h
/// (h <= 0 selects 1e-3 * max(1, |x|)).
double riccati_defect(const PotentialSpec& Q, cplx z, double x, double h = 0.0, const WeylOptions& options = {});

/// Noncommutative polynomial in the generators Q, Q', Q'', ...; a word lists derivative orders
/// of its factors from left to right.
class WordPolynomial {
public:
    using Word = std::vector<int>;

    static WordPolynomial generator(int order, cplx coefficient = 1.0);

    WordPolynomial derivative() const;
    WordPolynomial operator*(const WordPolynomial& other) const;
    WordPolynomial& operator+=(const WordPolynomial& other);
    WordPolynomial operator*(cplx c) const;

    /// Highest derivative order appearing in any word (-1 for the zero polynomial).
    int max_order() const;
    const std::map<Word, cplx>& terms() const noexcept { return terms_; }

    /// Substitutes derivs[k] for Q^{(k)}.
    CMatrix evaluate(std::span<const CMatrix> derivs) const;

private:
    std::map<Word, cplx> terms_;
};

/// Symbolic coefficients m_{+-,1..N} of the large-z expansion
/// M_+-(z) ~ +-i z^{1/2} I + sum_k m_{+-,k} z^{-k/2}.
std::vector<WordPolynomial> asymptotic_polynomials(int N, Side side);

struct AsymptoticSeries {
    Side side = Side::plus;
    double x = 0.0;
    int m = 1;
    std::vector<CMatrix> coefficients;  ///< m_{+-,1}, ..., m_{+-,N}
    int order() const { return static_cast<int>(coefficients.size()); }
};

/// Evaluates the coefficients at x using analytic derivatives of Q.
AsymptoticSeries asymptotic_coefficients(const PotentialSpec& Q, double x, int N, Side side);
/// Same, with derivs[k] = Q^{(k)}(x) supplied directly (needs at least N entries when N >= 1).
AsymptoticSeries asymptotic_coefficients(std::span<const CMatrix> derivs, int N, Side side, double x = 0.0);

/// +-i sqrt(z) I + sum_k m_k z^{-k/2} with Im sqrt(z) >= 0.
CMatrix asymptotic_eval(const AsymptoticSeries& series, cplx z);

}  // namespace weylspec
