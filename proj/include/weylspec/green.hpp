#pragma once

#include "weylspec/weyl.hpp"

namespace weylspec {

/// Diagonal Green's matrix G(z, x, x) = (M_-(z, x) - M_+(z, x))^{-1}.
struct GreenDiagonal {
    CMatrix value;
    cplx z;
    double x = 0.0;
    CMatrix M_plus;
    CMatrix M_minus;
};

/// Builds G from given half-line Weyl matrices at the same point.
GreenDiagonal green_from_weyl(const CMatrix& M_plus, const CMatrix& M_minus, cplx z = {}, double x = 0.0);

GreenDiagonal green_diagonal(const PotentialSpec& Q, cplx z, double x, const WeylOptions& options = {});

/// Off-diagonal Green's matrix G(z, x, x').
struct GreenKernel {
    CMatrix value;
    bool x_below = true;  ///< true when x <= x'
};

/// psi_{-,1}(z, x) G(z, x0, x0) psi_{+,1}(conj z, x')^* for x <= x' (sides swapped otherwise),
/// with psi_{+-,1}(z, y) = theta1(z, y, x0) + phi1(z, y, x0) M_+-(z, x0).
GreenKernel green_kernel(const PotentialSpec& Q, cplx z, double x, double xp, double x0,
                         const WeylOptions& options = {});

/// 2m x 2m Weyl matrix [[N_-^{-1}, N_-^{-1} N_+ / 2], [N_+ N_-^{-1} / 2, M_+ N_-^{-1} M_-]],
/// with N_+- = M_- +- M_+.
struct BlockWeylMatrix {
    CMatrix value;
    CMatrix N_plus;
    CMatrix N_minus;
};

BlockWeylMatrix block_weyl_from(const CMatrix& M_plus, const CMatrix& M_minus);
BlockWeylMatrix block_weyl(const PotentialSpec& Q, cplx z, double x0, const WeylOptions& options = {});

/// d/dx G(z, x, x) at x0, evaluated as M_- G + G M_+ and cross-checked against M_+ G + G M_-.
struct GreenDerivative {
    CMatrix value;
    double sign_disagreement = 0.0;  ///< ||(M_- G + G M_+) - (M_+ G + G M_-)||
};

/// Throws ComputationError if the two sign choices differ by more than
/// tolerance * max(1, ||value||).
GreenDerivative green_x_derivative_from(const CMatrix& M_plus, const CMatrix& M_minus, double tolerance);

CMatrix green_x_derivative(const PotentialSpec& Q, cplx z, double x0, const WeylOptions& options = {});

}  // namespace weylspec
