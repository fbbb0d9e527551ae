#pragma once

#include <functional>
#include <vector>

#include "weylspec/types.hpp"

namespace weylspec {

/// Matrix-valued function on the upper half-plane. Must be safe to call concurrently.
using HerglotzFn = std::function<CMatrix(cplx)>;

/// Principal logarithm via Schur form, inverse scaling and squaring, and a Gauss-Legendre
/// partial-fraction Pade approximant. Eigenvalues within 1e-12 of (-inf, 0] are rejected.
CMatrix principal_matrix_log(const CMatrix& M);

/// 0.1 * 2^-k for k = 0 .. count-1.
std::vector<double> default_eps_schedule(double eps0 = 0.1, int count = 11);

struct XiMatrix {
    CMatrix value;  ///< Hermitian
    double lambda = 0.0;
    std::vector<double> eps_schedule;
    double residual = 0.0;  ///< extrapolation correction at the accepted tableau entry
};

/// (1/pi) Im log H(lambda + i eps) extrapolated to eps -> 0 over the (decreasing) schedule.
/// A one-entry schedule returns the raw value at that eps.
XiMatrix xi_matrix(const HerglotzFn& H, double lambda, const std::vector<double>& eps_schedule);

struct SpectralMeasureIncrement {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    CMatrix value;
    int n_grid = 0;
    std::vector<double> eps_schedule;
    double residual = 0.0;
};

/// Trapezoid quadrature of (1/pi) Im H(nu + i eps) over (lambda1, lambda2] on a grid clustered
/// at both endpoints, extrapolated to eps -> 0 in the variable sqrt(eps).
SpectralMeasureIncrement stieltjes_measure(const HerglotzFn& H, double lambda1, double lambda2, int n_grid,
                                           const std::vector<double>& eps_schedule);

struct HerglotzReport {
    double min_imag_eigenvalue = 0.0;
    double max_symmetry_defect = 0.0;  ///< max ||H(conj z) - H(z)^*||
    bool positive = false;             ///< min_imag_eigenvalue > -1e-10
    std::size_t points = 0;
};

HerglotzReport herglotz_verify(const HerglotzFn& H, const std::vector<cplx>& grid);

}  // namespace weylspec
