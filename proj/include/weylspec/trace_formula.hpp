#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "weylspec/floquet.hpp"

namespace weylspec {

/// Xi(., x) at a fixed x together with the energies where it may jump.
struct XiSlice {
    double x = 0.0;
    int m = 1;
    std::vector<double> breakpoints;          ///< sorted
    std::function<CMatrix(double)> xi;        ///< lambda -> Xi(lambda, x), safe to call concurrently
};

using XiField = std::function<XiSlice(double x)>;

/// Xi(lambda, x) = (1/pi) Im log G(lambda + i0, x, x) with G built from the Floquet Weyl matrices.
/// Breakpoints are the refined breakpoints of `spectrum` plus the Dirichlet eigenvalues at x that lie
/// where mu < 2m; the eps schedule at each lambda adapts to the nearest breakpoint.
XiField periodic_xi_field(const PotentialSpec& Q, const BandSpectrum& spectrum, const FloquetOptions& options = {});

/// Xi identically equal to value (independent of x), without breakpoints.
XiField constant_xi_field(const CMatrix& value);

struct TraceOptions {
    std::vector<double> y_schedule{50.0, 100.0, 200.0, 400.0};  ///< increasing
    double quad_tol = 1e-7;         ///< absolute tolerance of the lambda quadrature
    double edge_clip = 1e-6;        ///< relative sliver excluded at each breakpoint
    double tail_threshold = 1e-3;   ///< ||I - 2 Xi|| allowed near the cutoff
    int max_depth = 40;
};

struct TraceReconstruction {
    double x = 0.0;
    CMatrix value;                 ///< Hermitian
    double E0 = 0.0;
    std::vector<double> y_schedule;
    std::vector<CMatrix> per_y;    ///< value before extrapolation, one per y
    double cutoff = 0.0;
    double residual = 0.0;         ///< extrapolation correction in 1 / y^2
    bool tail_violation = false;
    double tail_defect = 0.0;      ///< max ||I - 2 Xi|| sampled near the cutoff
    long evaluations = 0;          ///< Xi evaluations
};

/// E0 I + lim_{y -> inf} Re int_{E0}^{cutoff} (iy)^2 (lambda - iy)^{-2} (I - 2 Xi) d lambda, with the
/// integrand taken as zero beyond the cutoff (Xi = I/2 there) and Richardson extrapolation in 1/y^2.
TraceReconstruction reconstruct_potential(const XiField& field, double E0, double x, double cutoff,
                                          const TraceOptions& options = {});

/// R_k(x) = E0^k / 2 I + k lim Re int (iy)^{k+1} (lambda - iy)^{-k-1} (-lambda)^{k-1} (I/2 - Xi) d lambda.
TraceReconstruction higher_trace_invariant(const XiField& field, double E0, double x, int k, double cutoff,
                                           const TraceOptions& options = {});

/// G_0, ..., G_N of G(z, x, x) ~ (i/2) sum_k G_k z^{-k-1/2}, obtained by inverting
/// M_- - M_+ built from the asymptotic coefficients of both half-line Weyl matrices.
std::vector<CMatrix> expansion_coefficients_G(const PotentialSpec& Q, double x, int N);
/// Same from derivs[k] = Q^{(k)}(x).
std::vector<CMatrix> expansion_coefficients_G(std::span<const CMatrix> derivs, int N);

/// R_0, ..., R_N of -d/dz log G(z, x, x) ~ sum_k R_k z^{-k-1} from the log series of the G_k.
std::vector<CMatrix> trace_invariants_from_expansion(const std::vector<CMatrix>& G);

}  // namespace weylspec
