#pragma once

#include <optional>
#include <string>
#include <vector>

#include "weylspec/herglotz.hpp"
#include "weylspec/weyl.hpp"

namespace weylspec {

struct FloquetOptions {
    IntegratorOptions integrator{};
    double unit_tol = 1e-6;   ///< |ln|rho|| below this counts as unit modulus
    double edge_tol = 1e-8;   ///< band-edge bisection tolerance in lambda
    double split_tol = 1e-8;  ///< floquet_weyl rejects | |rho| - 1 | below this
};

/// Monodromy matrix Phi(z, x0) = Psi(z, x0 + omega, x0).
struct MonodromyMatrix {
    CMatrix Phi;
    cplx z;
    double x0 = 0.0;
    double omega = 0.0;
    CVector multipliers;
    bool diagonalizable = true;  ///< eigenvector matrix reasonably conditioned
};

MonodromyMatrix monodromy(const PotentialSpec& Q, cplx z, double x0, const IntegratorOptions& options = {});

/// Number of multipliers with |ln|rho|| < unit_tol.
int unit_modulus_count(const CVector& multipliers, double unit_tol = 1e-6);

struct Band {
    double lower = 0.0;
    double upper = 0.0;
    bool lower_truncated = false;  ///< band continues below the scan interval
    bool upper_truncated = false;  ///< band continues above the scan interval
    int max_multiplicity = 0;
    int min_multiplicity = 0;      ///< over interior grid points
};

struct BandSpectrum {
    double scan_min = 0.0;
    double scan_max = 0.0;
    int m = 1;
    std::vector<Band> bands;
    std::vector<std::pair<double, double>> gaps;  ///< open gaps between consecutive bands
    std::vector<double> grid;       ///< uniform scan plus points inserted inside narrow gaps
    std::vector<int> multiplicity;  ///< mu at each grid point
    std::vector<int> band_id;       ///< band index at each grid point, -1 in gaps
    std::vector<CVector> multipliers;  ///< tracked multipliers at each grid point
    std::vector<double> breakpoints;   ///< refined points where mu changes (band edges included)
    std::optional<double> E0;          ///< lower edge of the first band, if resolved
    bool uniform_multiplicity = false; ///< mu == 2m at every interior grid point of every band
    std::vector<std::string> warnings;

    /// True when lambda lies strictly inside a band.
    bool in_band(double lambda) const;
    /// Distance from lambda to the nearest breakpoint (infinity if none).
    double distance_to_breakpoint(double lambda) const;
};

/// Coarse scan of mu on a uniform grid, multiplier tracking by eigenvector overlap, and
/// bisection of every change of mu to edge_tol.
BandSpectrum band_spectrum(const PotentialSpec& Q, double lambda_min, double lambda_max, int n_grid, double x0 = 0.0,
                           const FloquetOptions& options = {});

struct DirichletEigenvalue {
    double lambda = 0.0;
    int multiplicity = 1;  ///< dimension of ker phi1 (>= 2 flags a multiple root)
};

/// Zeros of det phi1(lambda, x0 + omega, x0) in [lambda_min, lambda_max]: sign changes are
/// bisected; roots without a sign change are found as near-zero minima of the smallest
/// singular value of phi1.
std::vector<DirichletEigenvalue> dirichlet_spectrum(const PotentialSpec& Q, double x0, double lambda_min,
                                                    double lambda_max, int n_grid = 400,
                                                    const IntegratorOptions& options = {});

/// Floquet subspaces and the Weyl matrices they determine.
struct FloquetSplit {
    CMatrix basis_plus;   ///< 2m x m, contracting invariant subspace (|rho| < 1)
    CMatrix basis_minus;  ///< 2m x m, expanding invariant subspace (|rho| > 1)
    CVector rho_plus;
    CVector rho_minus;
    CMatrix M_plus;
    CMatrix M_minus;
    MonodromyMatrix monodromy;
};

/// Splits Phi(z, x0) into contracting and expanding invariant subspaces via a reordered Schur
/// form and sets M_+- = V2 V1^{-1} for each basis [V1; V2].
FloquetSplit floquet_weyl(const PotentialSpec& Q, cplx z, double x0, const FloquetOptions& options = {});

/// rho^2 - (theta1 + phi1 phi2 phi1^{-1}) rho + phi1 phi2 phi1^{-1} theta1 - phi1 theta2 for the
/// m x m multiplier matrices rho_+- = theta1 + phi1 M_+- (blocks of Phi). Returns the larger norm.
double floquet_quadratic_residual(const FloquetSplit& split);

struct BoundaryWeyl {
    CMatrix value;
    double residual = 0.0;
    std::vector<double> eps_schedule;
};

/// M_+-(lambda + i0, x0) by extrapolating floquet_weyl over lambda + i eps. Requires
/// mu == 2m at lambda and at lambda +- delta; the schedule starts at eps0 = min(0.1, d / 4) with
/// d the distance to the nearest breakpoint of a local band scan over lambda +- 0.4.
BoundaryWeyl boundary_weyl(const PotentialSpec& Q, double lambda, double x0, Side side,
                           const FloquetOptions& options = {});

/// Same extrapolation without the full-multiplicity precondition; eps0 = min(0.1, d / 4) with
/// d the distance to the nearest breakpoint supplied by the caller. Returns both sides.
std::pair<BoundaryWeyl, BoundaryWeyl> boundary_weyl_pair(const PotentialSpec& Q, double lambda, double x0,
                                                         double breakpoint_distance,
                                                         const FloquetOptions& options = {});

/// eps0 * 2^-k, k = 0 .. count-1 with eps0 = min(0.1, d / 4).
std::vector<double> adaptive_eps_schedule(double breakpoint_distance, int count = 8);

}  // namespace weylspec
