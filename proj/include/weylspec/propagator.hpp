#pragma once

#include <functional>
#include <vector>

#include "weylspec/potential.hpp"

namespace weylspec {

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    long max_steps = 1'000'000;

    /// Options with rtol = tol and atol = tol / 100.
    static IntegratorOptions from_tol(double tol);
};

struct IntegrationStats {
    long accepted = 0;
    long rejected = 0;
    long evaluations = 0;
    double error_estimate = 0.0;  ///< sum of accepted local error estimates, in absolute units
};

/// Embedded 8(5,3) Runge-Kutta integrator (Dormand-Prince DOP853) for matrix-valued linear
/// systems Y' = F(x) Y with PI step-size control.
class Dop853 {
public:
    /// f(x, Y, out) must write F(x) Y into `out` (already sized like Y).
    using Rhs = std::function<void(double, const CMatrix&, CMatrix&)>;
    /// Called after every accepted step; may rescale Y in place (returning true) as long as Y
    /// remains a solution of the same linear system.
    using StepHook = std::function<bool(double, CMatrix&)>;

    explicit Dop853(IntegratorOptions options = {}) : opt_(options) {}

    /// Advances Y from x0 to x1 (either direction).
    IntegrationStats integrate(const Rhs& f, double x0, double x1, CMatrix& Y, const StepHook& hook = {}) const;

private:
    IntegratorOptions opt_;
};

/// Normalized fundamental system Psi(z, x, x0) = [[theta1, phi1], [theta2, phi2]].
struct FundamentalSystem {
    cplx z;
    double x0 = 0.0;
    double x = 0.0;
    CMatrix Psi;
    double error_estimate = 0.0;

    int m() const { return static_cast<int>(Psi.rows() / 2); }
    CMatrix theta1() const { return Psi.topLeftCorner(m(), m()); }
    CMatrix phi1() const { return Psi.topRightCorner(m(), m()); }
    CMatrix theta2() const { return Psi.bottomLeftCorner(m(), m()); }
    CMatrix phi2() const { return Psi.bottomRightCorner(m(), m()); }
};

/// Right-hand side of psi1' = psi2, psi2' = (Q - z) psi1 acting on 2m x k blocks.
Dop853::Rhs schrodinger_rhs(const PotentialSpec& Q, cplx z);

FundamentalSystem integrate_fundamental(const PotentialSpec& Q, cplx z, double x0, double x,
                                        const IntegratorOptions& options = {});

struct Renormalization {
    double x;   ///< position at which the frame was re-orthonormalized
    CMatrix R;  ///< upper-triangular factor removed at that point
};

/// Frame transported with QR renormalization. The unnormalized solution at x1 equals
/// frame * R_n * ... * R_1, where R_1 is the first logged factor.
struct FrameTransport {
    CMatrix frame;
    std::vector<Renormalization> log;

    /// Sum over the log of ln|R_jj| for each column j (logarithmic growth of the Gram-Schmidt
    /// columns).
    Eigen::VectorXd log_growth() const;
};

/// Transports the columns of `frame` (2m x k, full column rank) from x0 to x1. Columns are
/// re-orthonormalized whenever a column norm leaves [1/8, 8], and once more at x1.
FrameTransport propagate_frame(const PotentialSpec& Q, cplx z, double x0, double x1, const CMatrix& frame,
                               const IntegratorOptions& options = {});

}  // namespace weylspec
