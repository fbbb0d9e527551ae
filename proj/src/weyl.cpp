#include "weylspec/weyl.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "weylspec/linalg.hpp"

namespace weylspec {

const char* to_string(Side s) { return s == Side::plus ? "+" : "-"; }

CMatrix imag_part(const CMatrix& M) { return (M - M.adjoint()) / cplx(0.0, 2.0); }

double min_imag_eigenvalue(const CMatrix& M) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(imag_part(M), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

CMatrix weyl_disk_approx(const PotentialSpec& Q, cplx z, double x0, double R, const IntegratorOptions& options) {
    if (z.imag() == 0.0) throw PreconditionError("weyl_disk_approx requires nonreal z");
    if (R == x0) throw PreconditionError("weyl_disk_approx requires R != x0");
    const int m = Q.dimension();
    CMatrix frame = CMatrix::Zero(2 * m, m);
    frame.bottomRows(m).setIdentity();
    const auto t = propagate_frame(Q, z, R, x0, frame, options);
    const CMatrix U = t.frame.topRows(m);
    const CMatrix V = t.frame.bottomRows(m);
    // M = V U^{-1}, solved as U^T M^T = V^T.
    return solve_checked(U.transpose(), V.transpose(), "phi1(z, R, x0)", 1e-13).transpose();
}

WeylMatrix weyl_m(const PotentialSpec& Q, cplx z, double x0, Side side, const WeylOptions& options) {
    if (z.imag() == 0.0) throw PreconditionError("weyl_m requires nonreal z");
    const double s = side_sign(side);
    const double scale = std::max(1.0, sqrt_upper(z).imag());
    WeylMatrix out;
    out.side = side;
    out.z = z;
    out.x0 = x0;
    CMatrix prev;
    double increment = std::numeric_limits<double>::infinity();
    for (int j = 0; j < options.max_radii; ++j) {
        const double R = x0 + s * (5.0 + 5.0 * j) / scale;
        CMatrix M = weyl_disk_approx(Q, z, x0, R, options.integrator);
        if (j > 0) {
            increment = (M - prev).norm();
            if (increment < options.tol * std::max(1.0, M.norm())) {
                out.value = std::move(M);
                out.convergence = increment;
                out.herglotz_min_eigenvalue = min_imag_eigenvalue(s * out.value);
                return out;
            }
        }
        prev = std::move(M);
    }
    throw ConvergenceError("Weyl disk limit did not converge within the radius budget", increment);
}

double riccati_defect(const PotentialSpec& Q, cplx z, double x, double h, const WeylOptions& options) {
    if (h <= 0.0) h = 1e-3 * std::max(1.0, std::abs(x));
    const CMatrix Mp = weyl_m(Q, z, x + h, Side::plus, options).value;
    const CMatrix Mm = weyl_m(Q, z, x - h, Side::plus, options).value;
    const CMatrix M = weyl_m(Q, z, x, Side::plus, options).value;
    const CMatrix dM = (Mp - Mm) / (2.0 * h);
    const CMatrix defect = dM + M * M - Q.evaluate(x) + z * CMatrix::Identity(Q.dimension(), Q.dimension());
    return defect.norm();
}

}  // namespace weylspec
