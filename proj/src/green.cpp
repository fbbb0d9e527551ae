#include "weylspec/green.hpp"

#include "weylspec/linalg.hpp"

namespace weylspec {

GreenDiagonal green_from_weyl(const CMatrix& M_plus, const CMatrix& M_minus, cplx z, double x) {
    GreenDiagonal g;
    const auto m = M_plus.rows();
    g.value = solve_checked(M_minus - M_plus, CMatrix::Identity(m, m), "N_-");
    g.z = z;
    g.x = x;
    g.M_plus = M_plus;
    g.M_minus = M_minus;
    return g;
}

GreenDiagonal green_diagonal(const PotentialSpec& Q, cplx z, double x, const WeylOptions& options) {
    const auto Mp = weyl_m(Q, z, x, Side::plus, options);
    const auto Mm = weyl_m(Q, z, x, Side::minus, options);
    return green_from_weyl(Mp.value, Mm.value, z, x);
}

GreenKernel green_kernel(const PotentialSpec& Q, cplx z, double x, double xp, double x0, const WeylOptions& options) {
    const auto G = green_diagonal(Q, z, x0, options);
    const bool below = x <= xp;
    // M_+-(conj z) = M_+-(z)^*
    const CMatrix& M_left = below ? G.M_minus : G.M_plus;
    const CMatrix& M_right = below ? G.M_plus : G.M_minus;
    const auto fz = integrate_fundamental(Q, z, x0, x, options.integrator);
    const auto fzb = integrate_fundamental(Q, std::conj(z), x0, xp, options.integrator);
    const CMatrix psi_left = fz.theta1() + fz.phi1() * M_left;
    const CMatrix psi_right = fzb.theta1() + fzb.phi1() * M_right.adjoint();
    return {psi_left * G.value * psi_right.adjoint(), below};
}

BlockWeylMatrix block_weyl_from(const CMatrix& M_plus, const CMatrix& M_minus) {
    const auto m = M_plus.rows();
    BlockWeylMatrix b;
    b.N_minus = M_minus - M_plus;
    b.N_plus = M_minus + M_plus;
    const CMatrix Ninv = solve_checked(b.N_minus, CMatrix::Identity(m, m), "N_-");
    b.value.resize(2 * m, 2 * m);
    b.value.topLeftCorner(m, m) = Ninv;
    b.value.topRightCorner(m, m) = 0.5 * Ninv * b.N_plus;
    b.value.bottomLeftCorner(m, m) = 0.5 * b.N_plus * Ninv;
    b.value.bottomRightCorner(m, m) = M_plus * Ninv * M_minus;
    return b;
}

BlockWeylMatrix block_weyl(const PotentialSpec& Q, cplx z, double x0, const WeylOptions& options) {
    const auto Mp = weyl_m(Q, z, x0, Side::plus, options);
    const auto Mm = weyl_m(Q, z, x0, Side::minus, options);
    return block_weyl_from(Mp.value, Mm.value);
}

GreenDerivative green_x_derivative_from(const CMatrix& M_plus, const CMatrix& M_minus, double tolerance) {
    const CMatrix G = green_from_weyl(M_plus, M_minus).value;
    GreenDerivative d;
    d.value = M_minus * G + G * M_plus;
    const CMatrix other = M_plus * G + G * M_minus;
    d.sign_disagreement = (d.value - other).norm();
    if (d.sign_disagreement > tolerance * std::max(1.0, d.value.norm()))
        throw ComputationError("Green derivative sign choices disagree by " + std::to_string(d.sign_disagreement) +
                               " (inaccurate Weyl matrices)");
    return d;
}

CMatrix green_x_derivative(const PotentialSpec& Q, cplx z, double x0, const WeylOptions& options) {
    const auto Mp = weyl_m(Q, z, x0, Side::plus, options);
    const auto Mm = weyl_m(Q, z, x0, Side::minus, options);
    return green_x_derivative_from(Mp.value, Mm.value, 1e-7).value;
}

}  // namespace weylspec
