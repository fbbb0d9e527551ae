#include "weylspec/herglotz.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "weylspec/linalg.hpp"
#include "weylspec/weyl.hpp"

namespace weylspec {

CMatrix principal_matrix_log(const CMatrix& M) {
    const Eigen::Index n = M.rows();
    if (n == 0 || M.cols() != n) throw PreconditionError("principal_matrix_log needs a square matrix");
    Eigen::ComplexSchur<CMatrix> schur(M);
    if (schur.info() != Eigen::Success) throw ComputationError("Schur decomposition failed");
    CMatrix T = schur.matrixT();
    T.triangularView<Eigen::StrictlyLower>().setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx l = T(i, i);
        if (l.real() <= 1e-12 && std::abs(l.imag()) <= 1e-12)
            throw PreconditionError("eigenvalue on the branch cut of the principal logarithm");
    }
    const CMatrix Id = CMatrix::Identity(n, n);
    int k = 0;
    while (norm1(T - Id) > 0.25) {
        if (++k > 64) throw ComputationError("matrix logarithm: square roots failed to approach identity");
        T = triangular_sqrt(T);
    }
    static const auto rule = [] {
        std::pair<std::vector<double>, std::vector<double>> r;
        gauss_legendre_unit(8, r.first, r.second);
        return r;
    }();
    const CMatrix X = T - Id;
    CMatrix L = CMatrix::Zero(n, n);
    for (std::size_t j = 0; j < rule.first.size(); ++j) {
        const CMatrix D = Id + rule.first[j] * X;
        L += rule.second[j] * D.triangularView<Eigen::Upper>().solve(X);
    }
    L *= std::ldexp(1.0, k);
    return schur.matrixU() * L * schur.matrixU().adjoint();
}

std::vector<double> default_eps_schedule(double eps0, int count) {
    std::vector<double> s;
    for (int k = 0; k < count; ++k) s.push_back(eps0 * std::ldexp(1.0, -k));
    return s;
}

XiMatrix xi_matrix(const HerglotzFn& H, double lambda, const std::vector<double>& eps_schedule) {
    if (eps_schedule.empty()) throw PreconditionError("empty eps schedule");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        if (!(eps_schedule[i] > 0)) throw PreconditionError("eps schedule must be positive");
        if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1])) throw PreconditionError("eps schedule must decrease");
    }
    std::vector<CMatrix> values;
    for (double eps : eps_schedule) {
        const CMatrix h = H(cplx(lambda, eps));
        if (min_imag_eigenvalue(h) < -1e-8 * std::max(1.0, h.norm()))
            throw PreconditionError("evaluator is not Herglotz at lambda + i eps");
        values.push_back(imag_part(principal_matrix_log(h)) / pi);
    }
    auto ex = richardson(eps_schedule, values);
    XiMatrix xi;
    xi.value = 0.5 * (ex.value + ex.value.adjoint());
    xi.lambda = lambda;
    xi.eps_schedule = eps_schedule;
    xi.residual = ex.residual;
    if (ex.residual > 0.5)
        throw ConvergenceError("xi extrapolation diverged (spectral singularity near lambda)", ex.residual);
    return xi;
}

SpectralMeasureIncrement stieltjes_measure(const HerglotzFn& H, double lambda1, double lambda2, int n_grid,
                                           const std::vector<double>& eps_schedule) {
    if (!(lambda1 < lambda2)) throw PreconditionError("stieltjes_measure requires lambda1 < lambda2");
    if (n_grid < 3) throw PreconditionError("stieltjes_measure needs at least 3 grid points");
    if (eps_schedule.empty()) throw PreconditionError("empty eps schedule");
    const double width = lambda2 - lambda1;
    std::vector<double> nodes(static_cast<std::size_t>(n_grid)), weights(static_cast<std::size_t>(n_grid));
    const double du = 1.0 / (n_grid - 1);
    for (int i = 0; i < n_grid; ++i) {
        const double u = i * du;
        nodes[static_cast<std::size_t>(i)] = lambda1 + width * (3 * u * u - 2 * u * u * u);
        const double jac = width * 6 * u * (1 - u);
        weights[static_cast<std::size_t>(i)] = jac * du * ((i == 0 || i == n_grid - 1) ? 0.5 : 1.0);
    }
    const std::size_t ne = eps_schedule.size();
    const std::size_t total = ne * static_cast<std::size_t>(n_grid);
    const auto samples = parallel_map(total, [&](std::size_t idx) -> CMatrix {
        const std::size_t e = idx / static_cast<std::size_t>(n_grid);
        const std::size_t i = idx % static_cast<std::size_t>(n_grid);
        if (weights[i] == 0.0) return CMatrix();
        return imag_part(H(cplx(nodes[i], eps_schedule[e])));
    });
    std::vector<CMatrix> integrals;
    std::vector<double> t;
    for (std::size_t e = 0; e < ne; ++e) {
        CMatrix sum;
        for (std::size_t i = 0; i < static_cast<std::size_t>(n_grid); ++i) {
            const CMatrix& s = samples[e * static_cast<std::size_t>(n_grid) + i];
            if (s.size() == 0) continue;
            if (sum.size() == 0) sum = CMatrix::Zero(s.rows(), s.cols());
            sum += weights[i] * s;
        }
        integrals.push_back(sum / pi);
        t.push_back(std::sqrt(eps_schedule[e]));
    }
    const auto ex = richardson(t, integrals);
    SpectralMeasureIncrement out;
    out.lambda1 = lambda1;
    out.lambda2 = lambda2;
    out.value = 0.5 * (ex.value + ex.value.adjoint());
    out.n_grid = n_grid;
    out.eps_schedule = eps_schedule;
    out.residual = ex.residual;
    return out;
}

HerglotzReport herglotz_verify(const HerglotzFn& H, const std::vector<cplx>& grid) {
    if (grid.empty()) throw PreconditionError("herglotz_verify needs a nonempty grid");
    HerglotzReport r;
    r.min_imag_eigenvalue = std::numeric_limits<double>::infinity();
    for (cplx z : grid) {
        const CMatrix a = H(z);
        const CMatrix b = H(std::conj(z));
        r.min_imag_eigenvalue = std::min(r.min_imag_eigenvalue, min_imag_eigenvalue(a));
        r.max_symmetry_defect = std::max(r.max_symmetry_defect, (b - a.adjoint()).norm());
    }
    r.points = grid.size();
    r.positive = r.min_imag_eigenvalue > -1e-10;
    return r;
}

}  // namespace weylspec
