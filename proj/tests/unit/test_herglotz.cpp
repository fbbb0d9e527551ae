#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "weylspec/herglotz.hpp"

using namespace weylspec;

namespace {
CMatrix free_green(cplx z) { return CMatrix::Constant(1, 1, cplx(0, 1) / (2.0 * sqrt_upper(z))); }
}  // namespace

TEST_CASE("principal log of simple matrices") {
    const CMatrix L = principal_matrix_log(cplx(0, 1) * CMatrix::Identity(2, 2));
    CHECK((L - cplx(0, pi / 2) * CMatrix::Identity(2, 2)).norm() < 1e-14);
    CMatrix D = CMatrix::Zero(2, 2);
    D.diagonal() << 2.0, std::exp(1.0);
    const CMatrix LD = principal_matrix_log(D);
    CHECK(std::abs(LD(0, 0) - std::log(2.0)) < 1e-14);
    CHECK(std::abs(LD(1, 1) - 1.0) < 1e-14);
    CHECK(std::abs(LD(0, 1)) < 1e-15);
}

TEST_CASE("principal log round trip through the matrix exponential") {
    std::mt19937 gen(42);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 5; ++trial) {
        CMatrix A(3, 3), B(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                A(i, j) = cplx(d(gen), d(gen));
                B(i, j) = cplx(d(gen), d(gen));
            }
        // Re part Hermitian, Im part positive definite: numerical range in C_+.
        const CMatrix M = (A + A.adjoint()) * 2.0 + cplx(0, 1) * (B * B.adjoint() + 0.1 * CMatrix::Identity(3, 3));
        const CMatrix L = principal_matrix_log(M);
        const CMatrix E = L.exp();
        CHECK((E - M).norm() <= 1e-9 * std::max(1.0, M.norm()));
        Eigen::ComplexEigenSolver<CMatrix> es(L);
        for (int i = 0; i < 3; ++i) {
            CHECK(es.eigenvalues()(i).imag() > -pi);
            CHECK(es.eigenvalues()(i).imag() < pi);
        }
    }
}

TEST_CASE("principal log rejects the branch cut") {
    CMatrix M = CMatrix::Identity(2, 2);
    M(1, 1) = -1.0;
    CHECK_THROWS_AS(principal_matrix_log(M), PreconditionError);
}

TEST_CASE("xi of the free Green function") {
    const auto sched = default_eps_schedule();
    CHECK(std::abs(xi_matrix(free_green, 4.0, sched).value(0, 0) - 0.5) < 1e-8);
    CHECK(std::abs(xi_matrix(free_green, -1.0, sched).value(0, 0)) < 1e-8);
}

TEST_CASE("xi of the free block Weyl matrix") {
    auto block = [](cplx z) {
        CMatrix M = CMatrix::Zero(2, 2);
        const cplx k = sqrt_upper(z);
        M(0, 0) = cplx(0, 1) / (2.0 * k);
        M(1, 1) = cplx(0, 1) * k / 2.0;
        return M;
    };
    const auto xi = xi_matrix(block, 1.0, default_eps_schedule());
    CHECK((xi.value - 0.5 * CMatrix::Identity(2, 2)).norm() < 1e-8);
}

TEST_CASE("raw xi at fixed eps lies in [0, 1]") {
    for (double l : {-3.0, -0.001, 0.0, 0.01, 2.0, 50.0}) {
        const auto xi = xi_matrix(free_green, l, {1e-3});
        CHECK(xi.value(0, 0).real() >= -1e-12);
        CHECK(xi.value(0, 0).real() <= 1 + 1e-12);
        CHECK(xi.residual == 0.0);
    }
}

TEST_CASE("Stieltjes measure of the free Green function") {
    const auto sched = default_eps_schedule();
    const auto a = stieltjes_measure(free_green, 0.0, 1.0, 4001, sched);
    CHECK(std::abs(a.value(0, 0).real() - 1.0 / pi) < 1e-4);
    const auto b = stieltjes_measure(free_green, -2.0, -1.0, 401, sched);
    CHECK(std::abs(b.value(0, 0)) <= 1e-6);
    const double density = (free_green(cplx(1.0, 1e-12))(0, 0)).imag() / pi;
    CHECK(std::abs(density - 1.0 / (2 * pi)) < 1e-10);
}

TEST_CASE("Herglotz verification with positive and negative controls") {
    std::vector<cplx> grid;
    for (int i = 0; i < 20; ++i) grid.emplace_back(-5.0 + i, 0.05 + 0.3 * (i % 5));
    auto Mp = [](cplx z) { return CMatrix::Constant(1, 1, cplx(0, 1) * sqrt_upper(z)); };
    auto negMm = [](cplx z) { return CMatrix(-CMatrix::Constant(1, 1, cplx(0, -1) * sqrt_upper(z))); };
    const auto r = herglotz_verify(Mp, grid);
    CHECK(r.positive);
    CHECK(r.min_imag_eigenvalue > 0);
    CHECK(r.max_symmetry_defect < 1e-9);
    CHECK(herglotz_verify(negMm, grid).positive);
    auto corrupted = [](cplx z) { return CMatrix(free_green(z) - CMatrix::Constant(1, 1, cplx(0, 0.1))); };
    CHECK_FALSE(herglotz_verify(corrupted, {cplx(100, 1)}).positive);
}
