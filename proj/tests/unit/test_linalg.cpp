#include <doctest.h>

#include <cmath>
#include <random>

#include "weylspec/linalg.hpp"

using namespace weylspec;

namespace {
CMatrix random_matrix(int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> d;
    CMatrix A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cplx(d(gen), d(gen));
    return A;
}
}  // namespace

TEST_CASE("ordered Schur form moves selected eigenvalues first") {
    const CMatrix A = random_matrix(6, 7);
    const auto s = ordered_schur(A, [](cplx l) { return std::abs(l) < 1.5; });
    CHECK((s.U * s.T * s.U.adjoint() - A).norm() < 1e-12 * A.norm());
    CHECK((s.U.adjoint() * s.U - CMatrix::Identity(6, 6)).norm() < 1e-13);
    CHECK(s.T.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm() == 0.0);
    for (int i = 0; i < 6; ++i) CHECK((std::abs(s.T(i, i)) < 1.5) == (i < s.selected));
}

TEST_CASE("ordered Schur handles repeated eigenvalues") {
    CMatrix A = CMatrix::Zero(4, 4);
    A.diagonal() << 2.0, 0.5, 2.0, 0.5;
    const CMatrix S = random_matrix(4, 3);
    const CMatrix B = S * A * S.inverse();
    const auto s = ordered_schur(B, [](cplx l) { return std::abs(l) < 1.0; });
    CHECK(s.selected == 2);
    CHECK(std::abs(s.T(0, 0) - 0.5) < 1e-10);
    CHECK(std::abs(s.T(1, 1) - 0.5) < 1e-10);
    CHECK((s.U * s.T * s.U.adjoint() - B).norm() < 1e-11 * B.norm());
}

TEST_CASE("triangular square root squares back") {
    const CMatrix A = random_matrix(5, 11) + 6.0 * CMatrix::Identity(5, 5);
    Eigen::ComplexSchur<CMatrix> schur(A);
    const CMatrix T = schur.matrixT();
    const CMatrix R = triangular_sqrt(T);
    CHECK((R * R - T).norm() < 1e-12 * T.norm());
}

TEST_CASE("Richardson extrapolation removes polynomial error terms") {
    std::vector<double> h;
    std::vector<CMatrix> v;
    for (int k = 0; k < 6; ++k) {
        const double s = 0.1 * std::pow(0.5, k);
        h.push_back(s);
        v.push_back(CMatrix::Constant(1, 1, 3.0 + 2.0 * s - 5.0 * s * s + s * s * s));
    }
    const auto r = richardson(h, v);
    CHECK(std::abs(r.value(0, 0) - 3.0) < 1e-12);
    const auto single = richardson({0.1}, {CMatrix::Constant(1, 1, 7.0)});
    CHECK(single.value(0, 0) == cplx(7.0));
    CHECK(single.residual == 0.0);
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
    std::vector<double> x, w;
    gauss_legendre_unit(8, x, w);
    double s = 0, s15 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += w[i];
        s15 += w[i] * std::pow(x[i], 15);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s15 == doctest::Approx(1.0 / 16).epsilon(1e-13));
}

TEST_CASE("parallel_map preserves index order and propagates errors") {
    set_worker_count(3);
    const auto r = parallel_map(100, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == static_cast<int>(i * i));
    CHECK_THROWS_AS(parallel_map(10,
                                 [](std::size_t i) -> int {
                                     if (i == 5) throw ComputationError("boom");
                                     return 0;
                                 }),
                    ComputationError);
    set_worker_count(0);
}

TEST_CASE("checked solve reports singular systems") {
    CMatrix A = CMatrix::Ones(2, 2);
    CHECK_THROWS_AS(solve_checked(A, CMatrix::Identity(2, 2), "A"), SingularityError);
}
