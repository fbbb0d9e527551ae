#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "weylspec/floquet.hpp"

using namespace weylspec;

namespace {

PotentialSpec mathieu() { return PotentialSpec::diagonal({ScalarExpr::parse("2cos(2x)")}, pi); }

PotentialSpec mathieu_pair() {
    return PotentialSpec::diagonal({ScalarExpr::parse("2cos(2x)"), ScalarExpr::parse("2cos(2x)")}, pi);
}

// Eigenvalues of -y'' + 2cos(2x) y with Floquet multiplier +1 (odd = false) or -1 (odd = true),
// from the truncated Fourier (Hill) matrix.
std::vector<double> hill_eigenvalues(bool odd, int N = 40) {
    const int n = 2 * N + 1;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double k = 2.0 * (i - N) + (odd ? 1.0 : 0.0);
        H(i, i) = k * k;
        if (i + 1 < n) H(i, i + 1) = H(i + 1, i) = 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + n);
    return v;
}

// Dirichlet eigenvalues on [0, pi] in the sine basis sin(n x).
std::vector<double> sine_dirichlet(int N = 60) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        const double n = i + 1;
        H(i, i) = n * n;
        if (i + 2 < N) H(i, i + 2) = H(i + 2, i) = 1.0;
    }
    H(0, 0) -= 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    return {es.eigenvalues().data(), es.eigenvalues().data() + N};
}

}  // namespace

TEST_CASE("free monodromy") {
    const auto Q = PotentialSpec::constant(1, 0.0, 2 * pi);
    for (double lambda : {1.0, 4.0}) {
        const auto M = monodromy(Q, lambda, 0.0);
        const double k = std::sqrt(lambda), w = 2 * pi;
        CHECK(std::abs(M.Phi(0, 0) - std::cos(k * w)) < 1e-8);
        CHECK(std::abs(M.Phi(0, 1) - std::sin(k * w) / k) < 1e-8);
        CHECK(std::abs(M.Phi(1, 0) + k * std::sin(k * w)) < 1e-8);
        CHECK(unit_modulus_count(M.multipliers) == 2);
    }
}

TEST_CASE("free monodromy over a period pi") {
    const auto Q = PotentialSpec::constant(1, 0.0, pi);
    const auto a = monodromy(Q, 1.0, 0.0);
    CHECK((a.Phi + CMatrix::Identity(2, 2)).norm() < 1e-8);
    CHECK(std::abs(a.multipliers(0) + 1.0) < 1e-7);
    CHECK(std::abs(a.multipliers(1) + 1.0) < 1e-7);
    const auto b = monodromy(Q, 4.0, 0.0);
    CHECK((b.Phi - CMatrix::Identity(2, 2)).norm() < 1e-8);
    CHECK(unit_modulus_count(b.multipliers) == 2);
}

TEST_CASE("monodromy determinant and multiplier symmetry") {
    CHECK(std::abs(monodromy(mathieu(), cplx(0.3, 0.1), 0.0).Phi.determinant() - 1.0) < 1e-8);
    const auto Q = mathieu_pair();
    const auto M = monodromy(Q, cplx(2.3, 0.4), 0.1);
    CHECK(std::abs(M.Phi.determinant() - 1.0) < 1e-8);
    // Multipliers come in pairs rho, 1 / conj(rho) for real lambda.
    const auto R = monodromy(mathieu(), 0.5, 0.0);
    CHECK(std::abs(R.multipliers(0) * R.multipliers(1) - 1.0) < 1e-8);
    const auto G = monodromy(mathieu(), 3.0, 0.0);
    for (double lambda : {0.5, 3.0, 4.2}) {
        const CVector rho = monodromy(mathieu_pair(), lambda, 0.0).multipliers;
        for (Eigen::Index i = 0; i < rho.size(); ++i)
            CHECK((rho.array() - 1.0 / std::conj(rho(i))).abs().minCoeff() < 1e-7);
    }
}

TEST_CASE("multipliers do not depend on the base point") {
    const auto Q = mathieu();
    auto sorted = [](CVector v) {
        std::vector<cplx> s(v.data(), v.data() + v.size());
        std::sort(s.begin(), s.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
        return s;
    };
    const auto a = sorted(monodromy(Q, cplx(1.2, 0.3), 0.0).multipliers);
    const auto b = sorted(monodromy(Q, cplx(1.2, 0.3), 0.77).multipliers);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-8);
}

TEST_CASE("free band spectrum") {
    const auto Q = PotentialSpec::constant(1, 0.0, 2 * pi);
    const auto bs = band_spectrum(Q, -1.0, 10.0, 221);
    REQUIRE(bs.E0.has_value());
    CHECK(std::abs(*bs.E0) < 1e-6);
    REQUIRE(!bs.bands.empty());
    CHECK(bs.bands.back().upper_truncated);
    CHECK(bs.gaps.empty());
}

TEST_CASE("Mathieu band edges match the Hill matrix") {
    const auto Q = mathieu();
    const auto bs = band_spectrum(Q, -1.0, 15.0, 641);
    auto per = hill_eigenvalues(false), anti = hill_eigenvalues(true);
    std::vector<double> edges;
    for (double e : per)
        if (e < 15.0) edges.push_back(e);
    for (double e : anti)
        if (e < 15.0) edges.push_back(e);
    std::sort(edges.begin(), edges.end());
    REQUIRE(bs.E0.has_value());
    CHECK(std::abs(*bs.E0 - (-0.4551386)) < 1e-4);
    REQUIRE(bs.bands.size() == 4);
    std::vector<double> found;
    for (const auto& b : bs.bands) {
        found.push_back(b.lower);
        if (!b.upper_truncated) found.push_back(b.upper);
    }
    REQUIRE(found.size() == edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) CHECK(std::abs(found[i] - edges[i]) < 1e-4);
    CHECK(bs.uniform_multiplicity);
    CHECK(bs.in_band(1.0) == false);
    CHECK(bs.in_band(3.0));
    CHECK(bs.bands.back().upper_truncated);
}

TEST_CASE("doubled Mathieu has mu = 4 in every band") {
    const auto bs = band_spectrum(mathieu_pair(), -1.0, 5.0, 241);
    CHECK(bs.uniform_multiplicity);
    for (const auto& b : bs.bands) CHECK(b.max_multiplicity == 4);
    CHECK(std::abs(*bs.E0 + 0.4551386) < 1e-4);
}

TEST_CASE("Dirichlet spectrum") {
    const auto free = PotentialSpec::constant(1, 0.0, pi);
    const auto d = dirichlet_spectrum(free, 0.0, 0.5, 9.5, 200);
    REQUIRE(d.size() == 3);
    CHECK(std::abs(d[0].lambda - 1.0) < 1e-8);
    CHECK(std::abs(d[1].lambda - 4.0) < 1e-8);
    CHECK(std::abs(d[2].lambda - 9.0) < 1e-8);
    CHECK(dirichlet_spectrum(free, 0.0, 1.5, 3.5, 50).empty());
    CHECK(dirichlet_spectrum(free, 0.0, 0.5, 0.9, 50).empty());

    const auto oracle = sine_dirichlet();
    const auto m = dirichlet_spectrum(mathieu(), 0.0, -1.0, 17.0, 400);
    REQUIRE(m.size() == 4);
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(std::abs(m[i].lambda - oracle[i]) < 1e-6);
        CHECK(m[i].multiplicity == 1);
    }
    CHECK(std::abs(m[0].lambda - (-0.1102488)) < 1e-6);

    const auto dbl = dirichlet_spectrum(mathieu_pair(), 0.0, -1.0, 5.0, 200);
    REQUIRE(dbl.size() == 2);
    CHECK(dbl[0].multiplicity == 2);
    CHECK(std::abs(dbl[1].lambda - 3.9170248) < 1e-6);
}

TEST_CASE("Floquet split Weyl matrices") {
    const auto free = PotentialSpec::constant(1, 0.0, 2 * pi);
    const cplx z(0, 1);
    const auto s = floquet_weyl(free, z, 0.0);
    CHECK(std::abs(s.M_plus(0, 0) - cplx(0, 1) * sqrt_upper(z)) < 1e-8);
    CHECK(std::abs(s.M_minus(0, 0) + cplx(0, 1) * sqrt_upper(z)) < 1e-8);

    const auto Q = mathieu_pair();
    const cplx w(2, 0.5);
    const auto split = floquet_weyl(Q, w, 0.3);
    CHECK((split.M_plus - weyl_m(Q, w, 0.3, Side::plus).value).norm() < 1e-7);
    CHECK((split.M_minus - weyl_m(Q, w, 0.3, Side::minus).value).norm() < 1e-7);
    CHECK(floquet_quadratic_residual(split) <= 1e-6);
    CHECK_THROWS_AS(floquet_weyl(mathieu(), 3.0, 0.0), PreconditionError);
}

TEST_CASE("boundary Weyl values") {
    const auto free = PotentialSpec::constant(1, 0.0, 2 * pi);
    const auto p = boundary_weyl(free, 1.0 + 0.25, 0.0, Side::plus);
    CHECK(std::abs(p.value(0, 0) - cplx(0, std::sqrt(1.25))) < 1e-6);
    const auto m = boundary_weyl(free, 1.25, 0.0, Side::minus);
    CHECK(std::abs(m.value(0, 0) + cplx(0, std::sqrt(1.25))) < 1e-6);

    const auto Q = mathieu_pair();
    const auto bp = boundary_weyl(Q, 3.0, 0.0, Side::plus);
    const auto bm = boundary_weyl(Q, 3.0, 0.0, Side::minus);
    CHECK((bp.value - bm.value.adjoint()).norm() <= 1e-3);
    CHECK(min_imag_eigenvalue(bp.value) > 0);
    CHECK_THROWS_AS(boundary_weyl(Q, 1.0, 0.0, Side::plus), PreconditionError);
    // 1e-3 below a gap of width 0.03 that probes at lambda +- {0.1, 0.2, 0.4} would miss.
    const auto np = boundary_weyl(Q, 9.046739, 0.3, Side::plus);
    const auto nm = boundary_weyl(Q, 9.046739, 0.3, Side::minus);
    CHECK((np.value - nm.value.adjoint()).norm() <= 1e-6);
    CHECK(np.eps_schedule.front() < 1e-3);
    CHECK(adaptive_eps_schedule(0.2).front() == doctest::Approx(0.05));
    CHECK(adaptive_eps_schedule(10.0).size() == 8);
}
