#include <doctest.h>

#include <cmath>

#include "weylspec/reflectionless.hpp"

using namespace weylspec;

namespace {

PotentialSpec mathieu() { return PotentialSpec::diagonal({ScalarExpr::parse("2cos(2x)")}, pi); }

PotentialSpec mathieu_pair() {
    return PotentialSpec::diagonal({ScalarExpr::parse("2cos(2x)"), ScalarExpr::parse("2cos(2x)")}, pi);
}

// diag(0, 2cos(2x) + c) with c lifting the bottom of the Mathieu spectrum to 0.
PotentialSpec overlap_example() {
    const double c = -*band_spectrum(mathieu(), -1.0, 1.0, 200).E0;
    return PotentialSpec::diagonal({ScalarExpr::parse("0"), ScalarExpr::parse("2cos(2x) + " + std::to_string(c))}, pi);
}

}  // namespace

TEST_CASE("free operator is reflectionless") {
    const auto Q = PotentialSpec::constant(1, 0.0);
    const auto bs = band_spectrum(Q, -1.0, 11.0, 400);
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(0.5 * i);
    const auto r = check_reflectionless(Q, 0.0, grid, bs);
    CHECK(r.valid_points == 20);
    CHECK(r.max_i <= 1e-6);
    CHECK(r.max_ii <= 1e-6);
    CHECK(r.max_iii <= 1e-6);
    CHECK(r.passed);
    const auto out = check_reflectionless(Q, 0.0, {-0.5}, bs);
    CHECK_FALSE(out.points[0].valid);
    CHECK(out.valid_points == 0);
}

TEST_CASE("doubled Mathieu is reflectionless on band interiors") {
    const auto Q = mathieu_pair();
    const auto bs = band_spectrum(Q, -1.0, 10.0, 400);
    const auto grid = reflectionless_grid(bs, 5);
    REQUIRE(grid.size() == 20);
    for (double l : grid) CHECK(bs.distance_to_breakpoint(l) >= 1e-3 * (1.0 - 1e-9));
    const auto r = check_reflectionless(Q, 0.3, grid, bs);
    CHECK(r.valid_points == static_cast<int>(grid.size()));
    CHECK(r.max_i <= 1e-3);
    CHECK(r.max_ii <= 1e-3);
    CHECK(r.max_iii <= 1e-3);
    CHECK(r.split_outcomes == 0);
    CHECK(r.max_re_defect <= 1e-3);
    CHECK(r.max_im_defect <= 1e-3);
}

TEST_CASE("overlap example is not reflectionless in the gaps of its second entry") {
    const auto Q = overlap_example();
    const auto bs = band_spectrum(Q, -1.0, 6.0, 400);
    const auto scalar = band_spectrum(mathieu(), -1.0, 6.0, 400);
    REQUIRE(scalar.gaps.size() >= 1);
    const double c = -*scalar.E0;
    const double l = 0.5 * (scalar.gaps[0].first + scalar.gaps[0].second) + c;
    const auto r = check_reflectionless(Q, 0.0, {l, 3.0 + c}, bs);
    REQUIRE(r.valid_points == 2);
    // Decoupled oracle: Xi = diag(1/2, 0 or 1) in the gap of the second entry.
    CHECK(std::abs(r.points[0].dev_i - 0.5) < 1e-3);
    CHECK_FALSE(r.points[0].pass_ii);
    CHECK_FALSE(r.points[0].pass_iii);
    CHECK(r.points[1].pass_i);
    CHECK(r.points[1].pass_ii);
    CHECK(r.points[1].pass_iii);
    CHECK(r.split_outcomes == 0);
    CHECK_FALSE(r.passed);
}

TEST_CASE("Borg verdicts") {
    const auto c = borg_verify(PotentialSpec::constant(3, 0.7), 30.0, {0.0, 0.5});
    CHECK(c.verdict == BorgOutcome::constant_confirmed);
    CHECK(std::abs(c.E0 - 0.7) < 1e-6);
    CHECK(c.reconstruction_deviation <= 1e-3);

    const auto m = borg_verify(mathieu(), 30.0, {0.0});
    CHECK(m.verdict == BorgOutcome::hypotheses_not_met);
    CHECK(m.gaps.size() >= 1);

    const auto o = borg_verify(overlap_example(), 30.0, {0.0, 0.8});
    CHECK(o.verdict == BorgOutcome::counterexample_behavior);
    CHECK(o.gaps.empty());
    CHECK_FALSE(o.uniform_multiplicity);
    CHECK(std::abs(o.E0) < 1e-6);
    CHECK(o.potential_deviation > 0.5);
    CHECK(o.reconstruction_deviation > 0.5);
    CHECK(std::string(to_string(o.verdict)) == "counterexample-behavior");
}
