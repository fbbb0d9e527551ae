#include "weylspec/reflectionless.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "weylspec/green.hpp"
#include "weylspec/herglotz.hpp"
#include "weylspec/linalg.hpp"

namespace weylspec {

namespace {

double op_norm(const CMatrix& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(A);
    return svd.singularValues()(0);
}

CMatrix real_part(const CMatrix& M) { return 0.5 * (M + M.adjoint()); }

ReflectionlessPoint evaluate_point(const PotentialSpec& Q, double x0, double lambda, const BandSpectrum& spectrum,
                                   double threshold, const FloquetOptions& options) {
    ReflectionlessPoint p;
    p.lambda = lambda;
    const int m = Q.dimension();
    p.mu = unit_modulus_count(monodromy(Q, lambda, x0, options.integrator).multipliers, options.unit_tol);
    if (p.mu == 0) {
        p.note = "outside the spectrum";
        return p;
    }
    FloquetOptions opt = options;
    opt.split_tol = std::min(opt.split_tol, 1e-12);
    try {
        const auto sched = adaptive_eps_schedule(spectrum.distance_to_breakpoint(lambda));
        std::vector<CMatrix> plus, minus, xi;
        for (double eps : sched) {
            const cplx z(lambda, eps);
            const auto split = floquet_weyl(Q, z, x0, opt);
            plus.push_back(split.M_plus);
            minus.push_back(split.M_minus);
            const CMatrix G = green_from_weyl(split.M_plus, split.M_minus, z, x0).value;
            xi.push_back(imag_part(principal_matrix_log(G)) / pi);
        }
        const CMatrix Mp = richardson(sched, plus).value;
        const CMatrix Mm = richardson(sched, minus).value;
        const CMatrix X = real_part(richardson(sched, xi).value);
        const CMatrix Id = CMatrix::Identity(m, m);
        const CMatrix G = green_from_weyl(Mp, Mm).value;
        const CMatrix dG = green_x_derivative_from(Mp, Mm, 1e-6).value;
        p.dev_i = op_norm(X - 0.5 * Id);
        p.dev_ii = std::max(op_norm(G + G.adjoint()), op_norm(dG + dG.adjoint()));
        p.dev_iii = op_norm(Mp - Mm.adjoint());
        p.re_defect = op_norm(real_part(Mp) - real_part(Mm));
        p.im_defect = op_norm(imag_part(Mp) + imag_part(Mm));
        p.pass_i = p.dev_i <= threshold;
        p.pass_ii = p.dev_ii <= threshold;
        p.pass_iii = p.dev_iii <= threshold;
        p.valid = true;
    } catch (const Error& e) {
        p.note = e.what();
    }
    return p;
}

}  // namespace

const char* to_string(ReflectionlessCondition c) {
    switch (c) {
        case ReflectionlessCondition::xi: return "i";
        case ReflectionlessCondition::green: return "ii";
        case ReflectionlessCondition::weyl: return "iii";
        case ReflectionlessCondition::all: return "all";
    }
    return "?";
}

const char* to_string(BorgOutcome v) {
    switch (v) {
        case BorgOutcome::constant_confirmed: return "constant-confirmed";
        case BorgOutcome::hypotheses_not_met: return "hypotheses-not-met";
        case BorgOutcome::counterexample_behavior: return "counterexample-behavior";
        case BorgOutcome::inconclusive: return "inconclusive";
    }
    return "?";
}

std::vector<double> reflectionless_grid(const BandSpectrum& spectrum, int per_band, double clip) {
    std::vector<double> grid;
    for (const auto& b : spectrum.bands) {
        const double lo = b.lower + clip, hi = b.upper - clip;
        if (!(hi > lo)) continue;
        for (int i = 0; i < per_band; ++i) {
            const double l = per_band == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (per_band - 1.0);
            if (spectrum.distance_to_breakpoint(l) >= clip * (1.0 - 1e-9)) grid.push_back(l);
        }
    }
    return grid;
}

ReflectionlessReport check_reflectionless(const PotentialSpec& Q, double x0, const std::vector<double>& lambda_grid,
                                          const BandSpectrum& spectrum, ReflectionlessCondition which,
                                          double threshold, const FloquetOptions& options) {
    if (!(threshold > 0)) throw PreconditionError("threshold must be positive");
    ReflectionlessReport r;
    r.which = which;
    r.threshold = threshold;
    r.points = parallel_map(lambda_grid.size(), [&](std::size_t i) {
        return evaluate_point(Q, x0, lambda_grid[i], spectrum, threshold, options);
    });
    for (const auto& p : r.points) {
        if (!p.valid) continue;
        ++r.valid_points;
        r.max_i = std::max(r.max_i, p.dev_i);
        r.max_ii = std::max(r.max_ii, p.dev_ii);
        r.max_iii = std::max(r.max_iii, p.dev_iii);
        if (!(p.pass_i == p.pass_ii && p.pass_ii == p.pass_iii)) ++r.split_outcomes;
        if (p.pass_ii) {
            r.max_re_defect = std::max(r.max_re_defect, p.re_defect);
            r.max_im_defect = std::max(r.max_im_defect, p.im_defect);
        }
    }
    r.pass_i = r.valid_points > 0 && r.max_i <= threshold;
    r.pass_ii = r.valid_points > 0 && r.max_ii <= threshold;
    r.pass_iii = r.valid_points > 0 && r.max_iii <= threshold;
    switch (which) {
        case ReflectionlessCondition::xi: r.passed = r.pass_i; break;
        case ReflectionlessCondition::green: r.passed = r.pass_ii; break;
        case ReflectionlessCondition::weyl: r.passed = r.pass_iii; break;
        case ReflectionlessCondition::all: r.passed = r.pass_i && r.pass_ii && r.pass_iii; break;
    }
    return r;
}

BorgVerdict borg_verify(const PotentialSpec& Q, double cutoff, const std::vector<double>& x_grid,
                        const BorgOptions& options) {
    if (!Q.is_periodic()) throw PreconditionError("borg_verify needs a periodic or constant potential");
    if (x_grid.empty()) throw PreconditionError("borg_verify needs a nonempty x grid");
    const double lower = Q.min_eigenvalue_bound() - 1.0;
    if (!(cutoff > lower + 1.0)) throw PreconditionError("cutoff must lie above the bottom of the spectrum");
    const int n_grid = std::max(400, static_cast<int>(std::ceil(options.points_per_unit * (cutoff - lower))));

    BorgVerdict v;
    v.cutoff = cutoff;
    v.spectrum = band_spectrum(Q, lower, cutoff, n_grid, 0.0, options.floquet);
    if (!v.spectrum.E0) throw ComputationError("bottom of the spectrum not resolved by the band scan");
    v.E0 = *v.spectrum.E0;
    v.gaps = v.spectrum.gaps;
    v.uniform_multiplicity = v.spectrum.uniform_multiplicity;
    v.potential_deviation = Q.max_deviation_from(v.E0);

    const auto grid = reflectionless_grid(v.spectrum, options.per_band);
    v.reflectionless = check_reflectionless(Q, 0.0, grid, v.spectrum, ReflectionlessCondition::all,
                                            options.thresholds.condition, options.floquet);

    const auto field = periodic_xi_field(Q, v.spectrum, options.floquet);
    const CMatrix E0I = v.E0 * CMatrix::Identity(Q.dimension(), Q.dimension());
    for (double x : x_grid) {
        v.reconstruction.push_back(reconstruct_potential(field, v.E0, x, cutoff, options.trace));
        v.reconstruction_deviation =
            std::max(v.reconstruction_deviation, op_norm(v.reconstruction.back().value - E0I));
    }

    if (!v.gaps.empty()) {
        v.verdict = BorgOutcome::hypotheses_not_met;
        v.reason = std::to_string(v.gaps.size()) + " spectral gap(s) found in [E0, cutoff]";
    } else if (!v.uniform_multiplicity) {
        v.verdict = BorgOutcome::counterexample_behavior;
        v.reason = "gapless spectrum without uniform multiplicity 2m";
    } else if (v.reflectionless.passed && v.reconstruction_deviation <= options.thresholds.reconstruction) {
        v.verdict = BorgOutcome::constant_confirmed;
        v.reason = "gapless, uniform multiplicity 2m, reflectionless, reconstruction constant";
    } else {
        v.verdict = BorgOutcome::inconclusive;
        v.reason = v.reflectionless.passed ? "reconstruction deviates from E0 I beyond threshold"
                                           : "reflectionless conditions fail on a gapless uniform spectrum";
    }
    return v;
}

}  // namespace weylspec
