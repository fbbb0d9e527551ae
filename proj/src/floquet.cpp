#include "weylspec/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "weylspec/linalg.hpp"

namespace weylspec {

namespace {

double cond_of(const CMatrix& V) {
    Eigen::JacobiSVD<CMatrix> svd(V);
    const auto& s = svd.singularValues();
    const double lo = s(s.size() - 1);
    return lo > 0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

struct EigenSample {
    CVector values;
    CMatrix vectors;
    int mu = 0;
};

EigenSample eigen_sample(const PotentialSpec& Q, double lambda, double x0, const FloquetOptions& opt) {
    const auto fs = integrate_fundamental(Q, lambda, x0, x0 + Q.floquet_period(), opt.integrator);
    Eigen::ComplexEigenSolver<CMatrix> es(fs.Psi);
    EigenSample s;
    s.values = es.eigenvalues();
    s.vectors = es.eigenvectors();
    for (Eigen::Index j = 0; j < s.vectors.cols(); ++j) s.vectors.col(j).normalize();
    s.mu = unit_modulus_count(s.values, opt.unit_tol);
    return s;
}

int mu_at(const PotentialSpec& Q, double lambda, double x0, const FloquetOptions& opt) {
    const auto fs = integrate_fundamental(Q, lambda, x0, x0 + Q.floquet_period(), opt.integrator);
    Eigen::ComplexEigenSolver<CMatrix> es(fs.Psi, false);
    return unit_modulus_count(es.eigenvalues(), opt.unit_tol);
}

// Reorders `cur` so that column j best matches column j of `prev` (greedy maximal overlap).
void track(const EigenSample& prev, EigenSample& cur) {
    const Eigen::Index n = cur.values.size();
    Eigen::MatrixXd overlap = (prev.vectors.adjoint() * cur.vectors).cwiseAbs();
    std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), -1);
    std::vector<bool> used_prev(static_cast<std::size_t>(n), false), used_cur(static_cast<std::size_t>(n), false);
    for (Eigen::Index step = 0; step < n; ++step) {
        double best = -1;
        Eigen::Index bi = 0, bj = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (used_prev[static_cast<std::size_t>(i)]) continue;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (used_cur[static_cast<std::size_t>(j)]) continue;
                if (overlap(i, j) > best) {
                    best = overlap(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        used_prev[static_cast<std::size_t>(bi)] = used_cur[static_cast<std::size_t>(bj)] = true;
        assign[static_cast<std::size_t>(bi)] = bj;
    }
    EigenSample out = cur;
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = cur.values(assign[static_cast<std::size_t>(i)]);
        out.vectors.col(i) = cur.vectors.col(assign[static_cast<std::size_t>(i)]);
    }
    cur = std::move(out);
}

// Largest |Re (rho + 1/rho) / 2| over multipliers with |ln|rho|| < 0.5 (|cos theta| on bands).
double near_unit_cosine(const CVector& rho) {
    double h = 0.0;
    for (Eigen::Index j = 0; j < rho.size(); ++j)
        if (std::abs(std::log(std::abs(rho(j)))) < 0.5) h = std::max(h, std::abs((0.5 * (rho(j) + 1.0 / rho(j))).real()));
    return h;
}

CMatrix weyl_from_basis(const CMatrix& basis, int m, const char* what) {
    const CMatrix V1 = basis.topRows(m);
    const CMatrix V2 = basis.bottomRows(m);
    return solve_checked(V1.transpose(), V2.transpose(), what, 1e-13).transpose();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

MonodromyMatrix monodromy(const PotentialSpec& Q, cplx z, double x0, const IntegratorOptions& options) {
    MonodromyMatrix M;
    M.omega = Q.floquet_period();
    M.z = z;
    M.x0 = x0;
    M.Phi = integrate_fundamental(Q, z, x0, x0 + M.omega, options).Psi;
    Eigen::ComplexEigenSolver<CMatrix> es(M.Phi);
    M.multipliers = es.eigenvalues();
    M.diagonalizable = cond_of(es.eigenvectors()) < 1e8;
    return M;
}

int unit_modulus_count(const CVector& multipliers, double unit_tol) {
    int c = 0;
    for (Eigen::Index j = 0; j < multipliers.size(); ++j)
        if (std::abs(std::log(std::abs(multipliers(j)))) < unit_tol) ++c;
    return c;
}

bool BandSpectrum::in_band(double lambda) const {
    return std::any_of(bands.begin(), bands.end(), [&](const Band& b) { return lambda > b.lower && lambda < b.upper; });
}

double BandSpectrum::distance_to_breakpoint(double lambda) const {
    double d = std::numeric_limits<double>::infinity();
    for (double b : breakpoints) d = std::min(d, std::abs(lambda - b));
    return d;
}

BandSpectrum band_spectrum(const PotentialSpec& Q, double lambda_min, double lambda_max, int n_grid, double x0,
                           const FloquetOptions& options) {
    if (!(lambda_min < lambda_max) || !std::isfinite(lambda_min) || !std::isfinite(lambda_max))
        throw PreconditionError("band_spectrum needs a finite interval lambda_min < lambda_max");
    if (n_grid < 100) throw PreconditionError("band_spectrum needs n_grid >= 100");
    const int m = Q.dimension();
    BandSpectrum bs;
    bs.scan_min = lambda_min;
    bs.scan_max = lambda_max;
    bs.m = m;
    auto n = static_cast<std::size_t>(n_grid);
    for (std::size_t i = 0; i < n; ++i)
        bs.grid.push_back(lambda_min + (lambda_max - lambda_min) * static_cast<double>(i) / static_cast<double>(n - 1));

    auto samples = parallel_map(n, [&](std::size_t i) { return eigen_sample(Q, bs.grid[i], x0, options); });

    // Gaps narrower than the grid: local maxima of |cos theta| close to 1 inside a run of constant
    // mu are maximized by golden section; a drop of mu at the maximizer is inserted into the scan.
    std::vector<std::size_t> candidates;
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = near_unit_cosine(samples[i].values);
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (samples[i].mu > 0 && samples[i - 1].mu == samples[i].mu && samples[i + 1].mu == samples[i].mu &&
            h[i] >= h[i - 1] && h[i] >= h[i + 1] && h[i] > 0.8)
            candidates.push_back(i);
    auto hidden = parallel_map(candidates.size(), [&](std::size_t c) -> std::optional<std::pair<double, EigenSample>> {
        const std::size_t i = candidates[c];
        auto f = [&](double l) { return near_unit_cosine(eigen_sample(Q, l, x0, options).values); };
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = bs.grid[i - 1], b = bs.grid[i + 1];
        double p = b - gr * (b - a), q = a + gr * (b - a);
        double fp = f(p), fq = f(q);
        while (b - a > 1e-10 * std::max(1.0, std::abs(a))) {
            if (fp > fq) {
                b = q;
                q = p;
                fq = fp;
                p = b - gr * (b - a);
                fp = f(p);
            } else {
                a = p;
                p = q;
                fp = fq;
                q = a + gr * (b - a);
                fq = f(q);
            }
        }
        const double l = 0.5 * (a + b);
        auto s = eigen_sample(Q, l, x0, options);
        if (s.mu < samples[i].mu) return std::make_pair(l, std::move(s));
        return std::nullopt;
    });
    std::vector<std::pair<double, double>> examined;
    for (std::size_t i : candidates) examined.emplace_back(bs.grid[i - 1], bs.grid[i + 1]);
    std::vector<std::pair<double, EigenSample>> merged;
    for (std::size_t i = 0; i < n; ++i) merged.emplace_back(bs.grid[i], std::move(samples[i]));
    for (auto& hv : hidden)
        if (hv) merged.push_back(std::move(*hv));
    std::stable_sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    n = merged.size();
    bs.grid.clear();
    samples.clear();
    for (auto& [l, smp] : merged) {
        bs.grid.push_back(l);
        samples.push_back(std::move(smp));
    }
    for (std::size_t i = 1; i < n; ++i) track(samples[i - 1], samples[i]);
    for (const auto& s : samples) {
        bs.multiplicity.push_back(s.mu);
        bs.multipliers.push_back(s.values);
        if (s.mu % 2 != 0 && bs.warnings.size() < 20)
            bs.warnings.push_back("odd unit-modulus count " + std::to_string(s.mu) + " at lambda = " +
                                  fmt(bs.grid[bs.multiplicity.size() - 1]) + " (near-degenerate multipliers)");
    }

    // Refine every change of mu between neighbouring grid points.
    std::vector<std::size_t> transitions;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (bs.multiplicity[i] != bs.multiplicity[i + 1]) transitions.push_back(i);
    const auto refined = parallel_map(transitions.size(), [&](std::size_t t) {
        const std::size_t i = transitions[t];
        double a = bs.grid[i], b = bs.grid[i + 1];
        const int mu_a = bs.multiplicity[i];
        while (b - a > options.edge_tol) {
            const double mid = 0.5 * (a + b);
            if (mu_at(Q, mid, x0, options) == mu_a)
                a = mid;
            else
                b = mid;
        }
        return 0.5 * (a + b);
    });
    bs.breakpoints = refined;

    // Bands are maximal runs of grid points with mu > 0.
    bs.band_id.assign(n, -1);
    std::size_t i = 0;
    while (i < n) {
        if (bs.multiplicity[i] == 0) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && bs.multiplicity[j + 1] > 0) ++j;
        Band b;
        b.lower_truncated = i == 0;
        b.upper_truncated = j == n - 1;
        b.lower = b.lower_truncated ? lambda_min : refined[static_cast<std::size_t>(
                                                       std::find(transitions.begin(), transitions.end(), i - 1) -
                                                       transitions.begin())];
        b.upper = b.upper_truncated ? lambda_max : refined[static_cast<std::size_t>(
                                                       std::find(transitions.begin(), transitions.end(), j) -
                                                       transitions.begin())];
        b.min_multiplicity = 2 * m;
        for (std::size_t k = i; k <= j; ++k) {
            b.max_multiplicity = std::max(b.max_multiplicity, bs.multiplicity[k]);
            b.min_multiplicity = std::min(b.min_multiplicity, bs.multiplicity[k]);
            bs.band_id[k] = static_cast<int>(bs.bands.size());
        }
        // Multipliers passing through +-1 inside a band indicate a closed or unresolved gap.
        for (std::size_t k = i; k < j; ++k) {
            const CVector& p = bs.multipliers[k];
            const CVector& q = bs.multipliers[k + 1];
            for (Eigen::Index r = 0; r < p.size(); ++r) {
                const bool on_p = std::abs(std::log(std::abs(p(r)))) < options.unit_tol;
                const bool on_q = std::abs(std::log(std::abs(q(r)))) < options.unit_tol;
                const bool covered = std::any_of(examined.begin(), examined.end(), [&](const auto& w) {
                    return w.first <= bs.grid[k] && bs.grid[k + 1] <= w.second;
                });
                if (on_p && on_q && !covered && p(r).imag() * q(r).imag() < 0 && bs.warnings.size() < 20) {
                    bs.warnings.push_back("multiplier passes " + std::string(p(r).real() > 0 ? "+1" : "-1") +
                                          " inside band between lambda = " + fmt(bs.grid[k]) + " and " +
                                          fmt(bs.grid[k + 1]) + "; a gap narrower than the grid may be unresolved");
                    break;
                }
            }
        }
        bs.bands.push_back(b);
        i = j + 1;
    }
    for (std::size_t k = 1; k < bs.bands.size(); ++k) bs.gaps.emplace_back(bs.bands[k - 1].upper, bs.bands[k].lower);
    if (!bs.bands.empty() && !bs.bands.front().lower_truncated) bs.E0 = bs.bands.front().lower;
    if (!bs.bands.empty() && bs.bands.front().lower_truncated)
        bs.warnings.push_back("spectrum extends below the scan interval; E0 not resolved");
    bs.uniform_multiplicity = !bs.bands.empty();
    for (const auto& b : bs.bands)
        if (b.min_multiplicity != 2 * m || b.max_multiplicity != 2 * m) bs.uniform_multiplicity = false;
    return bs;
}

std::vector<DirichletEigenvalue> dirichlet_spectrum(const PotentialSpec& Q, double x0, double lambda_min,
                                                    double lambda_max, int n_grid,
                                                    const IntegratorOptions& options) {
    if (!Q.is_periodic()) throw PreconditionError("dirichlet_spectrum needs a periodic potential");
    if (!(lambda_min < lambda_max)) throw PreconditionError("dirichlet_spectrum needs lambda_min < lambda_max");
    if (n_grid < 2) throw PreconditionError("dirichlet_spectrum needs n_grid >= 2");
    const double omega = Q.floquet_period();
    const int m = Q.dimension();
    auto phi1 = [&](double l) { return integrate_fundamental(Q, l, x0, x0 + omega, options).phi1(); };
    auto detf = [&](double l) { return phi1(l).determinant().real(); };
    auto smin = [&](double l) {
        Eigen::JacobiSVD<CMatrix> svd(phi1(l));
        return svd.singularValues()(m - 1) / std::max(1.0, svd.singularValues()(0));
    };

    const auto n = static_cast<std::size_t>(n_grid) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = lambda_min + (lambda_max - lambda_min) * static_cast<double>(i) / static_cast<double>(n - 1);
    struct Sample {
        double det, smin;
    };
    const auto samples = parallel_map(n, [&](std::size_t i) {
        const CMatrix p = phi1(grid[i]);
        Eigen::JacobiSVD<CMatrix> svd(p);
        return Sample{p.determinant().real(), svd.singularValues()(m - 1) / std::max(1.0, svd.singularValues()(0))};
    });

    std::vector<double> roots;
    auto root_tol = [](double l) { return 1e-13 * std::max(1.0, std::abs(l)); };
    std::vector<bool> bracketed(n, false);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double fa = samples[i].det, fb = samples[i + 1].det;
        if (fa == 0.0) {
            roots.push_back(grid[i]);
            continue;
        }
        if (fa * fb >= 0) continue;
        bracketed[i] = bracketed[i + 1] = true;
        double a = grid[i], b = grid[i + 1];
        double fa_ = fa;
        while (b - a > root_tol(a)) {
            const double mid = 0.5 * (a + b);
            const double fm = detf(mid);
            if (fm == 0.0) {
                a = b = mid;
                break;
            }
            if ((fm < 0) == (fa_ < 0)) {
                a = mid;
                fa_ = fm;
            } else {
                b = mid;
            }
        }
        roots.push_back(0.5 * (a + b));
    }
    if (samples.back().det == 0.0) roots.push_back(grid.back());

    // Roots of even order: near-zero local minima of the smallest singular value.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (bracketed[i - 1] && bracketed[i]) continue;
        if (!(samples[i].smin <= samples[i - 1].smin && samples[i].smin <= samples[i + 1].smin)) continue;
        double a = grid[i - 1], b = grid[i + 1];
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = smin(c), fd = smin(d);
        while (b - a > root_tol(a)) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - gr * (b - a);
                fc = smin(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + gr * (b - a);
                fd = smin(d);
            }
        }
        const double l = 0.5 * (a + b);
        if (smin(l) < 1e-7) {
            bool dup = false;
            for (double r : roots)
                if (std::abs(r - l) < 1e-8 * std::max(1.0, std::abs(l))) dup = true;
            if (!dup) roots.push_back(l);
        }
    }
    std::sort(roots.begin(), roots.end());

    std::vector<DirichletEigenvalue> out;
    for (double r : roots) {
        if (!out.empty() && std::abs(out.back().lambda - r) < 1e-9 * std::max(1.0, std::abs(r))) continue;
        Eigen::JacobiSVD<CMatrix> svd(phi1(r));
        const auto& s = svd.singularValues();
        int mult = 0;
        for (Eigen::Index k = 0; k < s.size(); ++k)
            if (s(k) < 1e-6 * std::max(1.0, s(0))) ++mult;
        out.push_back({r, std::max(1, mult)});
    }
    return out;
}

FloquetSplit floquet_weyl(const PotentialSpec& Q, cplx z, double x0, const FloquetOptions& options) {
    const int m = Q.dimension();
    FloquetSplit split;
    split.monodromy = monodromy(Q, z, x0, options.integrator);
    const CMatrix& Phi = split.monodromy.Phi;
    for (Eigen::Index j = 0; j < split.monodromy.multipliers.size(); ++j)
        if (std::abs(std::abs(split.monodromy.multipliers(j)) - 1.0) < options.split_tol)
            throw PreconditionError("Floquet multiplier on the unit circle: z is too close to the spectrum");
    const auto plus = ordered_schur(Phi, [](cplx r) { return std::abs(r) < 1.0; });
    const auto minus = ordered_schur(Phi, [](cplx r) { return std::abs(r) > 1.0; });
    if (plus.selected != m || minus.selected != m)
        throw ComputationError("Floquet multipliers do not split into two groups of size m");
    split.basis_plus = plus.U.leftCols(m);
    split.basis_minus = minus.U.leftCols(m);
    split.rho_plus = plus.T.diagonal().head(m);
    split.rho_minus = minus.T.diagonal().head(m);
    split.M_plus = weyl_from_basis(split.basis_plus, m, "V1 of the contracting Floquet subspace");
    split.M_minus = weyl_from_basis(split.basis_minus, m, "V1 of the expanding Floquet subspace");
    return split;
}

double floquet_quadratic_residual(const FloquetSplit& split) {
    const CMatrix& Phi = split.monodromy.Phi;
    const auto m = Phi.rows() / 2;
    const CMatrix A = Phi.topLeftCorner(m, m), B = Phi.topRightCorner(m, m);
    const CMatrix C = Phi.bottomLeftCorner(m, m), D = Phi.bottomRightCorner(m, m);
    const CMatrix P = B * D * solve_checked(B, CMatrix::Identity(m, m), "phi1(z, x0 + omega, x0)");
    double worst = 0.0;
    for (const CMatrix* M : {&split.M_plus, &split.M_minus}) {
        const CMatrix rho = A + B * (*M);
        const CMatrix res = rho * rho - (A + P) * rho + P * A - B * C;
        worst = std::max(worst, res.norm());
    }
    return worst;
}

std::vector<double> adaptive_eps_schedule(double breakpoint_distance, int count) {
    const double eps0 = std::min(0.1, breakpoint_distance / 4.0);
    if (!(eps0 > 1e-13)) throw PreconditionError("lambda is too close to a spectral breakpoint");
    return default_eps_schedule(eps0, count);
}

std::pair<BoundaryWeyl, BoundaryWeyl> boundary_weyl_pair(const PotentialSpec& Q, double lambda, double x0,
                                                         double breakpoint_distance, const FloquetOptions& options) {
    const auto sched = adaptive_eps_schedule(breakpoint_distance);
    std::vector<CMatrix> plus, minus;
    for (double eps : sched) {
        const auto split = floquet_weyl(Q, cplx(lambda, eps), x0, options);
        plus.push_back(split.M_plus);
        minus.push_back(split.M_minus);
    }
    const auto ep = richardson(sched, plus);
    const auto em = richardson(sched, minus);
    return {BoundaryWeyl{ep.value, ep.residual, sched}, BoundaryWeyl{em.value, em.residual, sched}};
}

BoundaryWeyl boundary_weyl(const PotentialSpec& Q, double lambda, double x0, Side side, const FloquetOptions& options) {
    const int full = 2 * Q.dimension();
    const double delta = 1e-6 * std::max(1.0, std::abs(lambda));
    for (double l : {lambda - delta, lambda, lambda + delta})
        if (mu_at(Q, l, x0, options) != full)
            throw PreconditionError("lambda = " + fmt(lambda) +
                                    " is not in a band interior with full multiplicity (band edge or gap)");
    const auto local = band_spectrum(Q, lambda - 0.4, lambda + 0.4, 100, x0, options);
    const double d = local.distance_to_breakpoint(lambda);
    if (d < 4e-7) throw PreconditionError("lambda = " + fmt(lambda) + " is too close to a band edge");
    auto pair = boundary_weyl_pair(Q, lambda, x0, d, options);
    return side == Side::plus ? pair.first : pair.second;
}

}  // namespace weylspec
