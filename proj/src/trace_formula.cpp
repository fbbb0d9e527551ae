#include "weylspec/trace_formula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "weylspec/green.hpp"
#include "weylspec/herglotz.hpp"
#include "weylspec/linalg.hpp"

namespace weylspec {

namespace {

double nearest_distance(const std::vector<double>& points, double lambda) {
    double d = std::numeric_limits<double>::infinity();
    for (double p : points) d = std::min(d, std::abs(lambda - p));
    return d;
}

// Re k (iy)^{k+1} (lambda - iy)^{-k-1} (-lambda)^{k-1}
double trace_weight(int k, double y, double lambda) {
    const cplx z(0.0, y);
    const cplx w = static_cast<double>(k) * std::pow(z / (lambda - z), k + 1) * std::pow(-lambda, k - 1);
    return w.real();
}

struct Sample {
    double lambda = 0.0;
    CMatrix f;  ///< I/2 - Xi
};

struct Panel {
    Sample a, mid, b;
    std::vector<CMatrix> whole;
    int depth = 0;
};

struct Integrator {
    const XiSlice& slice;
    int k;
    const std::vector<double>& ys;
    double density;
    int max_depth;
    long evaluations = 0;

    Sample sample(double lambda) const {
        const CMatrix Id = CMatrix::Identity(slice.m, slice.m);
        return Sample{lambda, 0.5 * Id - slice.xi(lambda)};
    }

    std::vector<Sample> sample_all(const std::vector<double>& lambdas) {
        evaluations += static_cast<long>(lambdas.size());
        return parallel_map(lambdas.size(), [&](std::size_t i) { return sample(lambdas[i]); });
    }

    std::vector<CMatrix> simpson(const Sample& a, const Sample& m, const Sample& b) const {
        const double h = b.lambda - a.lambda;
        std::vector<CMatrix> out;
        for (double y : ys)
            out.push_back(h / 6.0 *
                          (trace_weight(k, y, a.lambda) * a.f + 4.0 * trace_weight(k, y, m.lambda) * m.f +
                           trace_weight(k, y, b.lambda) * b.f));
        return out;
    }

    std::vector<CMatrix> rectangle(const Sample& s, double width) const {
        std::vector<CMatrix> out;
        for (double y : ys) out.push_back(width * trace_weight(k, y, s.lambda) * s.f);
        return out;
    }

    // Level-synchronous adaptive Simpson over the given intervals; midpoints of all active
    // panels are evaluated together.
    std::vector<CMatrix> integrate(const std::vector<std::pair<double, double>>& intervals,
                                   std::vector<std::pair<Sample, Sample>>& endpoints) {
        std::vector<double> pts;
        for (const auto& [a, b] : intervals) {
            pts.push_back(a);
            pts.push_back(0.5 * (a + b));
            pts.push_back(b);
        }
        const auto s = sample_all(pts);
        std::vector<Panel> active;
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            Panel p{s[3 * i], s[3 * i + 1], s[3 * i + 2], {}, 0};
            p.whole = simpson(p.a, p.mid, p.b);
            active.push_back(std::move(p));
            endpoints.emplace_back(s[3 * i], s[3 * i + 2]);
        }
        std::vector<CMatrix> total(ys.size(), CMatrix::Zero(slice.m, slice.m));
        while (!active.empty()) {
            std::vector<double> q;
            for (const auto& p : active) {
                q.push_back(0.5 * (p.a.lambda + p.mid.lambda));
                q.push_back(0.5 * (p.mid.lambda + p.b.lambda));
            }
            const auto qs = sample_all(q);
            std::vector<Panel> next;
            for (std::size_t i = 0; i < active.size(); ++i) {
                const Panel& p = active[i];
                const auto left = simpson(p.a, qs[2 * i], p.mid);
                const auto right = simpson(p.mid, qs[2 * i + 1], p.b);
                double err = 0.0;
                for (std::size_t j = 0; j < ys.size(); ++j)
                    err = std::max(err, (left[j] + right[j] - p.whole[j]).norm());
                if (err <= 15.0 * density * (p.b.lambda - p.a.lambda) || p.depth >= max_depth) {
                    for (std::size_t j = 0; j < ys.size(); ++j)
                        total[j] += left[j] + right[j] + (left[j] + right[j] - p.whole[j]) / 15.0;
                } else {
                    next.push_back(Panel{p.a, qs[2 * i], p.mid, left, p.depth + 1});
                    next.push_back(Panel{p.mid, qs[2 * i + 1], p.b, right, p.depth + 1});
                }
            }
            active = std::move(next);
        }
        return total;
    }
};

TraceReconstruction trace_integral(const XiField& field, double E0, double x, int k, double cutoff,
                                   const TraceOptions& options) {
    const auto& ys = options.y_schedule;
    if (ys.empty()) throw PreconditionError("empty y schedule");
    for (std::size_t i = 0; i < ys.size(); ++i)
        if (!(ys[i] > 0) || (i > 0 && !(ys[i] > ys[i - 1])))
            throw PreconditionError("y schedule must be positive and increasing");
    if (!(cutoff > E0)) throw PreconditionError("cutoff must exceed E0");
    if (k < 1) throw PreconditionError("trace invariant order must be >= 1");

    const XiSlice slice = field(x);
    std::vector<double> cuts{E0};
    for (double b : slice.breakpoints)
        if (b > E0 && b < cutoff) cuts.push_back(b);
    cuts.push_back(cutoff);

    auto clip = [&](double b) { return options.edge_clip * std::max(1.0, std::abs(b)); };
    std::vector<std::pair<double, double>> intervals;
    std::vector<std::pair<double, double>> slivers;  // widths at the lower and upper end
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i] + clip(cuts[i]);
        const double hi = cuts[i + 1] - (i + 2 == cuts.size() ? 0.0 : clip(cuts[i + 1]));
        if (!(hi > lo)) continue;
        intervals.emplace_back(lo, hi);
        slivers.emplace_back(lo - cuts[i], cuts[i + 1] - hi);
    }

    Integrator integ{slice, k, ys, options.quad_tol / (cutoff - E0), options.max_depth};
    std::vector<std::pair<Sample, Sample>> ends;
    auto J = integ.integrate(intervals, ends);
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto lo = integ.rectangle(ends[i].first, slivers[i].first);
        const auto hi = integ.rectangle(ends[i].second, slivers[i].second);
        for (std::size_t j = 0; j < ys.size(); ++j) J[j] += lo[j] + hi[j];
    }

    TraceReconstruction out;
    out.x = x;
    out.E0 = E0;
    out.y_schedule = ys;
    out.cutoff = cutoff;
    const CMatrix Id = CMatrix::Identity(slice.m, slice.m);
    std::vector<double> h;
    for (std::size_t j = ys.size(); j-- > 0;) {
        CMatrix v = 0.5 * std::pow(E0, k) * Id + J[j];
        v = 0.5 * (v + v.adjoint()).eval();
        out.per_y.insert(out.per_y.begin(), v);
    }
    for (double y : ys) h.push_back(1.0 / (y * y));
    const auto ex = richardson(h, out.per_y, static_cast<int>(ys.size()) - 1);
    out.value = 0.5 * (ex.value + ex.value.adjoint());
    out.residual = ex.residual;

    // Tail check: Xi should equal I/2 just below the cutoff.
    std::vector<double> probes;
    const double span = cutoff - E0;
    for (int j = 1; j <= 3; ++j) {
        double p = cutoff - 0.01 * j * span;
        while (nearest_distance(slice.breakpoints, p) < clip(p) * 10) p -= 0.001 * span;
        if (p > E0) probes.push_back(p);
    }
    const auto tail = integ.sample_all(probes);
    for (const auto& s : tail) out.tail_defect = std::max(out.tail_defect, 2.0 * s.f.norm());
    out.tail_violation = out.tail_defect > options.tail_threshold;
    out.evaluations = integ.evaluations;
    return out;
}

}  // namespace

XiField periodic_xi_field(const PotentialSpec& Q, const BandSpectrum& spectrum, const FloquetOptions& options) {
    FloquetOptions opt = options;
    opt.split_tol = std::min(opt.split_tol, 1e-12);
    return [Q, spectrum, opt](double x) {
        XiSlice s;
        s.x = x;
        s.m = Q.dimension();
        s.breakpoints = spectrum.breakpoints;
        const double lo = spectrum.E0.value_or(spectrum.scan_min);
        if (Q.is_periodic() || Q.is_constant()) {
            const int n = std::max(400, static_cast<int>(std::ceil(30.0 * (spectrum.scan_max - lo))));
            for (const auto& d : dirichlet_spectrum(Q, x, lo, spectrum.scan_max, n, opt.integrator)) {
                const auto M = monodromy(Q, d.lambda, x, opt.integrator);
                if (unit_modulus_count(M.multipliers, opt.unit_tol) != 2 * s.m) s.breakpoints.push_back(d.lambda);
            }
        }
        std::sort(s.breakpoints.begin(), s.breakpoints.end());
        s.breakpoints.erase(std::unique(s.breakpoints.begin(), s.breakpoints.end(),
                                        [](double a, double b) { return std::abs(a - b) < 1e-8 * std::max(1.0, std::abs(a)); }),
                            s.breakpoints.end());
        const auto bps = s.breakpoints;
        s.xi = [Q, opt, bps, x](double lambda) -> CMatrix {
            const auto sched = adaptive_eps_schedule(nearest_distance(bps, lambda));
            const HerglotzFn H = [&](cplx z) {
                const auto split = floquet_weyl(Q, z, x, opt);
                return green_from_weyl(split.M_plus, split.M_minus, z, x).value;
            };
            return xi_matrix(H, lambda, sched).value;
        };
        return s;
    };
}

XiField constant_xi_field(const CMatrix& value) {
    return [value](double x) {
        XiSlice s;
        s.x = x;
        s.m = static_cast<int>(value.rows());
        s.xi = [value](double) { return value; };
        return s;
    };
}

TraceReconstruction reconstruct_potential(const XiField& field, double E0, double x, double cutoff,
                                          const TraceOptions& options) {
    // Q = 2 R_1.
    auto r = trace_integral(field, E0, x, 1, cutoff, options);
    r.value *= 2.0;
    for (auto& v : r.per_y) v *= 2.0;
    r.residual *= 2.0;
    return r;
}

TraceReconstruction higher_trace_invariant(const XiField& field, double E0, double x, int k, double cutoff,
                                           const TraceOptions& options) {
    return trace_integral(field, E0, x, k, cutoff, options);
}

std::vector<CMatrix> expansion_coefficients_G(std::span<const CMatrix> derivs, int N) {
    if (N < 0) throw PreconditionError("expansion order must be nonnegative");
    if (derivs.empty()) throw PreconditionError("expansion coefficients need Q(x)");
    const auto m = derivs.front().rows();
    const CMatrix Id = CMatrix::Identity(m, m);
    if (N == 0) return {Id};
    const int order = 2 * N - 1;
    const auto plus = asymptotic_coefficients(derivs, order, Side::plus);
    const auto minus = asymptotic_coefficients(derivs, order, Side::minus);
    // M_- - M_+ = -2i z^{1/2} (I + Y), Y = sum_l y_l s^l with s = z^{-1/2}.
    std::vector<CMatrix> y(static_cast<std::size_t>(2 * N + 1), CMatrix::Zero(m, m));
    for (int k = 1; k <= order; ++k)
        y[static_cast<std::size_t>(k + 1)] =
            cplx(0.0, 0.5) * (minus.coefficients[static_cast<std::size_t>(k - 1)] -
                              plus.coefficients[static_cast<std::size_t>(k - 1)]);
    std::vector<CMatrix> c(static_cast<std::size_t>(2 * N + 1), CMatrix::Zero(m, m));
    c[0] = Id;
    for (std::size_t j = 1; j < c.size(); ++j)
        for (std::size_t l = 1; l <= j; ++l) c[j] -= y[l] * c[j - l];
    std::vector<CMatrix> G;
    for (int k = 0; k <= N; ++k) G.push_back(c[static_cast<std::size_t>(2 * k)]);
    return G;
}

std::vector<CMatrix> expansion_coefficients_G(const PotentialSpec& Q, double x, int N) {
    const int need = std::max(1, 2 * N - 1);
    if (need - 1 > Q.max_derivative_order())
        throw PreconditionError("potential provides derivatives only up to order " +
                                std::to_string(Q.max_derivative_order()));
    std::vector<CMatrix> derivs;
    for (int k = 0; k < need; ++k) derivs.push_back(Q.evaluate(x, k));
    return expansion_coefficients_G(derivs, N);
}

std::vector<CMatrix> trace_invariants_from_expansion(const std::vector<CMatrix>& G) {
    if (G.empty()) throw PreconditionError("empty expansion");
    const auto m = G.front().rows();
    const std::size_t N = G.size() - 1;
    // log(I + X), X = sum_{k>=1} G_k w^k with w = 1/z; R_k = k L_k.
    std::vector<CMatrix> L(N + 1, CMatrix::Zero(m, m));
    std::vector<CMatrix> power(N + 1, CMatrix::Zero(m, m));
    for (std::size_t k = 1; k <= N; ++k) power[k] = G[k];
    for (std::size_t n = 1; n <= N; ++n) {
        const double coef = (n % 2 == 1 ? 1.0 : -1.0) / static_cast<double>(n);
        for (std::size_t k = 1; k <= N; ++k) L[k] += coef * power[k];
        std::vector<CMatrix> next(N + 1, CMatrix::Zero(m, m));
        for (std::size_t a = 1; a <= N; ++a)
            for (std::size_t b = 1; a + b <= N; ++b) next[a + b] += power[a] * G[b];
        power = std::move(next);
    }
    std::vector<CMatrix> R{0.5 * CMatrix::Identity(m, m)};
    for (std::size_t k = 1; k <= N; ++k) R.push_back(static_cast<double>(k) * L[k]);
    return R;
}

}  // namespace weylspec
