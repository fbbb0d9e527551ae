#include "weylspec/linalg.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace weylspec {

namespace {

// Givens rotation with real cosine: [c s; -conj(s) c] [f; g] = [r; 0].
void make_rotation(cplx f, cplx g, double& c, cplx& s) {
    if (g == cplx(0.0)) {
        c = 1.0;
        s = 0.0;
        return;
    }
    if (f == cplx(0.0)) {
        c = 0.0;
        s = std::conj(g) / std::abs(g);
        return;
    }
    const double af = std::abs(f), ag = std::abs(g);
    const double d = std::hypot(af, ag);
    c = af / d;
    s = (f / af) * std::conj(g) / d;
}

// x <- c x + s y,  y <- c y - conj(s) x  for two equally long vectors.
template <class X, class Y>
void apply_rotation(X&& x, Y&& y, double c, cplx s) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const cplx t = c * x(i) + s * y(i);
        y(i) = c * y(i) - std::conj(s) * x(i);
        x(i) = t;
    }
}

// Swaps the adjacent diagonal entries k, k+1 of the upper-triangular T, updating U.
void swap_adjacent(CMatrix& T, CMatrix& U, Eigen::Index k) {
    const Eigen::Index n = T.rows();
    const cplx t11 = T(k, k), t22 = T(k + 1, k + 1);
    double c;
    cplx s;
    make_rotation(T(k, k + 1), t22 - t11, c, s);
    if (k + 2 < n) apply_rotation(T.row(k).tail(n - k - 2), T.row(k + 1).tail(n - k - 2), c, s);
    if (k > 0) apply_rotation(T.col(k).head(k), T.col(k + 1).head(k), c, std::conj(s));
    T(k, k) = t22;
    T(k + 1, k + 1) = t11;
    apply_rotation(U.col(k), U.col(k + 1), c, std::conj(s));
}

}  // namespace

OrderedSchur ordered_schur(const CMatrix& A, const std::function<bool(cplx)>& select) {
    Eigen::ComplexSchur<CMatrix> schur(A);
    if (schur.info() != Eigen::Success) throw ComputationError("complex Schur decomposition failed");
    OrderedSchur out{schur.matrixT(), schur.matrixU(), 0};
    const Eigen::Index n = A.rows();
    out.T.triangularView<Eigen::StrictlyLower>().setZero();
    Eigen::Index placed = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!select(out.T(j, j))) continue;
        for (Eigen::Index k = j - 1; k >= placed; --k) swap_adjacent(out.T, out.U, k);
        ++placed;
    }
    out.selected = static_cast<int>(placed);
    return out;
}

CMatrix triangular_sqrt(const CMatrix& T) {
    const Eigen::Index n = T.rows();
    CMatrix R = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) R(i, i) = std::sqrt(T(i, i));
    for (Eigen::Index j = 1; j < n; ++j) {
        for (Eigen::Index i = j - 1; i >= 0; --i) {
            cplx s = T(i, j);
            for (Eigen::Index k = i + 1; k < j; ++k) s -= R(i, k) * R(k, j);
            R(i, j) = s / (R(i, i) + R(j, j));
        }
    }
    return R;
}

double norm1(const CMatrix& A) {
    if (A.size() == 0) return 0.0;
    return A.cwiseAbs().colwise().sum().maxCoeff();
}

double reciprocal_condition(const CMatrix& A) {
    if (A.rows() == 0) return 1.0;
    Eigen::PartialPivLU<CMatrix> lu(A);
    const double r = lu.rcond();
    return std::isfinite(r) ? r : 0.0;
}

CMatrix solve_checked(const CMatrix& A, const CMatrix& B, const std::string& what, double min_rcond) {
    Eigen::PartialPivLU<CMatrix> lu(A);
    double r = lu.rcond();
    if (!std::isfinite(r)) r = 0.0;
    if (r < min_rcond) throw SingularityError(what + " is numerically singular", r);
    return lu.solve(B);
}

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
        weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

Extrapolated richardson(const std::vector<double>& h, const std::vector<CMatrix>& values, int max_order) {
    const std::size_t n = values.size();
    if (n == 0 || h.size() != n) throw PreconditionError("richardson: mismatched or empty input");
    if (n == 1) return {values[0], 0.0};
    // P[i][j]: extrapolation of order j ending at sample i.
    std::vector<std::vector<CMatrix>> P(n);
    Extrapolated best{values.back(), std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < n; ++i) {
        P[i].push_back(values[i]);
        const std::size_t jmax = std::min<std::size_t>(i, static_cast<std::size_t>(std::max(1, max_order)));
        for (std::size_t j = 1; j <= jmax; ++j) {
            const double hi = h[i], hij = h[i - j];
            const CMatrix next = P[i][j - 1] + (P[i][j - 1] - P[i - 1][j - 1]) * (hi / (hij - hi));
            const double err = std::max((next - P[i][j - 1]).norm(), (next - P[i - 1][j - 1]).norm());
            if (err <= best.residual) {
                best.value = next;
                best.residual = err;
            }
            P[i].push_back(next);
        }
    }
    return best;
}

namespace {
std::atomic<int> g_workers{0};
}

int worker_count() {
    const int w = g_workers.load();
    if (w > 0) return w;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_worker_count(int workers) { g_workers = workers < 1 ? 0 : workers; }

}  // namespace weylspec
