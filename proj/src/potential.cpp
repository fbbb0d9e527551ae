#include "weylspec/potential.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include <Eigen/Eigenvalues>

namespace weylspec {

const char* to_string(PotentialKind kind) {
    switch (kind) {
        case PotentialKind::constant: return "constant";
        case PotentialKind::diagonal: return "diagonal";
        case PotentialKind::fourier_hermitian: return "fourier-hermitian";
        case PotentialKind::sampled: return "sampled";
    }
    return "?";
}

double hermitian_defect(const CMatrix& M) { return (M - M.adjoint()).norm(); }

namespace {

constexpr double hermitian_tol = 1e-12;
constexpr int analytic_order_limit = 64;

struct ConstantModel {
    CMatrix value;
};

struct DiagonalModel {
    std::vector<ScalarExpr> entries;
};

struct FourierModel {
    double kappa;
    CMatrix q0;
    std::vector<std::pair<int, CMatrix>> positive;  // k > 0
};

// Natural cubic-spline data for every matrix entry, stored column-wise: row i = sample i,
// column = flattened (r, c) entry.
struct SampledModel {
    double x_start;
    double dx;
    bool periodic;
    Eigen::MatrixXcd y;
    Eigen::MatrixXcd second;  // spline second derivatives at the nodes
};

void check_hermitian(const CMatrix& M, const char* what) {
    const double scale = std::max(1.0, M.norm());
    if (hermitian_defect(M) > hermitian_tol * scale)
        throw PreconditionError(std::string(what) + " is not Hermitian (defect " +
                                std::to_string(hermitian_defect(M)) + ")");
}

// Solves the constant-coefficient tridiagonal system  M_{i-1} + 4 M_i + M_{i+1} = rhs_i
// (cyclic when `periodic`, otherwise with clamped end rows 2 M_0 + M_1, M_{n-2} + 2 M_{n-1}).
Eigen::MatrixXcd solve_spline_system(const Eigen::MatrixXcd& rhs, bool periodic) {
    const Eigen::Index n = rhs.rows();
    auto thomas = [n](Eigen::VectorXd a, Eigen::VectorXd b, Eigen::VectorXd c,
                      Eigen::MatrixXcd d) -> Eigen::MatrixXcd {
        for (Eigen::Index i = 1; i < n; ++i) {
            const double w = a(i) / b(i - 1);
            b(i) -= w * c(i - 1);
            d.row(i) -= w * d.row(i - 1);
        }
        d.row(n - 1) /= b(n - 1);
        for (Eigen::Index i = n - 2; i >= 0; --i) d.row(i) = (d.row(i) - c(i) * d.row(i + 1)) / b(i);
        return d;
    };
    Eigen::VectorXd a = Eigen::VectorXd::Ones(n), b = Eigen::VectorXd::Constant(n, 4.0),
                    c = Eigen::VectorXd::Ones(n);
    if (!periodic) {
        b(0) = 2.0;
        b(n - 1) = 2.0;
        return thomas(a, b, c, rhs);
    }
    // Sherman-Morrison for the corner entries of the cyclic matrix.
    const double gamma = -b(0);
    const double alpha = 1.0, beta = 1.0;  // bottom-left and top-right corners
    Eigen::VectorXd bb = b;
    bb(0) -= gamma;
    bb(n - 1) -= alpha * beta / gamma;
    Eigen::MatrixXcd x = thomas(a, bb, c, rhs);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n, 1);
    u(0, 0) = gamma;
    u(n - 1, 0) = alpha;
    Eigen::MatrixXcd z = thomas(a, bb, c, u);
    const cplx denom = 1.0 + z(0, 0) + beta * z(n - 1, 0) / gamma;
    for (Eigen::Index col = 0; col < rhs.cols(); ++col) {
        const cplx fact = (x(0, col) + beta * x(n - 1, col) / gamma) / denom;
        x.col(col) -= fact * z.col(0);
    }
    return x;
}

}  // namespace

struct PotentialSpec::Model {
    int m = 1;
    PotentialKind kind = PotentialKind::constant;
    std::optional<double> period;
    std::variant<ConstantModel, DiagonalModel, FourierModel, SampledModel> data;

    void evaluate(double x, int order, CMatrix& out) const {
        out.setZero(m, m);
        if (order < 0) throw PreconditionError("negative derivative order");
        switch (kind) {
            case PotentialKind::constant:
                if (order == 0) out = std::get<ConstantModel>(data).value;
                return;
            case PotentialKind::diagonal: {
                const auto& d = std::get<DiagonalModel>(data);
                for (int i = 0; i < m; ++i) out(i, i) = d.entries[static_cast<std::size_t>(i)].evaluate(x, order);
                return;
            }
            case PotentialKind::fourier_hermitian: {
                const auto& f = std::get<FourierModel>(data);
                if (order == 0) out = f.q0;
                for (const auto& [k, qk] : f.positive) {
                    const double w = k * f.kappa;
                    const cplx factor = std::pow(I_unit * w, order) * std::exp(I_unit * (w * x));
                    const CMatrix term = factor * qk;
                    out += term + term.adjoint();
                }
                return;
            }
            case PotentialKind::sampled: evaluate_sampled(std::get<SampledModel>(data), x, order, out); return;
        }
    }

    void evaluate_sampled(const SampledModel& s, double x, int order, CMatrix& out) const {
        if (order > 2)
            throw PreconditionError("sampled potential supports derivative orders 0..2, requested " +
                                    std::to_string(order));
        const Eigen::Index n = s.y.rows();
        double t = (x - s.x_start) / s.dx;
        Eigen::Index i0;
        if (s.periodic) {
            const double span = static_cast<double>(n);
            t = std::fmod(t, span);
            if (t < 0) t += span;
            i0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(t)), n - 1);
        } else {
            const double last = static_cast<double>(n - 1);
            if (t < -1e-9 || t > last + 1e-9)
                throw PreconditionError("x = " + std::to_string(x) + " outside sampled range");
            t = std::clamp(t, 0.0, last);
            i0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(t)), n - 2);
        }
        const Eigen::Index i1 = s.periodic ? (i0 + 1) % n : i0 + 1;
        const double h = s.dx;
        const double a = (t - static_cast<double>(i0)) * h;  // x - x_i
        const double b = h - a;                              // x_{i+1} - x
        Eigen::RowVectorXcd v;
        const auto yi = s.y.row(i0), yj = s.y.row(i1), mi = s.second.row(i0), mj = s.second.row(i1);
        if (order == 0) {
            v = mi * (b * b * b / (6 * h)) + mj * (a * a * a / (6 * h)) + (yi / h - mi * (h / 6)) * b +
                (yj / h - mj * (h / 6)) * a;
        } else if (order == 1) {
            v = -mi * (b * b / (2 * h)) + mj * (a * a / (2 * h)) - (yi / h - mi * (h / 6)) +
                (yj / h - mj * (h / 6));
        } else {
            v = mi * (b / h) + mj * (a / h);
        }
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) out(r, c) = v(r * m + c);
        // Hermitian by construction up to rounding; enforce exactly.
        out = (0.5 * (out + out.adjoint())).eval();
    }

    std::vector<double> sample_grid() const {
        std::vector<double> xs;
        if (kind == PotentialKind::sampled && !period) {
            const auto& s = std::get<SampledModel>(data);
            for (Eigen::Index i = 0; i < s.y.rows(); ++i) xs.push_back(s.x_start + static_cast<double>(i) * s.dx);
            // also midpoints
            for (Eigen::Index i = 0; i + 1 < s.y.rows(); ++i)
                xs.push_back(s.x_start + (static_cast<double>(i) + 0.5) * s.dx);
            return xs;
        }
        const double L = period.value_or(1.0);
        const double x0 = kind == PotentialKind::sampled ? std::get<SampledModel>(data).x_start : 0.0;
        constexpr int n = 257;
        for (int i = 0; i < n; ++i) xs.push_back(x0 + L * i / (n - 1));
        return xs;
    }
};

PotentialSpec PotentialSpec::constant(const CMatrix& C, std::optional<double> period) {
    if (C.rows() == 0 || C.rows() != C.cols()) throw PreconditionError("constant potential must be square and nonempty");
    if (period && !(*period > 0)) throw PreconditionError("period must be positive");
    check_hermitian(C, "constant potential");
    auto model = std::make_shared<Model>();
    model->m = static_cast<int>(C.rows());
    model->kind = PotentialKind::constant;
    model->period = period;
    model->data = ConstantModel{0.5 * (C + C.adjoint())};
    return PotentialSpec(std::move(model));
}

PotentialSpec PotentialSpec::constant(int m, double c, std::optional<double> period) {
    if (m <= 0) throw PreconditionError("dimension must be positive");
    return constant(CMatrix::Identity(m, m) * c, period);
}

PotentialSpec PotentialSpec::diagonal(std::vector<ScalarExpr> entries, std::optional<double> period) {
    if (entries.empty()) throw PreconditionError("diagonal potential needs at least one entry");
    if (period && !(*period > 0)) throw PreconditionError("period must be positive");
    auto model = std::make_shared<Model>();
    model->m = static_cast<int>(entries.size());
    model->kind = PotentialKind::diagonal;
    model->period = period;
    model->data = DiagonalModel{std::move(entries)};
    PotentialSpec spec(std::move(model));
    if (period) {
        for (double x : spec.model_->sample_grid()) {
            const CMatrix d = spec.evaluate(x + *period) - spec.evaluate(x);
            const double scale = std::max(1.0, spec.evaluate(x).norm());
            if (d.norm() > hermitian_tol * scale * 10)
                throw PreconditionError("diagonal potential is not periodic with the declared period");
        }
    }
    return spec;
}

PotentialSpec PotentialSpec::fourier_hermitian(const std::map<int, CMatrix>& coefficients,
                                               std::optional<double> period, std::optional<double> kappa) {
    if (coefficients.empty()) throw PreconditionError("fourier potential needs coefficients");
    if (period && !(*period > 0)) throw PreconditionError("period must be positive");
    if (kappa && !(*kappa > 0)) throw PreconditionError("kappa must be positive");
    const Eigen::Index m = coefficients.begin()->second.rows();
    for (const auto& [k, q] : coefficients)
        if (q.rows() != m || q.cols() != m)
            throw PreconditionError("fourier coefficient " + std::to_string(k) + " has inconsistent dimensions");

    FourierModel f;
    f.kappa = kappa ? *kappa : (period ? 2 * pi / *period : 1.0);
    f.q0 = CMatrix::Zero(m, m);
    if (auto it = coefficients.find(0); it != coefficients.end()) {
        check_hermitian(it->second, "fourier coefficient Q_0");
        f.q0 = 0.5 * (it->second + it->second.adjoint());
    }
    std::map<int, CMatrix> positive;
    for (const auto& [k, q] : coefficients) {
        if (k == 0) continue;
        const int kk = std::abs(k);
        const CMatrix as_positive = k > 0 ? q : CMatrix(q.adjoint());
        if (auto it = positive.find(kk); it != positive.end()) {
            const double scale = std::max(1.0, q.norm());
            if ((it->second - as_positive).norm() > hermitian_tol * scale)
                throw PreconditionError("fourier coefficients Q_" + std::to_string(kk) + " and Q_-" +
                                        std::to_string(kk) + " are not adjoint");
        } else {
            positive.emplace(kk, as_positive);
        }
    }
    for (auto& [k, q] : positive) f.positive.emplace_back(k, q);

    auto model = std::make_shared<Model>();
    model->m = static_cast<int>(m);
    model->kind = PotentialKind::fourier_hermitian;
    model->period = period ? period : std::optional<double>(2 * pi / f.kappa);
    model->data = std::move(f);
    PotentialSpec spec(std::move(model));
    if (period && kappa) {
        for (double x : spec.model_->sample_grid()) {
            const CMatrix d = spec.evaluate(x + *period) - spec.evaluate(x);
            if (d.norm() > 1e-10 * std::max(1.0, spec.evaluate(x).norm()))
                throw PreconditionError("fourier potential is not periodic with the declared period");
        }
    }
    return spec;
}

PotentialSpec PotentialSpec::sampled(double x_start, double dx, std::vector<CMatrix> values,
                                     std::optional<double> period) {
    if (!(dx > 0)) throw PreconditionError("sample spacing must be positive");
    if (period && !(*period > 0)) throw PreconditionError("period must be positive");
    const auto n = static_cast<Eigen::Index>(values.size());
    if (n < 4) throw PreconditionError("sampled potential needs at least 4 samples");
    const Eigen::Index m = values.front().rows();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i].rows() != m || values[i].cols() != m)
            throw PreconditionError("sample " + std::to_string(i) + " has inconsistent dimensions");
        check_hermitian(values[i], ("sample " + std::to_string(i)).c_str());
    }
    if (period && std::abs(static_cast<double>(n) * dx - *period) > 1e-9 * *period)
        throw PreconditionError("periodic samples must cover exactly one period (n*dx == period)");

    SampledModel s;
    s.x_start = x_start;
    s.dx = dx;
    s.periodic = period.has_value();
    s.y.resize(n, m * m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index c = 0; c < m; ++c) s.y(i, r * m + c) = values[static_cast<std::size_t>(i)](r, c);

    Eigen::MatrixXcd rhs(n, m * m);
    const double h2 = dx * dx;
    if (s.periodic) {
        for (Eigen::Index i = 0; i < n; ++i)
            rhs.row(i) = 6.0 * (s.y.row((i + 1) % n) - 2.0 * s.y.row(i) + s.y.row((i + n - 1) % n)) / h2;
    } else {
        for (Eigen::Index i = 1; i + 1 < n; ++i)
            rhs.row(i) = 6.0 * (s.y.row(i + 1) - 2.0 * s.y.row(i) + s.y.row(i - 1)) / h2;
        const Eigen::RowVectorXcd slope0 = (-3.0 * s.y.row(0) + 4.0 * s.y.row(1) - s.y.row(2)) / (2 * dx);
        const Eigen::RowVectorXcd slope1 =
            (3.0 * s.y.row(n - 1) - 4.0 * s.y.row(n - 2) + s.y.row(n - 3)) / (2 * dx);
        rhs.row(0) = 6.0 * ((s.y.row(1) - s.y.row(0)) / dx - slope0) / dx;
        rhs.row(n - 1) = 6.0 * (slope1 - (s.y.row(n - 1) - s.y.row(n - 2)) / dx) / dx;
    }
    s.second = solve_spline_system(rhs, s.periodic);

    auto model = std::make_shared<Model>();
    model->m = static_cast<int>(m);
    model->kind = PotentialKind::sampled;
    model->period = period;
    model->data = std::move(s);
    return PotentialSpec(std::move(model));
}

int PotentialSpec::dimension() const noexcept { return model_->m; }
PotentialKind PotentialSpec::kind() const noexcept { return model_->kind; }
std::optional<double> PotentialSpec::period() const noexcept { return model_->period; }

bool PotentialSpec::is_constant() const noexcept {
    if (model_->kind == PotentialKind::constant) return true;
    if (model_->kind == PotentialKind::diagonal) {
        const auto& d = std::get<DiagonalModel>(model_->data);
        return std::all_of(d.entries.begin(), d.entries.end(), [](const ScalarExpr& e) { return e.is_constant(); });
    }
    return false;
}

double PotentialSpec::floquet_period() const {
    if (model_->period) return *model_->period;
    if (is_constant()) return 1.0;
    throw PreconditionError("potential is not periodic");
}

int PotentialSpec::max_derivative_order() const noexcept {
    return model_->kind == PotentialKind::sampled ? 2 : analytic_order_limit;
}

CMatrix PotentialSpec::evaluate(double x, int order) const {
    CMatrix out;
    model_->evaluate(x, order, out);
    return out;
}

void PotentialSpec::evaluate_into(double x, int order, CMatrix& out) const { model_->evaluate(x, order, out); }

double PotentialSpec::min_eigenvalue_bound() const {
    double lo = std::numeric_limits<double>::infinity();
    for (double x : model_->sample_grid()) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(evaluate(x), Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
}

double PotentialSpec::max_deviation_from(double c) const {
    double dev = 0.0;
    const CMatrix shift = CMatrix::Identity(dimension(), dimension()) * c;
    for (double x : model_->sample_grid()) dev = std::max(dev, (evaluate(x) - shift).operatorNorm());
    return dev;
}

HamiltonianCoefficients hamiltonian_coefficients(const PotentialSpec& Q, double x) {
    const Eigen::Index m = Q.dimension();
    const CMatrix Id = CMatrix::Identity(m, m);
    HamiltonianCoefficients h;
    h.J = CMatrix::Zero(2 * m, 2 * m);
    h.J.topRightCorner(m, m) = -Id;
    h.J.bottomLeftCorner(m, m) = Id;
    h.A = CMatrix::Zero(2 * m, 2 * m);
    h.A.topLeftCorner(m, m) = Id;
    h.B = CMatrix::Zero(2 * m, 2 * m);
    h.B.topLeftCorner(m, m) = -Q.evaluate(x);
    h.B.bottomRightCorner(m, m) = Id;
    return h;
}

}  // namespace weylspec
