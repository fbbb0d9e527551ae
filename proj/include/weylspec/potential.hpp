#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "weylspec/scalar_expr.hpp"
#include "weylspec/types.hpp"

namespace weylspec {

enum class PotentialKind { constant, diagonal, fourier_hermitian, sampled };

const char* to_string(PotentialKind kind);

/// Hermitian m x m potential Q(x) with analytic (or spline) derivatives.
///
/// Instances are immutable and cheap to copy; all evaluation methods are safe to call
/// concurrently.
class PotentialSpec {
public:
    /// Q(x) = C. `C` must be Hermitian within 1e-12.
    static PotentialSpec constant(const CMatrix& C, std::optional<double> period = {});
    /// Q(x) = c * I_m.
    static PotentialSpec constant(int m, double c, std::optional<double> period = {});
    /// Q(x) = diag(q_1(x), ..., q_m(x)).
    static PotentialSpec diagonal(std::vector<ScalarExpr> entries, std::optional<double> period = {});
    /// Q(x) = sum_k Q_k exp(i k kappa x) with Q_{-k} = Q_k^*. Either half of each conjugate pair
    /// may be supplied; if both are given they must be exact adjoints. kappa defaults to
    /// 2 pi / period, and period to 2 pi / kappa.
    static PotentialSpec fourier_hermitian(const std::map<int, CMatrix>& coefficients,
                                           std::optional<double> period = {},
                                           std::optional<double> kappa = {});
    /// Cubic-spline interpolation of samples at x_start + i*dx. With a period the samples must
    /// cover exactly one period [x_start, x_start + period) and the spline is periodic;
    /// otherwise it is clamped with second-order one-sided end slopes.
    static PotentialSpec sampled(double x_start, double dx, std::vector<CMatrix> values,
                                 std::optional<double> period = {});

    int dimension() const noexcept;
    PotentialKind kind() const noexcept;
    std::optional<double> period() const noexcept;

    /// True when Q is x-independent.
    bool is_constant() const noexcept;
    /// True when Q is x-independent or has a declared period.
    bool is_periodic() const noexcept { return period().has_value() || is_constant(); }
    /// Period used by Floquet machinery: the declared period, or 1 for x-independent Q.
    double floquet_period() const;

    /// Highest derivative order evaluate() supports (large for analytic kinds).
    int max_derivative_order() const noexcept;

    /// Q^{(order)}(x).
    CMatrix evaluate(double x, int order = 0) const;
    /// Same as evaluate() but writes into `out` (resized if needed).
    void evaluate_into(double x, int order, CMatrix& out) const;

    /// inf_x of the smallest eigenvalue of Q(x), sampled over one period (or the sample grid).
    double min_eigenvalue_bound() const;
    /// sup_x ||Q(x) - c I|| over the same sampling.
    double max_deviation_from(double c) const;

    struct Model;

private:
    explicit PotentialSpec(std::shared_ptr<const Model> model) : model_(std::move(model)) {}
    std::shared_ptr<const Model> model_;
};

/// Coefficient matrices of the first-order system J psi' = (z A + B(x)) psi.
struct HamiltonianCoefficients {
    CMatrix J;  ///< [[0, -I], [I, 0]]
    CMatrix A;  ///< [[I, 0], [0, 0]]
    CMatrix B;  ///< [[-Q(x), 0], [0, I]]
};

HamiltonianCoefficients hamiltonian_coefficients(const PotentialSpec& Q, double x);

/// ||M - M^*|| (Frobenius).
double hermitian_defect(const CMatrix& M);

}  // namespace weylspec
