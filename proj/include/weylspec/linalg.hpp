#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "weylspec/types.hpp"

namespace weylspec {

/// Complex Schur form A = U T U^* with the eigenvalues satisfying `select` moved to the
/// leading diagonal positions (relative order otherwise preserved).
struct OrderedSchur {
    CMatrix T;
    CMatrix U;
    int selected = 0;
};

OrderedSchur ordered_schur(const CMatrix& A, const std::function<bool(cplx)>& select);

/// Principal square root of an upper-triangular matrix whose diagonal avoids (-inf, 0].
CMatrix triangular_sqrt(const CMatrix& T);

/// Reciprocal 1-norm condition estimate of a square matrix (0 if exactly singular).
double reciprocal_condition(const CMatrix& A);

/// Solves A X = B, raising SingularityError when rcond(A) < min_rcond.
CMatrix solve_checked(const CMatrix& A, const CMatrix& B, const std::string& what, double min_rcond = 1e-14);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Matrix 1-norm.
double norm1(const CMatrix& A);

/// Result of polynomial extrapolation to h = 0.
struct Extrapolated {
    CMatrix value;
    double residual = 0.0;  ///< size of the correction accepted at the chosen tableau entry
};

/// Neville-tableau extrapolation of values[i] sampled at steps h[i] (decreasing) to h = 0,
/// assuming a smooth expansion in powers of h. The entry with the smallest local correction
/// is returned. A single sample is returned unchanged with zero residual.
Extrapolated richardson(const std::vector<double>& h, const std::vector<CMatrix>& values, int max_order = 4);

/// Number of worker threads used by parallel grids.
int worker_count();
/// Sets the worker count; values < 1 select the hardware concurrency.
void set_worker_count(int workers);

/// Evaluates f(0), ..., f(n-1) on up to worker_count() threads and returns the results in
/// index order. The first exception thrown by any call is rethrown after all workers stop.
template <class F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    const auto workers = static_cast<std::size_t>(std::max(1, worker_count()));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    if (workers <= 1 || n <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        const std::size_t count = std::min(workers, n);
        for (std::size_t t = 0; t < count; ++t) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace weylspec
