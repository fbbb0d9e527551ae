#pragma once

#include <optional>
#include <string>
#include <vector>

#include "weylspec/trace_formula.hpp"

namespace weylspec {

enum class ReflectionlessCondition { xi, green, weyl, all };

const char* to_string(ReflectionlessCondition c);

struct ReflectionlessPoint {
    double lambda = 0.0;
    bool valid = false;   ///< false when lambda is outside the spectrum or the evaluation failed
    std::string note;
    int mu = 0;
    double dev_i = 0.0;   ///< ||Xi - I/2||
    double dev_ii = 0.0;  ///< max(||G + G^*||, ||G' + G'^*||) at lambda + i0
    double dev_iii = 0.0; ///< ||M_+ - M_-^*|| at lambda + i0
    double re_defect = 0.0;  ///< ||Re M_+ - Re M_-||
    double im_defect = 0.0;  ///< ||Im M_+ + Im M_-||
    bool pass_i = false;
    bool pass_ii = false;
    bool pass_iii = false;
};

struct ReflectionlessReport {
    ReflectionlessCondition which = ReflectionlessCondition::all;
    double threshold = 5e-3;
    std::vector<ReflectionlessPoint> points;
    double max_i = 0.0;
    double max_ii = 0.0;
    double max_iii = 0.0;
    bool pass_i = false;
    bool pass_ii = false;
    bool pass_iii = false;
    bool passed = false;      ///< every selected condition passes at every valid point
    int split_outcomes = 0;   ///< valid points where the three conditions disagree
    int valid_points = 0;
    double max_re_defect = 0.0;  ///< over points where condition (ii) passes
    double max_im_defect = 0.0;
};

/// `per_band` points in each band of `spectrum`, kept at least `clip` away from every breakpoint.
std::vector<double> reflectionless_grid(const BandSpectrum& spectrum, int per_band = 40, double clip = 1e-3);

/// Evaluates the three reflectionless conditions at each lambda from the boundary values of the
/// Floquet Weyl matrices at x0 (eps schedule adapted to the breakpoints of `spectrum`).
ReflectionlessReport check_reflectionless(const PotentialSpec& Q, double x0, const std::vector<double>& lambda_grid,
                                          const BandSpectrum& spectrum,
                                          ReflectionlessCondition which = ReflectionlessCondition::all,
                                          double threshold = 5e-3, const FloquetOptions& options = {});

enum class BorgOutcome { constant_confirmed, hypotheses_not_met, counterexample_behavior, inconclusive };

const char* to_string(BorgOutcome v);

struct BorgThresholds {
    double condition = 5e-3;
    double reconstruction = 5e-2;
};

struct BorgVerdict {
    double E0 = 0.0;
    double cutoff = 0.0;
    std::vector<std::pair<double, double>> gaps;
    bool uniform_multiplicity = false;
    BandSpectrum spectrum;
    ReflectionlessReport reflectionless;
    std::vector<TraceReconstruction> reconstruction;
    double reconstruction_deviation = 0.0;  ///< max_x ||Q_rec(x) - E0 I||
    double potential_deviation = 0.0;       ///< sup_x ||Q(x) - E0 I|| of the input potential
    BorgOutcome verdict = BorgOutcome::inconclusive;
    std::string reason;
};

struct BorgOptions {
    BorgThresholds thresholds{};
    int per_band = 40;
    double points_per_unit = 20.0;  ///< band scan density
    FloquetOptions floquet{};
    TraceOptions trace{};
};

/// Band scan, multiplicity check, reflectionless test and trace-formula reconstruction on x_grid.
BorgVerdict borg_verify(const PotentialSpec& Q, double cutoff, const std::vector<double>& x_grid,
                        const BorgOptions& options = {});

}  // namespace weylspec
