#pragma once

#include <optional>
#include <string>
#include <vector>

#include "foldcert/solve.hpp"

namespace foldcert {

struct StepConfig {
    double initial_step = 0.01;
    double min_step = 1e-10;
    double max_step = 0.1;
    double grow_factor = 1.3;
    int grow_after = 3;          // consecutive successes before growing
    int max_nodes = 20000;
    double curve_tol = 1e-9;     // scaled like zero_tol
    double fold_tol = 1e-8;      // |tangent t-component| at a refined fold
    NewtonConfig newton;
    TolPolicy tols;
    bool stop_after_fold = false;         // stop once the tangent t-sign flips
    std::optional<double> t_stop_min;     // early termination bounds
    std::optional<double> t_stop_max;
};

enum class NodeClass { Regular, NearSingular };

struct FoldRecord {
    Point point;
    TransversalityCertificate certificate;
    double tdot = 0.0;            // |dt/ds| at the fold
    double tddot_estimate = 0.0;  // d^2 t/ds^2, NaN when ill-defined
    int side = 0;                 // +1: branches on t > t0, -1: t < t0, 0: mixed
    bool bordered_converged = false;  // augmented Newton vs bisection fallback
};

/// Discretized arc of the zero set with unit tangents in the product norm
/// |(dx, dt)|^2 = |dx|^2 + dt^2, consistently oriented.
struct BranchCurve {
    std::vector<Point> nodes;
    std::vector<Vec> tangents;             // length n+1, last entry = t-component
    std::vector<NodeClass> classifications;
    std::vector<double> arclength;         // cumulative
    std::vector<FoldRecord> folds;
    std::string termination;

    int size() const { return static_cast<int>(nodes.size()); }
    double tangent_t(int i) const { return tangents[i](tangents[i].size() - 1); }
};

/// Pseudo-arclength predictor/corrector tracing from an on-curve start.
/// Throws Error(StartNotOnCurve) when |F(start)| > curve_tol and
/// Error(RankDeficientStart) when the total differential at the start has
/// rank < n. direction = +-1 picks the initial orientation of the tangent's
/// t-component (falls back to the first x-component on a vertical start).
BranchCurve trace_branch(const ProblemSpec& p, const Point& start, int direction,
                         const StepConfig& cfg = {});

/// Indices (i, i+1) of consecutive nodes whose tangent t-components change
/// sign.
std::vector<std::pair<int, int>> detect_folds(const BranchCurve& curve);

/// Refines one bracket: augmented Newton from the bracket midpoint with the
/// kernel estimate as v-seed; falls back to tangent bisection along the
/// curve when the bordered solve fails (non-transversal points). Attaches
/// the certificate and the fold geometry (tdot, tddot by symmetric
/// difference of t(s) through the refined point, side).
FoldRecord refine_fold(const ProblemSpec& p, const BranchCurve& curve,
                       std::pair<int, int> bracket, const StepConfig& cfg = {});

/// detect + refine, deduplicated by fold location.
std::vector<FoldRecord> refine_all_folds(const ProblemSpec& p,
                                         const BranchCurve& curve,
                                         const StepConfig& cfg = {});

struct SeparationFit {
    double exponent = 0.0;
    std::vector<double> offsets_used;
    std::vector<double> distances;
};

/// Measures the distance between the two zeros that merge at a transversal
/// fold, at parameter offsets t0 +- dt on the existence side, and fits
/// log(distance) ~ exponent * log(dt). Throws Error(InsufficientData) when
/// fewer than 3 offsets resolve two distinct zeros.
SeparationFit quadratic_separation_check(const ProblemSpec& p,
                                         const FoldRecord& fold,
                                         const std::vector<double>& offsets,
                                         const StepConfig& cfg = {});

/// Fold scan used by the CLI and the genericity experiment: enumerates
/// sections at the ends (and middle) of the t-window, traces every root,
/// and refines/certifies all detected folds, deduplicated across traces.
struct ScanConfig {
    Box box;
    double t_lo = 0.0;
    double t_hi = 0.0;
    int grid_density = 9;
    StepConfig step;
};

std::vector<FoldRecord> scan_folds(const ProblemSpec& p, const ScanConfig& scan);

}  // namespace foldcert
