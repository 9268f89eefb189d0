#pragma once

#include <utility>
#include <vector>

#include "foldcert/transversality.hpp"

namespace foldcert {

struct NewtonConfig {
    int max_iter = 50;
    double abs_tol = 1e-12;       // scaled: converged when |F| <= abs_tol*(1+|x|)
    double damping_factor = 0.5;  // backtracking factor
    double min_damping = 9.5367431640625e-7;  // 2^-20
    double tikhonov = 0.0;        // > 0 enables (J^T J + lambda I) steps
    double trust_radius = 1e6;    // iterates leaving |x - x0| > radius diverge
    bool record_history = false;
    // Solve steps through near-singular Jacobians instead of reporting
    // SingularJacobian; the merit line search guards the step quality.
    // Used by refinement solvers whose systems degenerate at the target.
    bool allow_ill_conditioned = false;
};

enum class SolveStatus {
    Converged,
    MaxIterExceeded,
    SingularJacobian,
    Diverged,
    SingularBorderedSystem,
};

const char* to_string(SolveStatus s);

struct NewtonResult {
    SolveStatus status = SolveStatus::MaxIterExceeded;
    Vec x;
    int iterations = 0;
    double residual_norm = 0.0;
    std::vector<Vec> history;  // filled when record_history

    bool ok() const { return status == SolveStatus::Converged; }
};

/// Newton iteration on F(., t) = 0 at fixed t, with backtracking on the
/// |F|^2 merit function.
NewtonResult newton_fixed_t(const ProblemSpec& p, double t, const Vec& x_init,
                            const NewtonConfig& cfg = {});

/// Axis-aligned box for multistart enumeration.
struct Box {
    std::vector<std::pair<double, double>> axes;

    static Box cube(int dim, double lo, double hi);
    int dim() const { return static_cast<int>(axes.size()); }
};

/// Deduplicated zeros of F(., t) obtained from a grid of Newton starts.
struct ZeroSetSection {
    double t = 0.0;
    std::vector<Vec> zeros;       // sorted lexicographically
    std::vector<double> residuals;
    double min_pairwise_separation = 0.0;  // +inf when fewer than 2 zeros
    int multistart_count = 0;
    int failed_starts = 0;
};

/// Deduplication threshold: roots closer than sep_tol(x) merge.
double sep_tol(const Vec& x);

/// Newton launched from every node of a grid_density^n grid over the box.
/// Per-start failures are tallied, never fatal. Runs the starts on a
/// parallel map; the merged result is deterministic (sorted).
ZeroSetSection enumerate_section(const ProblemSpec& p, double t, const Box& box,
                                 int grid_density, const NewtonConfig& cfg = {});

/// Same enumeration from an explicit list of starting points.
ZeroSetSection enumerate_from_starts(const ProblemSpec& p, double t,
                                     const std::vector<Vec>& starts,
                                     const NewtonConfig& cfg = {});

struct AugmentedResult {
    SolveStatus status = SolveStatus::MaxIterExceeded;
    AugmentedPoint q;
    int iterations = 0;
    double residual_norm = 0.0;

    bool ok() const { return status == SolveStatus::Converged; }
};

/// Bordered Newton for the square system
///   (F(x,t), D_x F(x,t)[v], |v|^2 - 1) = 0
/// in the unknowns (x, t, v) in R^{2n+1}. The returned v is normalized
/// post-hoc. A singular bordered Jacobian is reported as
/// SingularBorderedSystem (the bordered system is regular precisely near
/// transversal folds).
AugmentedResult newton_augmented(const ProblemSpec& p, const AugmentedPoint& q_init,
                                 const NewtonConfig& cfg = {});

}  // namespace foldcert
