#pragma once

#include <optional>
#include <string>
#include <vector>

#include "foldcert/continuation.hpp"
#include "foldcert/energy.hpp"

namespace foldcert {

struct OdeConfig {
    double ode_tol = 1e-6;     // local error target (step-doubling estimate)
    double initial_dt = 1e-4;
    double min_dt = 1e-13;
    double max_dt = 0.05;
    double het_tol = 1e-9;     // inner flow stops when |f| <= het_tol
    double s_max = 1e6;        // inner flow horizon
    double escape_radius = 1e6;
    double jump_offset = 1e-4;           // delta in x_fold + delta*(1+|x|)*v
    double stability_threshold = 1e-8;   // eigenvalue real-part threshold
    double jump_window_coefficient = 5.0;  // w(eps) = c * eps * log10(1/eps)
    NewtonConfig newton;
    StepConfig step;  // branch tracing inside build_limit_curve
};

/// Time-sampled trajectory of eps x' + f(x,t) = 0 (or of the inner flow
/// theta' + f(theta, t_frozen) = 0 when inner_flow is set, with `times`
/// holding the inner parameter s).
struct FlowTrace {
    double epsilon = 0.0;
    bool inner_flow = false;
    std::vector<double> times;
    std::vector<Vec> states;
    int accepted = 0;
    int rejected = 0;
    long newton_iters = 0;
};

/// Implicit Euler with adaptive steps: solve
///   x_{k+1} + (dt/eps) f(x_{k+1}, t_{k+1}) = x_k
/// by Newton; halve on Newton failure; local error controlled by the
/// step-doubling estimate against ode_tol. Throws Error(NoConvergence)
/// wrapped statuses only for hard failures (step underflow).
FlowTrace integrate_eps_flow(const ProblemSpec& p, const Vec& x0, double eps,
                             std::pair<double, double> t_span,
                             const OdeConfig& cfg = {});

enum class Stability { Stable, Unstable, Degenerate };
const char* to_string(Stability s);

/// Classifies an equilibrium of theta' = -f(theta, t) by the spectrum of
/// D_x f: stable when every eigenvalue real part exceeds the threshold.
Stability classify_equilibrium(const ProblemSpec& p, const Vec& x, double t,
                               double threshold = 1e-8);

struct InnerFlowResult {
    FlowTrace trace;
    Vec endpoint;
    Stability stability = Stability::Degenerate;
    double final_residual = 0.0;
    bool converged = false;    // |f| <= het_tol reached before s_max
    std::string note;          // escape / horizon / step underflow
};

/// Integrates the frozen-time gradient flow until |f(theta, t)| <= het_tol
/// or the horizon s_max; escape and stalling are reported in the result,
/// not thrown.
InnerFlowResult inner_gradient_flow(const ProblemSpec& p, double t_frozen,
                                    const Vec& theta0, const OdeConfig& cfg = {});

struct LimitSegment {
    BranchCurve branch;
    Stability stability = Stability::Degenerate;
    double t_begin = 0.0;
    double t_end = 0.0;
};

struct LimitJump {
    double t_jump = 0.0;
    Vec x_minus;       // fold point
    Vec x_plus;        // landing equilibrium (Newton-polished)
    FlowTrace inner_trace;
    Vec heteroclinic_endpoint;  // raw inner-flow endpoint
};

/// The eps -> 0 limit candidate: equilibrium branches joined by
/// heteroclinic jumps at transversal folds.
struct LimitCurve {
    std::vector<LimitSegment> segments;
    std::vector<LimitJump> jumps;

    /// Piecewise branch value at time t (segments partition the span).
    Vec value_at(double t) const;
};

/// Settles x_init by the inner flow, follows the equilibrium branch across
/// t_span, and at each transversal fold terminating the branch launches the
/// inner flow from x_fold +- delta * v (both signs; the escaping sign is
/// selected). Throws Error(NonTransversalFold) at a non-transversal fold and
/// Error(NoAttractorFound) when no jump target exists or both seeds settle
/// back.
LimitCurve build_limit_curve(const ProblemSpec& p, const Vec& x_init,
                             std::pair<double, double> t_span,
                             const OdeConfig& cfg = {});

struct ConvergenceRow {
    double eps = 0.0;
    double sup_distance = 0.0;       // off-jump sup distance to the limit
    double observed_jump_time = 0.0; // NaN when the limit has no jump
};

/// For each eps: integrate, then take the sup over accepted times of the
/// distance to the limit curve, excluding |t - t_jump| < w(eps) with
/// w(eps) = c * eps * log10(1/eps) around every jump. eps runs execute on a
/// parallel map.
std::vector<ConvergenceRow> convergence_study(const ProblemSpec& p, const Vec& x_init,
                                              std::pair<double, double> t_span,
                                              const std::vector<double>& eps_list,
                                              const OdeConfig& cfg = {});

/// First crossing time of the hyperplane through the midpoint of
/// [x_minus, x_plus] (linearly interpolated); NaN when never crossed.
double observed_jump_time(const FlowTrace& trace, const Vec& x_minus, const Vec& x_plus);

}  // namespace foldcert
