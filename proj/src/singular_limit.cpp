#include "foldcert/singular_limit.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "foldcert/detail/newton_core.hpp"
#include "foldcert/parallel.hpp"

namespace foldcert {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct StepOutcome {
    bool ok = false;
    Vec x;
    int newton_iters = 0;
};

/// One implicit Euler substep: solve z + gamma f(z, t_next) = x_prev with
/// gamma = dt/eps.
StepOutcome implicit_euler_step(const ProblemSpec& p, const Vec& x_prev, double t_next,
                                double gamma, const NewtonConfig& ncfg) {
    auto residual = [&](const Vec& z) {
        return Vec(z + gamma * eval(p, Point{z, t_next}) - x_prev);
    };
    auto jacobian = [&](const Vec& z) {
        return Mat(Mat::Identity(p.dim, p.dim) + gamma * jacobian_x(p, Point{z, t_next}));
    };
    NewtonConfig cfg = ncfg;
    cfg.max_iter = std::min(cfg.max_iter, 30);
    detail::CoreResult core =
        detail::damped_newton(residual, jacobian, x_prev, cfg, SolveStatus::SingularJacobian);
    StepOutcome out;
    out.newton_iters = core.iterations;
    if (core.status == SolveStatus::Converged) {
        out.ok = true;
        out.x = core.u;
    }
    return out;
}

double step_factor(double err, double tol) {
    const double f = 0.9 * std::sqrt(tol / std::max(err, 1e-300));
    return std::clamp(f, 0.2, 5.0);
}

}  // namespace

FlowTrace integrate_eps_flow(const ProblemSpec& p, const Vec& x0, double eps,
                             std::pair<double, double> t_span, const OdeConfig& cfg) {
    if (!(eps > 0.0)) raise(ErrorKind::Usage, "integrate_eps_flow: eps must be > 0");
    if (!(t_span.first < t_span.second))
        raise(ErrorKind::Usage, "integrate_eps_flow: empty t-span");
    check_in_domain(p, Point{x0, t_span.first});
    if (!p.in_t_range(t_span.second))
        raise(ErrorKind::Domain, p.name + ": t-span end outside the domain");

    FlowTrace trace;
    trace.epsilon = eps;
    trace.times.push_back(t_span.first);
    trace.states.push_back(x0);

    double t = t_span.first;
    Vec x = x0;
    double dt = std::min(cfg.initial_dt, cfg.max_dt);

    while (t < t_span.second - 1e-14 * (1.0 + std::abs(t_span.second))) {
        dt = std::min(dt, t_span.second - t);
        const double tol = cfg.ode_tol * (1.0 + x.norm());

        const StepOutcome full = implicit_euler_step(p, x, t + dt, dt / eps, cfg.newton);
        StepOutcome h1, h2;
        if (full.ok) {
            h1 = implicit_euler_step(p, x, t + dt / 2.0, dt / (2.0 * eps), cfg.newton);
            if (h1.ok)
                h2 = implicit_euler_step(p, h1.x, t + dt, dt / (2.0 * eps), cfg.newton);
        }
        trace.newton_iters += full.newton_iters + h1.newton_iters + h2.newton_iters;

        if (!full.ok || !h1.ok || !h2.ok) {
            dt *= 0.5;
            ++trace.rejected;
            if (dt < cfg.min_dt)
                raise(ErrorKind::NoConvergence,
                      p.name + ": NewtonFailureInStep, StepUnderflow at t = " +
                          std::to_string(t));
            continue;
        }

        const double err = (full.x - h2.x).norm();
        if (err <= tol) {
            t += dt;
            x = h2.x;
            trace.times.push_back(t);
            trace.states.push_back(x);
            ++trace.accepted;
            dt = std::min(dt * step_factor(err, tol), cfg.max_dt);
        } else {
            ++trace.rejected;
            dt *= step_factor(err, tol);
            if (dt < cfg.min_dt)
                raise(ErrorKind::NoConvergence,
                      p.name + ": StepUnderflow (error control) at t = " +
                          std::to_string(t));
        }
    }
    return trace;
}

const char* to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::Unstable: return "unstable";
        case Stability::Degenerate: return "degenerate";
    }
    return "?";
}

Stability classify_equilibrium(const ProblemSpec& p, const Vec& x, double t,
                               double threshold) {
    const Mat J = jacobian_x(p, Point{x, t});
    Eigen::EigenSolver<Mat> eig(J);
    double min_re = std::numeric_limits<double>::infinity();
    for (int i = 0; i < J.rows(); ++i)
        min_re = std::min(min_re, eig.eigenvalues()(i).real());
    // Flow matrix is -D_x f: decay requires every eigenvalue of D_x f to
    // have positive real part.
    if (min_re > threshold) return Stability::Stable;
    if (min_re < -threshold) return Stability::Unstable;
    return Stability::Degenerate;
}

InnerFlowResult inner_gradient_flow(const ProblemSpec& p, double t_frozen,
                                    const Vec& theta0, const OdeConfig& cfg) {
    check_in_domain(p, Point{theta0, t_frozen});

    InnerFlowResult out;
    out.trace.epsilon = 0.0;
    out.trace.inner_flow = true;

    double s = 0.0;
    Vec theta = theta0;
    out.trace.times.push_back(s);
    out.trace.states.push_back(theta);

    double ds = cfg.initial_dt;
    const double inner_max_step = std::max(cfg.max_dt, cfg.s_max / 100.0);

    for (;;) {
        out.final_residual = eval(p, Point{theta, t_frozen}).norm();
        if (out.final_residual <= cfg.het_tol) {
            out.converged = true;
            break;
        }
        if (s >= cfg.s_max) {
            out.note = "horizon s_max reached";
            break;
        }
        if (theta.norm() > cfg.escape_radius) {
            out.note = "escape radius exceeded";
            break;
        }

        const double tol = cfg.ode_tol * (1.0 + theta.norm());
        const StepOutcome full = implicit_euler_step(p, theta, t_frozen, ds, cfg.newton);
        StepOutcome h1, h2;
        if (full.ok) {
            h1 = implicit_euler_step(p, theta, t_frozen, ds / 2.0, cfg.newton);
            if (h1.ok) h2 = implicit_euler_step(p, h1.x, t_frozen, ds / 2.0, cfg.newton);
        }
        out.trace.newton_iters += full.newton_iters + h1.newton_iters + h2.newton_iters;

        if (!full.ok || !h1.ok || !h2.ok) {
            ds *= 0.5;
            ++out.trace.rejected;
            if (ds < cfg.min_dt) {
                out.note = "step underflow";
                break;
            }
            continue;
        }
        const double err = (full.x - h2.x).norm();
        if (err <= tol) {
            s += ds;
            theta = h2.x;
            out.trace.times.push_back(s);
            out.trace.states.push_back(theta);
            ++out.trace.accepted;
            ds = std::min(ds * step_factor(err, tol), inner_max_step);
        } else {
            ++out.trace.rejected;
            ds *= step_factor(err, tol);
            if (ds < cfg.min_dt) {
                out.note = "step underflow";
                break;
            }
        }
    }

    out.endpoint = theta;
    out.stability = classify_equilibrium(p, theta, t_frozen, cfg.stability_threshold);
    return out;
}

Vec LimitCurve::value_at(double t) const {
    if (segments.empty())
        raise(ErrorKind::Internal, "LimitCurve::value_at on empty curve");
    const LimitSegment* seg = nullptr;
    for (const auto& s : segments) {
        const double lo = std::min(s.t_begin, s.t_end);
        const double hi = std::max(s.t_begin, s.t_end);
        if (t >= lo - 1e-12 && t <= hi + 1e-12) {
            seg = &s;
            break;
        }
    }
    if (!seg) {
        // Clamp to the nearest segment end.
        const LimitSegment& first = segments.front();
        const LimitSegment& last = segments.back();
        const double lo = std::min(first.t_begin, first.t_end);
        const double hi = std::max(last.t_begin, last.t_end);
        seg = (std::abs(t - lo) < std::abs(t - hi)) ? &first : &last;
    }

    const auto& nodes = seg->branch.nodes;
    if (nodes.size() == 1) return nodes.front().x;
    // Nodes are t-monotone within a segment; walk to the enclosing pair.
    const bool increasing = nodes.back().t >= nodes.front().t;
    std::size_t k = 0;
    for (; k + 1 < nodes.size(); ++k) {
        const double t1 = nodes[k + 1].t;
        if (increasing ? (t <= t1) : (t >= t1)) break;
    }
    if (k + 1 >= nodes.size()) k = nodes.size() - 2;
    const double t0 = nodes[k].t, t1 = nodes[k + 1].t;
    const double denom = t1 - t0;
    double w = (std::abs(denom) < 1e-300) ? 0.0 : (t - t0) / denom;
    w = std::clamp(w, 0.0, 1.0);
    return Vec(nodes[k].x + w * (nodes[k + 1].x - nodes[k].x));
}

namespace {

/// Truncates a traced curve to the part before the refined fold and appends
/// the fold point as the final node.
BranchCurve cut_at_fold(const ProblemSpec& p, const BranchCurve& curve, int last_index,
                        const FoldRecord& fold, const StepConfig& step) {
    BranchCurve seg;
    for (int i = 0; i <= last_index; ++i) {
        seg.nodes.push_back(curve.nodes[i]);
        seg.tangents.push_back(curve.tangents[i]);
        seg.classifications.push_back(curve.classifications[i]);
        seg.arclength.push_back(curve.arclength[i]);
    }
    Vec tau = Vec::Zero(p.dim + 1);
    const Mat dF = total_differential(p, fold.point);
    Eigen::JacobiSVD<Mat> svd(dF, Eigen::ComputeFullV);
    tau = svd.matrixV().col(p.dim);
    if (!seg.tangents.empty() && tau.dot(seg.tangents.back()) < 0.0) tau = -tau;
    Vec prev(p.dim + 1);
    prev.head(p.dim) = seg.nodes.back().x;
    prev(p.dim) = seg.nodes.back().t;
    Vec cur(p.dim + 1);
    cur.head(p.dim) = fold.point.x;
    cur(p.dim) = fold.point.t;
    seg.nodes.push_back(fold.point);
    seg.tangents.push_back(tau);
    seg.classifications.push_back(NodeClass::NearSingular);
    seg.arclength.push_back(seg.arclength.back() + (cur - prev).norm());
    seg.termination = "fold";
    (void)step;
    return seg;
}

}  // namespace

LimitCurve build_limit_curve(const ProblemSpec& p, const Vec& x_init,
                             std::pair<double, double> t_span, const OdeConfig& cfg) {
    const double ta = t_span.first, tb = t_span.second;
    if (ta == tb) raise(ErrorKind::Usage, "build_limit_curve: empty t-span");
    const int dir = (tb > ta) ? +1 : -1;
    if (!p.in_t_range(ta) || !p.in_t_range(tb))
        raise(ErrorKind::Domain, p.name + ": t-span outside the domain");

    // Settle onto an equilibrium of f(., ta).
    InnerFlowResult settle = inner_gradient_flow(p, ta, x_init, cfg);
    if (!settle.converged)
        raise(ErrorKind::NoAttractorFound,
              p.name + ": initial state failed to settle (" + settle.note + ")");
    NewtonResult polish = newton_fixed_t(p, ta, settle.endpoint, cfg.newton);
    if (!polish.ok())
        raise(ErrorKind::NoAttractorFound, p.name + ": could not polish the settled start");

    LimitCurve limit;
    Vec x_cur = polish.x;
    double t_cur = ta;

    StepConfig step = cfg.step;
    step.stop_after_fold = true;
    step.t_stop_min = std::min(ta, tb);
    step.t_stop_max = std::max(ta, tb);

    for (int guard = 0; guard < 64; ++guard) {
        BranchCurve curve = trace_branch(p, Point{x_cur, t_cur}, dir, step);

        if (curve.termination == "t_stop" || curve.termination == "max_nodes" ||
            curve.termination == "finished" || curve.termination == "domain_boundary") {
            const bool reached_end = curve.termination == "t_stop";
            LimitSegment seg;
            seg.branch = std::move(curve);
            seg.stability = classify_equilibrium(p, x_cur, t_cur, cfg.stability_threshold);
            seg.t_begin = t_cur;
            seg.t_end = tb;
            limit.segments.push_back(std::move(seg));
            if (!reached_end && limit.segments.back().branch.nodes.size() < 2)
                raise(ErrorKind::NoConvergence, p.name + ": branch trace stalled");
            return limit;
        }

        if (curve.termination == "step_underflow" || curve.termination == "closed_loop" ||
            curve.termination == "rank_deficient_point")
            raise(ErrorKind::NoConvergence,
                  p.name + ": branch trace terminated (" + curve.termination + ")");

        // termination == "fold_passed"
        const auto brackets = detect_folds(curve);
        if (brackets.empty())
            raise(ErrorKind::Internal, "fold_passed without a bracket");
        const auto bracket = brackets.back();
        FoldRecord fold = refine_fold(p, curve, bracket, step);

        if ((dir > 0 && fold.point.t > tb) || (dir < 0 && fold.point.t < tb)) {
            // Fold beyond the requested span: finish at tb.
            LimitSegment seg;
            seg.branch = std::move(curve);
            seg.stability = classify_equilibrium(p, x_cur, t_cur, cfg.stability_threshold);
            seg.t_begin = t_cur;
            seg.t_end = tb;
            limit.segments.push_back(std::move(seg));
            return limit;
        }

        if (fold.certificate.classification != Classification::TransversalSingular)
            raise(ErrorKind::NonTransversalFold,
                  p.name + ": fold at t = " + std::to_string(fold.point.t) +
                      " is not transversal (" +
                      to_string(fold.certificate.classification) + ")");

        LimitSegment seg;
        seg.branch = cut_at_fold(p, curve, bracket.first, fold, step);
        seg.stability = classify_equilibrium(p, x_cur, t_cur, cfg.stability_threshold);
        seg.t_begin = t_cur;
        seg.t_end = fold.point.t;
        limit.segments.push_back(std::move(seg));

        // Heteroclinic jump: both kernel directions tried, the escaping one
        // is selected; settling back on both sides means there is nothing to
        // jump to.
        const double delta = cfg.jump_offset * (1.0 + fold.point.x.norm());
        const Vec& v = fold.certificate.kernel.v;
        struct Candidate {
            bool escaped = false;
            InnerFlowResult flow;
        };
        Candidate cands[2];
        for (int k = 0; k < 2; ++k) {
            const double sign = (k == 0) ? 1.0 : -1.0;
            Vec seed = fold.point.x + sign * delta * v;
            cands[k].flow = inner_gradient_flow(p, fold.point.t, seed, cfg);
            cands[k].escaped = cands[k].flow.converged &&
                               (cands[k].flow.endpoint - fold.point.x).norm() > 50.0 * delta;
        }
        int chosen = -1;
        if (cands[0].escaped && cands[1].escaped) {
            if ((cands[0].flow.endpoint - cands[1].flow.endpoint).norm() <=
                sep_tol(cands[0].flow.endpoint))
                chosen = 0;
            else
                raise(ErrorKind::NoAttractorFound,
                      p.name + ": ambiguous jump (both kernel directions escape)");
        } else if (cands[0].escaped) {
            chosen = 0;
        } else if (cands[1].escaped) {
            chosen = 1;
        } else {
            raise(ErrorKind::NoAttractorFound,
                  p.name + ": no attractor past the fold at t = " +
                      std::to_string(fold.point.t) +
                      " (both jump seeds settle back or fail)");
        }

        NewtonResult land =
            newton_fixed_t(p, fold.point.t, cands[chosen].flow.endpoint, cfg.newton);
        if (!land.ok())
            raise(ErrorKind::NoAttractorFound,
                  p.name + ": jump endpoint failed to polish");

        LimitJump jump;
        jump.t_jump = fold.point.t;
        jump.x_minus = fold.point.x;
        jump.x_plus = land.x;
        jump.heteroclinic_endpoint = cands[chosen].flow.endpoint;
        jump.inner_trace = std::move(cands[chosen].flow.trace);
        limit.jumps.push_back(std::move(jump));

        x_cur = land.x;
        t_cur = fold.point.t;
    }
    raise(ErrorKind::Internal, "build_limit_curve: segment guard exceeded");
}

double observed_jump_time(const FlowTrace& trace, const Vec& x_minus, const Vec& x_plus) {
    Vec dir = x_plus - x_minus;
    const double dn = dir.norm();
    if (dn < 1e-300 || trace.times.empty()) return kNaN;
    dir /= dn;
    const Vec mid = 0.5 * (x_minus + x_plus);
    double prev_s = (trace.states.front() - mid).dot(dir);
    if (prev_s >= 0.0) return trace.times.front();
    for (std::size_t k = 1; k < trace.times.size(); ++k) {
        const double s = (trace.states[k] - mid).dot(dir);
        if (s >= 0.0) {
            const double w = (0.0 - prev_s) / (s - prev_s);
            return trace.times[k - 1] + w * (trace.times[k] - trace.times[k - 1]);
        }
        prev_s = s;
    }
    return kNaN;
}

std::vector<ConvergenceRow> convergence_study(const ProblemSpec& p, const Vec& x_init,
                                              std::pair<double, double> t_span,
                                              const std::vector<double>& eps_list,
                                              const OdeConfig& cfg) {
    const LimitCurve limit = build_limit_curve(p, x_init, t_span, cfg);

    std::vector<ConvergenceRow> rows(eps_list.size());
    std::vector<std::string> errors(eps_list.size());
    parallel_for_index(eps_list.size(), [&](std::size_t i) {
        const double eps = eps_list[i];
        rows[i].eps = eps;
        rows[i].sup_distance = kNaN;
        rows[i].observed_jump_time = kNaN;
        try {
            const FlowTrace trace = integrate_eps_flow(p, x_init, eps, t_span, cfg);
            const double window =
                cfg.jump_window_coefficient * eps * std::log10(1.0 / eps);
            double sup = 0.0;
            for (std::size_t k = 0; k < trace.times.size(); ++k) {
                const double t = trace.times[k];
                bool excluded = false;
                for (const auto& j : limit.jumps)
                    if (std::abs(t - j.t_jump) < window) excluded = true;
                if (excluded) continue;
                sup = std::max(sup, (trace.states[k] - limit.value_at(t)).norm());
            }
            rows[i].sup_distance = sup;
            if (!limit.jumps.empty())
                rows[i].observed_jump_time = observed_jump_time(
                    trace, limit.jumps.front().x_minus, limit.jumps.front().x_plus);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!errors[i].empty())
            raise(ErrorKind::NoConvergence,
                  "convergence_study (eps = " + std::to_string(eps_list[i]) +
                      "): " + errors[i]);
    return rows;
}

}  // namespace foldcert
