#include "foldcert/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "foldcert/detail/newton_core.hpp"
#include "foldcert/parallel.hpp"

namespace foldcert {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "Converged";
        case SolveStatus::MaxIterExceeded: return "MaxIterExceeded";
        case SolveStatus::SingularJacobian: return "SingularJacobian";
        case SolveStatus::Diverged: return "Diverged";
        case SolveStatus::SingularBorderedSystem: return "SingularBorderedSystem";
    }
    return "?";
}

NewtonResult newton_fixed_t(const ProblemSpec& p, double t, const Vec& x_init,
                            const NewtonConfig& cfg) {
    check_in_domain(p, Point{x_init, t});
    auto residual = [&](const Vec& x) { return eval(p, Point{x, t}); };
    auto jac = [&](const Vec& x) { return jacobian_x(p, Point{x, t}); };
    detail::CoreResult core =
        detail::damped_newton(residual, jac, x_init, cfg, SolveStatus::SingularJacobian);

    NewtonResult out;
    out.status = core.status;
    out.x = core.u;
    out.iterations = core.iterations;
    out.history = std::move(core.history);
    // Independent final evaluation backs the residual contract.
    if (out.status == SolveStatus::Converged) {
        out.residual_norm = eval(p, Point{out.x, t}).norm();
        if (out.residual_norm > cfg.abs_tol * (1.0 + out.x.norm()))
            out.status = SolveStatus::MaxIterExceeded;
    } else {
        out.residual_norm = core.residual_norm;
    }
    return out;
}

Box Box::cube(int dim, double lo, double hi) {
    Box b;
    b.axes.assign(static_cast<std::size_t>(dim), {lo, hi});
    return b;
}

double sep_tol(const Vec& x) { return 1e-6 * (1.0 + x.norm()); }

ZeroSetSection enumerate_from_starts(const ProblemSpec& p, double t,
                                     const std::vector<Vec>& starts,
                                     const NewtonConfig& cfg) {
    struct StartOutcome {
        bool ok = false;
        Vec x;
        double residual = 0.0;
    };
    std::vector<StartOutcome> outcomes(starts.size());
    parallel_for_index(starts.size(), [&](std::size_t i) {
        try {
            NewtonResult r = newton_fixed_t(p, t, starts[i], cfg);
            if (r.ok()) outcomes[i] = {true, r.x, r.residual_norm};
        } catch (const Error&) {
            // tallied as a failed start
        }
    });

    ZeroSetSection sec;
    sec.t = t;
    sec.multistart_count = static_cast<int>(starts.size());

    std::vector<StartOutcome> hits;
    for (auto& o : outcomes) {
        if (o.ok)
            hits.push_back(std::move(o));
        else
            ++sec.failed_starts;
    }
    std::sort(hits.begin(), hits.end(), [](const StartOutcome& a, const StartOutcome& b) {
        return std::lexicographical_compare(a.x.data(), a.x.data() + a.x.size(),
                                            b.x.data(), b.x.data() + b.x.size());
    });

    for (const auto& h : hits) {
        bool merged = false;
        for (std::size_t k = 0; k < sec.zeros.size(); ++k) {
            if ((sec.zeros[k] - h.x).norm() <= sep_tol(h.x)) {
                if (h.residual < sec.residuals[k]) {
                    sec.zeros[k] = h.x;
                    sec.residuals[k] = h.residual;
                }
                merged = true;
                break;
            }
        }
        if (!merged) {
            sec.zeros.push_back(h.x);
            sec.residuals.push_back(h.residual);
        }
    }

    sec.min_pairwise_separation = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sec.zeros.size(); ++i)
        for (std::size_t j = i + 1; j < sec.zeros.size(); ++j)
            sec.min_pairwise_separation = std::min(
                sec.min_pairwise_separation, (sec.zeros[i] - sec.zeros[j]).norm());
    return sec;
}

ZeroSetSection enumerate_section(const ProblemSpec& p, double t, const Box& box,
                                 int grid_density, const NewtonConfig& cfg) {
    if (box.dim() != p.dim)
        raise(ErrorKind::DimensionMismatch, "enumerate_section: box/problem dim mismatch");
    if (grid_density < 2)
        raise(ErrorKind::Usage, "enumerate_section: grid_density must be >= 2");
    double total = 1.0;
    for (int i = 0; i < p.dim; ++i) total *= grid_density;
    if (total > 2e6)
        raise(ErrorKind::Usage, "enumerate_section: grid too large (" +
                                    std::to_string(total) + " starts)");

    const int n_starts = static_cast<int>(total);
    std::vector<Vec> starts(static_cast<std::size_t>(n_starts), Vec(p.dim));
    for (int s = 0; s < n_starts; ++s) {
        int rem = s;
        for (int ax = 0; ax < p.dim; ++ax) {
            const int k = rem % grid_density;
            rem /= grid_density;
            const auto [lo, hi] = box.axes[static_cast<std::size_t>(ax)];
            starts[static_cast<std::size_t>(s)](ax) =
                lo + (hi - lo) * static_cast<double>(k) / (grid_density - 1);
        }
    }
    return enumerate_from_starts(p, t, starts, cfg);
}

AugmentedResult newton_augmented(const ProblemSpec& p, const AugmentedPoint& q_init,
                                 const NewtonConfig& cfg) {
    const int n = p.dim;
    const double v0n = q_init.v.norm();
    if (v0n < 0.5 || v0n > 2.0)
        raise(ErrorKind::Usage,
              "newton_augmented: |v_init| = " + std::to_string(v0n) +
                  " outside [0.5, 2]");
    check_in_domain(p, Point{q_init.x, q_init.t});

    auto unpack = [n](const Vec& u) {
        AugmentedPoint q;
        q.x = u.head(n);
        q.t = u(n);
        q.v = u.tail(n);
        return q;
    };
    auto residual = [&](const Vec& u) {
        const AugmentedPoint q = unpack(u);
        const Point pt{q.x, q.t};
        Vec r(2 * n + 1);
        r.head(n) = eval(p, pt);
        r.segment(n, n) = jacobian_x(p, pt) * q.v;
        r(2 * n) = q.v.squaredNorm() - 1.0;
        return r;
    };
    auto jac = [&](const Vec& u) {
        const AugmentedPoint q = unpack(u);
        const Point pt{q.x, q.t};
        const Mat J = jacobian_x(p, pt);
        Mat A = Mat::Zero(2 * n + 1, 2 * n + 1);
        A.block(0, 0, n, n) = J;
        A.block(0, n, n, 1) = dt_F(p, pt);
        A.block(n, 0, n, n) = d2x_F_bilinear(p, pt, q.v);
        A.block(n, n, n, 1) = dt_jacobian_dir(p, pt, q.v);
        A.block(n, n + 1, n, n) = J;
        A.block(2 * n, n + 1, 1, n) = 2.0 * q.v.transpose();
        return A;
    };

    Vec u0(2 * n + 1);
    u0.head(n) = q_init.x;
    u0(n) = q_init.t;
    u0.tail(n) = q_init.v;

    detail::CoreResult core = detail::damped_newton(
        residual, jac, u0, cfg, SolveStatus::SingularBorderedSystem);

    AugmentedResult out;
    out.status = core.status;
    out.iterations = core.iterations;
    out.q = unpack(core.u);
    if (out.status == SolveStatus::Converged) {
        out.q.v.normalize();
        Vec u1(2 * n + 1);
        u1.head(n) = out.q.x;
        u1(n) = out.q.t;
        u1.tail(n) = out.q.v;
        out.residual_norm = residual(u1).norm();
        if (out.residual_norm > cfg.abs_tol * (1.0 + u1.norm()))
            out.status = SolveStatus::MaxIterExceeded;
    } else {
        out.residual_norm = core.residual_norm;
    }
    return out;
}

}  // namespace foldcert
