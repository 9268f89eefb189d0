#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/LU>

#include "foldcert/solve.hpp"

namespace foldcert::detail {

/// Residual evaluation that folds domain violations and non-finite output
/// into "no value" so the line search can back off.
template <typename F>
std::optional<Vec> try_residual(const F& fn, const Vec& u) {
    try {
        Vec r = fn(u);
        if (!r.allFinite()) return std::nullopt;
        return r;
    } catch (const Error&) {
        return std::nullopt;
    }
}

struct CoreResult {
    SolveStatus status = SolveStatus::MaxIterExceeded;
    Vec u;
    int iterations = 0;
    double residual_norm = 0.0;
    std::vector<Vec> history;
};

/// Damped Newton on R(u) = 0 with backtracking on the |R|^2 merit.
/// `singular_status` names the failure used when the linear solve is rank
/// deficient (plain vs bordered systems report it differently).
template <typename FRes, typename FJac>
CoreResult damped_newton(const FRes& residual, const FJac& jacobian, const Vec& u0,
                         const NewtonConfig& cfg, SolveStatus singular_status) {
    CoreResult out;
    out.u = u0;
    auto r_opt = try_residual(residual, out.u);
    if (!r_opt) {
        out.status = SolveStatus::Diverged;
        out.residual_norm = std::numeric_limits<double>::infinity();
        return out;
    }
    Vec r = *r_opt;
    double merit = r.squaredNorm();
    if (cfg.record_history) out.history.push_back(out.u);

    for (int it = 0; it < cfg.max_iter; ++it) {
        out.iterations = it + 1;
        const double tol = cfg.abs_tol * (1.0 + out.u.norm());
        if (r.norm() <= tol) {
            out.status = SolveStatus::Converged;
            out.residual_norm = r.norm();
            return out;
        }

        Mat J;
        try {
            J = jacobian(out.u);
        } catch (const Error&) {
            out.status = SolveStatus::Diverged;
            out.residual_norm = r.norm();
            return out;
        }

        Vec step;
        if (cfg.tikhonov > 0.0) {
            const Mat JtJ =
                J.transpose() * J + cfg.tikhonov * Mat::Identity(J.cols(), J.cols());
            step = JtJ.ldlt().solve(-J.transpose() * r);
        } else if (cfg.allow_ill_conditioned) {
            step = Eigen::PartialPivLU<Mat>(J).solve(-r);
        } else {
            Eigen::FullPivLU<Mat> lu(J);
            if (!lu.isInvertible()) {
                out.status = singular_status;
                out.residual_norm = r.norm();
                return out;
            }
            step = lu.solve(-r);
        }
        if (!step.allFinite()) {
            out.status = singular_status;
            out.residual_norm = r.norm();
            return out;
        }

        double lambda = 1.0;
        bool accepted = false;
        while (lambda >= cfg.min_damping) {
            const Vec cand = out.u + lambda * step;
            auto cand_r = try_residual(residual, cand);
            if (cand_r && cand_r->squaredNorm() <= (1.0 - 1e-4 * lambda) * merit) {
                out.u = cand;
                r = *cand_r;
                merit = r.squaredNorm();
                accepted = true;
                break;
            }
            lambda *= cfg.damping_factor;
        }
        if (!accepted) {
            out.status = SolveStatus::MaxIterExceeded;  // stalled line search
            out.residual_norm = r.norm();
            return out;
        }
        if (cfg.record_history) out.history.push_back(out.u);
        if ((out.u - u0).norm() > cfg.trust_radius) {
            out.status = SolveStatus::Diverged;
            out.residual_norm = r.norm();
            return out;
        }
    }
    const double tol = cfg.abs_tol * (1.0 + out.u.norm());
    out.status = (r.norm() <= tol) ? SolveStatus::Converged : SolveStatus::MaxIterExceeded;
    out.residual_norm = r.norm();
    return out;
}

}  // namespace foldcert::detail
