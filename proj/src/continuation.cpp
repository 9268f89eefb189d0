#include "foldcert/continuation.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "foldcert/detail/newton_core.hpp"

namespace foldcert {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec pack(const Point& pt) {
    Vec u(pt.x.size() + 1);
    u.head(pt.x.size()) = pt.x;
    u(pt.x.size()) = pt.t;
    return u;
}

Point unpack(const Vec& u) {
    Point pt;
    pt.x = u.head(u.size() - 1);
    pt.t = u(u.size() - 1);
    return pt;
}

struct TangentInfo {
    Vec tau;             // unit kernel of the total differential, length n+1
    double sigma_rank;   // n-th singular value (rank indicator)
    double sigma_max;
    bool full_rank;
    double jac_rcond = 1.0;  // reciprocal condition estimate of D_x F
};

/// SVD route: exact rank diagnostics. Used at starts and refinement points.
TangentInfo tangent_svd(const Mat& dF, int n, const TolPolicy& tols) {
    Eigen::JacobiSVD<Mat> svd(dF, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    TangentInfo info;
    info.sigma_max = sv(0);
    info.sigma_rank = sv(sv.size() - 1);
    info.full_rank = info.sigma_rank > tols.rank_tol * info.sigma_max;
    info.tau = svd.matrixV().col(n);
    return info;
}

TangentInfo tangent_at(const ProblemSpec& p, const Point& pt, const TolPolicy& tols) {
    const Mat dF = total_differential(p, pt);
    TangentInfo info = tangent_svd(dF, p.dim, tols);
    Eigen::PartialPivLU<Mat> lu(dF.leftCols(p.dim));
    info.jac_rcond = lu.rcond();
    return info;
}

/// Stepping fast path: the bordered solve [dF; tau_prev^T] tau = e_{n+1}
/// yields the kernel direction in O(n^3/3) instead of a full SVD; the SVD
/// route is kept for ill-conditioned nodes.
TangentInfo tangent_bordered(const ProblemSpec& p, const Point& pt, const Vec& tau_prev,
                             const TolPolicy& tols) {
    const Mat dF = total_differential(p, pt);
    const int n = p.dim;
    Mat B(n + 1, n + 1);
    B.topRows(n) = dF;
    B.row(n) = tau_prev.transpose();
    Eigen::PartialPivLU<Mat> lu(B);
    const double rc = lu.rcond();
    if (rc > 1e-10) {
        Vec rhs = Vec::Zero(n + 1);
        rhs(n) = 1.0;
        Vec tau = lu.solve(rhs);
        const double nrm = tau.norm();
        if (tau.allFinite() && nrm > 1e-300) {
            tau /= nrm;
            const double resid = (dF * tau).norm();
            const double scale = std::max(1.0, dF.cwiseAbs().maxCoeff());
            if (resid <= 1e-9 * scale) {
                TangentInfo info;
                info.tau = tau;
                info.sigma_max = scale;
                info.sigma_rank = scale;  // not computed on the fast path
                info.full_rank = true;
                Eigen::PartialPivLU<Mat> luj(dF.leftCols(n));
                info.jac_rcond = luj.rcond();
                return info;
            }
        }
    }
    TangentInfo info = tangent_svd(dF, n, tols);
    Eigen::PartialPivLU<Mat> luj(dF.leftCols(n));
    info.jac_rcond = luj.rcond();
    return info;
}

NodeClass classify_node(const TangentInfo& tinfo) {
    return (tinfo.jac_rcond <= 1e-6) ? NodeClass::NearSingular : NodeClass::Regular;
}

/// Newton correction onto the curve within the hyperplane through `pred`
/// orthogonal to `tau`.
std::optional<Point> correct_onto_curve(const ProblemSpec& p, const Vec& pred,
                                        const Vec& tau, const NewtonConfig& ncfg) {
    const int n = p.dim;
    auto residual = [&](const Vec& u) {
        const Point pt = unpack(u);
        Vec r(n + 1);
        r.head(n) = eval(p, pt);
        r(n) = tau.dot(u - pred);
        return r;
    };
    auto jacobian = [&](const Vec& u) {
        const Point pt = unpack(u);
        Mat A(n + 1, n + 1);
        A.block(0, 0, n, n) = jacobian_x(p, pt);
        A.block(0, n, n, 1) = dt_F(p, pt);
        A.row(n) = tau.transpose();
        return A;
    };
    NewtonConfig cfg = ncfg;
    cfg.max_iter = std::min(cfg.max_iter, 25);
    detail::CoreResult core =
        detail::damped_newton(residual, jacobian, pred, cfg, SolveStatus::SingularJacobian);
    if (core.status != SolveStatus::Converged) return std::nullopt;
    return unpack(core.u);
}

double curve_tol_at(const StepConfig& cfg, const Vec& x) {
    return cfg.curve_tol * (1.0 + x.norm());
}

/// Largest step along tau keeping t strictly inside the domain.
double domain_step_limit(const ProblemSpec& p, double t, double tau_t) {
    const double inset = 1e-9 * (p.t_hi - p.t_lo);
    if (tau_t > 1e-14) return (p.t_hi - inset - t) / tau_t;
    if (tau_t < -1e-14) return (p.t_lo + inset - t) / tau_t;
    return std::numeric_limits<double>::infinity();
}

}  // namespace

BranchCurve trace_branch(const ProblemSpec& p, const Point& start, int direction,
                         const StepConfig& cfg) {
    check_in_domain(p, start);
    const double res0 = eval(p, start).norm();
    if (res0 > curve_tol_at(cfg, start.x))
        raise(ErrorKind::StartNotOnCurve,
              p.name + ": start residual " + std::to_string(res0));

    TangentInfo tinfo = tangent_at(p, start, cfg.tols);
    if (!tinfo.full_rank)
        raise(ErrorKind::RankDeficientStart,
              p.name + ": total differential rank-deficient at the start");

    Vec tau = tinfo.tau;
    const int n = p.dim;
    const double dir = (direction >= 0) ? 1.0 : -1.0;
    if (std::abs(tau(n)) > 1e-12) {
        if (tau(n) * dir < 0.0) tau = -tau;
    } else {
        for (int i = 0; i < n; ++i) {
            if (std::abs(tau(i)) > 1e-12) {
                if (tau(i) * dir < 0.0) tau = -tau;
                break;
            }
        }
    }

    BranchCurve curve;
    curve.nodes.push_back(start);
    curve.tangents.push_back(tau);
    curve.classifications.push_back(classify_node(tinfo));
    curve.arclength.push_back(0.0);

    double h = cfg.initial_step;
    int successes = 0;

    while (curve.size() < cfg.max_nodes) {
        const Point& node = curve.nodes.back();
        const Vec& tau_prev = curve.tangents.back();
        const Vec u = pack(node);

        const double h_dom = domain_step_limit(p, node.t, tau_prev(n));
        double h_eff = h;
        if (h_eff > 0.98 * h_dom) h_eff = 0.98 * h_dom;
        if (h_eff < cfg.min_step) {
            curve.termination = "domain_boundary";
            break;
        }

        const Vec pred = u + h_eff * tau_prev;
        auto corrected = correct_onto_curve(p, pred, tau_prev, cfg.newton);
        if (!corrected) {
            h *= 0.5;
            successes = 0;
            if (h < cfg.min_step) {
                curve.termination = "step_underflow";
                break;
            }
            continue;
        }

        TangentInfo next_info = tangent_bordered(p, *corrected, tau_prev, cfg.tols);
        if (!next_info.full_rank) {
            curve.termination = "rank_deficient_point";
            break;
        }
        Vec tau_next = next_info.tau;
        if (tau_next.dot(tau_prev) < 0.0) tau_next = -tau_next;

        // Independent on-curve re-verification.
        if (eval(p, *corrected).norm() > curve_tol_at(cfg, corrected->x)) {
            h *= 0.5;
            successes = 0;
            if (h < cfg.min_step) {
                curve.termination = "step_underflow";
                break;
            }
            continue;
        }

        const double ds = (pack(*corrected) - u).norm();
        curve.nodes.push_back(*corrected);
        curve.tangents.push_back(tau_next);
        curve.classifications.push_back(classify_node(next_info));
        curve.arclength.push_back(curve.arclength.back() + ds);

        ++successes;
        if (successes >= cfg.grow_after) {
            h = std::min(h * cfg.grow_factor, cfg.max_step);
            successes = 0;
        }

        const double t_now = corrected->t;
        if (cfg.t_stop_min && t_now < *cfg.t_stop_min) {
            curve.termination = "t_stop";
            break;
        }
        if (cfg.t_stop_max && t_now > *cfg.t_stop_max) {
            curve.termination = "t_stop";
            break;
        }
        if (cfg.stop_after_fold && curve.size() >= 2) {
            const double a = curve.tangent_t(curve.size() - 2);
            const double b = curve.tangent_t(curve.size() - 1);
            if (a * b < 0.0) {
                curve.termination = "fold_passed";
                break;
            }
        }
        if (curve.size() > 10 &&
            (pack(*corrected) - pack(start)).norm() <= sep_tol(start.x) &&
            tau_next.dot(curve.tangents.front()) > 0.9) {
            curve.termination = "closed_loop";
            break;
        }
    }
    if (curve.termination.empty())
        curve.termination = (curve.size() >= cfg.max_nodes) ? "max_nodes" : "finished";
    return curve;
}

std::vector<std::pair<int, int>> detect_folds(const BranchCurve& curve) {
    std::vector<std::pair<int, int>> brackets;
    for (int i = 0; i + 1 < curve.size(); ++i) {
        if (curve.tangent_t(i) * curve.tangent_t(i + 1) < 0.0)
            brackets.emplace_back(i, i + 1);
    }
    return brackets;
}

namespace {

struct CurveSample {
    Point point;
    Vec tau;
};

/// Step `ds` along the tangent from `from` and correct back onto the curve;
/// the returned tangent is oriented along `from.tau`.
std::optional<CurveSample> advance_on_curve(const ProblemSpec& p, const CurveSample& from,
                                            double ds, const StepConfig& cfg) {
    const Vec pred = pack(from.point) + ds * from.tau;
    auto corrected = correct_onto_curve(p, pred, from.tau, cfg.newton);
    if (!corrected) return std::nullopt;
    TangentInfo info = tangent_at(p, *corrected, cfg.tols);
    if (!info.full_rank) return std::nullopt;
    Vec tau = info.tau;
    if (tau.dot(from.tau) < 0.0) tau = -tau;
    return CurveSample{*corrected, tau};
}

/// Tangent-sign bisection between two on-curve samples with opposite
/// t-components, best effort: near branch crossings (non-transversal
/// points) the corrector eventually hops between branches, so the sample
/// with the smallest |tangent t-component| seen so far is returned once the
/// interval stops being trustworthy.
std::optional<CurveSample> bisect_fold(const ProblemSpec& p, CurveSample a,
                                       CurveSample b, const StepConfig& cfg) {
    const double sign_a = (a.tau(a.tau.size() - 1) > 0.0) ? 1.0 : -1.0;
    CurveSample best = (std::abs(a.tau(a.tau.size() - 1)) <
                        std::abs(b.tau(b.tau.size() - 1)))
                           ? a
                           : b;
    bool have_best = false;
    for (int iter = 0; iter < 80; ++iter) {
        const double gap = (pack(b.point) - pack(a.point)).norm();
        if (std::abs(best.tau(best.tau.size() - 1)) <= cfg.fold_tol) return best;
        if (gap <= 1e-13 * (1.0 + pack(a.point).norm())) return best;
        auto mid = advance_on_curve(p, a, gap / 2.0, cfg);
        if (!mid) return have_best ? std::optional<CurveSample>(best) : std::nullopt;
        if (std::abs(mid->tau(mid->tau.size() - 1)) <
            std::abs(best.tau(best.tau.size() - 1))) {
            best = *mid;
            have_best = true;
        }
        if (mid->tau(mid->tau.size() - 1) * sign_a > 0.0)
            a = *mid;
        else
            b = *mid;
    }
    return best;
}

/// Signed determinant of J scaled by exp(-n log_scale), computed in the log
/// domain so that large-n problems cannot overflow.
double det_scaled(const Mat& J, double log_scale) {
    Eigen::PartialPivLU<Mat> lu(J);
    double sign = static_cast<double>(lu.permutationP().determinant());
    double logabs = 0.0;
    for (int i = 0; i < J.rows(); ++i) {
        const double d = lu.matrixLU()(i, i);
        if (d == 0.0) return 0.0;
        if (d < 0.0) sign = -sign;
        logabs += std::log(std::abs(d));
    }
    return sign * std::exp(logabs - J.rows() * log_scale);
}

/// Singularity polish for non-transversal candidates: Newton on the square
/// system (F(x,t), det_scaled(D_x F)) = 0. The determinant root is
/// degenerate at such points, so convergence is linear; it still reaches
/// machine-level accuracy in a few dozen halvings where the bisection floor
/// (set by branch hopping) is only ~1e-7.
std::optional<Point> det_polish(const ProblemSpec& p, const Point& seed,
                                const StepConfig& cfg) {
    const int n = p.dim;
    const Mat dF_seed = total_differential(p, seed);
    const double scale =
        std::max(dF_seed.norm() / std::sqrt(static_cast<double>(n)), 1e-100);
    const double log_scale = std::log(scale);

    auto det_at = [&](const Vec& u) {
        const Point pt = unpack(u);
        return det_scaled(jacobian_x(p, pt), log_scale);
    };
    auto residual = [&](const Vec& u) {
        const Point pt = unpack(u);
        Vec r(n + 1);
        r.head(n) = eval(p, pt);
        r(n) = det_at(u);
        return r;
    };
    auto jacobian = [&](const Vec& u) {
        const Point pt = unpack(u);
        Mat A(n + 1, n + 1);
        A.topRows(n) = total_differential(p, pt);
        const double h = 1e-6 * (1.0 + u.norm());
        for (int j = 0; j <= n; ++j) {
            Vec up = u, um = u;
            up(j) += h;
            um(j) -= h;
            A(n, j) = (det_at(up) - det_at(um)) / (2.0 * h);
        }
        return A;
    };

    NewtonConfig ncfg = cfg.newton;
    ncfg.max_iter = 60;
    ncfg.allow_ill_conditioned = true;  // the det row degenerates at the target
    detail::CoreResult core =
        detail::damped_newton(residual, jacobian, pack(seed), ncfg,
                              SolveStatus::SingularJacobian);
    if (core.status != SolveStatus::Converged) return std::nullopt;
    const Point out = unpack(core.u);
    if ((pack(out) - pack(seed)).norm() > 1e-2 * (1.0 + pack(seed).norm()))
        return std::nullopt;  // escaped to a different singular point
    return out;
}

}  // namespace

FoldRecord refine_fold(const ProblemSpec& p, const BranchCurve& curve,
                       std::pair<int, int> bracket, const StepConfig& cfg) {
    const int i = bracket.first, j = bracket.second;
    if (i < 0 || j >= curve.size() || j != i + 1)
        raise(ErrorKind::Usage, "refine_fold: invalid bracket");

    CurveSample a{curve.nodes[i], curve.tangents[i]};
    CurveSample b{curve.nodes[j], curve.tangents[j]};
    const double bracket_len = (pack(b.point) - pack(a.point)).norm();

    CurveSample mid = a;
    if (auto m = advance_on_curve(p, a, bracket_len / 2.0, cfg)) mid = *m;

    FoldRecord rec;
    bool located = false;

    // Bordered (augmented) solve first: quadratic near transversal folds.
    {
        const KernelPair kp = kernel_pair(jacobian_x(p, mid.point), cfg.tols);
        AugmentedPoint q0{mid.point.x, mid.point.t, kp.v};
        try {
            AugmentedResult ar = newton_augmented(p, q0, cfg.newton);
            if (ar.ok()) {
                const double drift =
                    (ar.q.x - mid.point.x).norm() + std::abs(ar.q.t - mid.point.t);
                if (drift <= 10.0 * (bracket_len + 1.0)) {
                    rec.point = Point{ar.q.x, ar.q.t};
                    rec.bordered_converged = true;
                    located = true;
                }
            }
        } catch (const Error&) {
            // fall through to bisection
        }
    }
    if (!located) {
        auto bis = bisect_fold(p, a, b, cfg);
        if (!bis)
            raise(ErrorKind::NoConvergence,
                  p.name + ": fold refinement failed (bordered solve and bisection)");
        rec.point = bis->point;
        rec.bordered_converged = false;
        if (auto polished = det_polish(p, rec.point, cfg)) rec.point = *polished;
    }

    rec.certificate = certify(p, rec.point, cfg.tols);

    // Consistency: a transversal fold has a regular bordered system, so a
    // bisection-path point claiming transversality must be reproducible by
    // the bordered solve; otherwise the refinement is untrustworthy.
    if (!rec.bordered_converged &&
        rec.certificate.classification == Classification::TransversalSingular) {
        AugmentedPoint q0{rec.point.x, rec.point.t, rec.certificate.kernel.v};
        AugmentedResult ar = newton_augmented(p, q0, cfg.newton);
        if (!ar.ok())
            raise(ErrorKind::NoConvergence,
                  p.name + ": fold refinement inconsistent (bisection claims a "
                           "transversal fold the bordered solve cannot reproduce)");
        rec.point = Point{ar.q.x, ar.q.t};
        rec.bordered_converged = true;
        rec.certificate = certify(p, rec.point, cfg.tols);
    }

    TangentInfo tinfo = tangent_at(p, rec.point, cfg.tols);
    rec.tdot = tinfo.full_rank ? std::abs(tinfo.tau(p.dim)) : 0.0;

    rec.side = 0;
    rec.tddot_estimate = kNaN;
    if (tinfo.full_rank) {
        Vec tau = tinfo.tau;
        if (tau.dot(a.tau) < 0.0) tau = -tau;
        const double ds = 1e-3 * (1.0 + rec.point.x.norm());
        CurveSample at_fold{rec.point, tau};
        auto fwd = advance_on_curve(p, at_fold, ds, cfg);
        auto bwd = advance_on_curve(p, at_fold, -ds, cfg);
        if (fwd && bwd) {
            const double dt_f = fwd->point.t - rec.point.t;
            const double dt_b = bwd->point.t - rec.point.t;
            if (dt_f > 0.0 && dt_b > 0.0) rec.side = 1;
            if (dt_f < 0.0 && dt_b < 0.0) rec.side = -1;
            // The arclength curvature of t is meaningful only under the
            // certified transversal structure (the implicit-function curve
            // exists there); left NaN otherwise.
            if (rec.certificate.classification == Classification::TransversalSingular)
                rec.tddot_estimate = (dt_f + dt_b) / (ds * ds);
        }
    }
    return rec;
}

std::vector<FoldRecord> refine_all_folds(const ProblemSpec& p, const BranchCurve& curve,
                                         const StepConfig& cfg) {
    std::vector<FoldRecord> folds;
    for (const auto& bracket : detect_folds(curve)) {
        FoldRecord rec = refine_fold(p, curve, bracket, cfg);
        bool duplicate = false;
        for (const auto& f : folds) {
            if ((f.point.x - rec.point.x).norm() + std::abs(f.point.t - rec.point.t) <=
                10.0 * sep_tol(rec.point.x)) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) folds.push_back(std::move(rec));
    }
    return folds;
}

SeparationFit quadratic_separation_check(const ProblemSpec& p, const FoldRecord& fold,
                                         const std::vector<double>& offsets,
                                         const StepConfig& cfg) {
    if (fold.certificate.classification != Classification::TransversalSingular)
        raise(ErrorKind::InsufficientData,
              "quadratic_separation_check: fold is not transversal");

    const Vec& v = fold.certificate.kernel.v;
    const double t0 = fold.point.t;
    const double tddot = std::isfinite(fold.tddot_estimate) &&
                                 std::abs(fold.tddot_estimate) > 0.1
                             ? std::abs(fold.tddot_estimate)
                             : 2.0;

    // Probe for the existence side when the record does not carry it.
    int side = fold.side;
    if (side == 0) {
        for (int cand : {+1, -1}) {
            const double t_test = t0 + cand * offsets.front();
            if (!p.in_t_range(t_test)) continue;
            NewtonResult r = newton_fixed_t(
                p, t_test, fold.point.x + std::sqrt(2.0 * offsets.front() / tddot) * v,
                cfg.newton);
            if (r.ok()) {
                side = cand;
                break;
            }
        }
        if (side == 0)
            raise(ErrorKind::InsufficientData,
                  "quadratic_separation_check: no existence side found");
    }

    SeparationFit fit;
    for (double dt : offsets) {
        const double t_test = t0 + side * dt;
        if (!p.in_t_range(t_test)) continue;
        const double s_guess = std::sqrt(2.0 * dt / tddot);
        std::vector<Vec> starts;
        for (double c : {0.6, 1.0, 1.6, 2.5}) {
            starts.push_back(fold.point.x + c * s_guess * v);
            starts.push_back(fold.point.x - c * s_guess * v);
        }
        ZeroSetSection sec = enumerate_from_starts(p, t_test, starts, cfg.newton);
        // Keep only the local pair that merges at the fold.
        std::vector<Vec> local;
        for (const auto& z : sec.zeros)
            if ((z - fold.point.x).norm() <= 8.0 * s_guess) local.push_back(z);
        if (local.size() < 2) continue;
        std::sort(local.begin(), local.end(), [&](const Vec& l, const Vec& r) {
            return (l - fold.point.x).norm() < (r - fold.point.x).norm();
        });
        fit.offsets_used.push_back(dt);
        fit.distances.push_back((local[0] - local[1]).norm());
    }

    if (fit.offsets_used.size() < 3)
        raise(ErrorKind::InsufficientData,
              "quadratic_separation_check: fewer than 3 offsets resolved two zeros");

    // Least squares: log d = a + exponent * log dt.
    const std::size_t m = fit.offsets_used.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double lx = std::log(fit.offsets_used[k]);
        const double ly = std::log(fit.distances[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    fit.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return fit;
}

std::vector<FoldRecord> scan_folds(const ProblemSpec& p, const ScanConfig& scan) {
    std::vector<FoldRecord> all;
    auto absorb = [&](const std::vector<FoldRecord>& found) {
        for (const auto& rec : found) {
            bool dup = false;
            for (const auto& f : all) {
                if ((f.point.x - rec.point.x).norm() +
                        std::abs(f.point.t - rec.point.t) <=
                    10.0 * sep_tol(rec.point.x)) {
                    dup = true;
                    break;
                }
            }
            if (!dup) all.push_back(rec);
        }
    };

    StepConfig step = scan.step;
    step.t_stop_min = scan.t_lo;
    step.t_stop_max = scan.t_hi;

    struct SeedPlan {
        double t;
        int direction;
    };
    const double t_mid = 0.5 * (scan.t_lo + scan.t_hi);
    const std::vector<SeedPlan> plans = {
        {scan.t_lo, +1}, {scan.t_hi, -1}, {t_mid, +1}, {t_mid, -1}};

    for (const auto& plan : plans) {
        if (!p.in_t_range(plan.t)) continue;
        ZeroSetSection sec =
            enumerate_section(p, plan.t, scan.box, scan.grid_density, step.newton);
        for (const auto& z : sec.zeros) {
            try {
                BranchCurve curve = trace_branch(p, Point{z, plan.t}, plan.direction, step);
                absorb(refine_all_folds(p, curve, step));
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::RankDeficientStart) continue;  // seed on S
                throw;
            }
        }
    }

    std::sort(all.begin(), all.end(), [](const FoldRecord& a, const FoldRecord& b) {
        if (a.point.t != b.point.t) return a.point.t < b.point.t;
        return std::lexicographical_compare(
            a.point.x.data(), a.point.x.data() + a.point.x.size(), b.point.x.data(),
            b.point.x.data() + b.point.x.size());
    });
    return all;
}

}  // namespace foldcert
