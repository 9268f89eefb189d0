#include "foldcert/allen_cahn.hpp"

#include <cmath>
#include <memory>

#include "foldcert/expression.hpp"

namespace foldcert {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct AcData {
    int m;
    double h;
    double length;
    Vec profile, y, z;
    Expression load;

    double load_at(double t) const { return load.eval({t}); }
    double dload_at(double t) const {
        const double dh = 1e-7;
        return (load.eval({t + dh}) - load.eval({t - dh})) / (2.0 * dh);
    }

    // (A_h u)_i = (-u_{i-1} + 2 u_i - u_{i+1}) / h^2, Dirichlet ends.
    Vec laplacian_apply(const Vec& u) const {
        Vec out(m);
        for (int i = 0; i < m; ++i) {
            const double left = (i > 0) ? u(i - 1) : 0.0;
            const double right = (i + 1 < m) ? u(i + 1) : 0.0;
            out(i) = (-left + 2.0 * u(i) - right) / (h * h);
        }
        return out;
    }
};

}  // namespace

Mat allen_cahn_laplacian(int m, double length) {
    const double h = length / (m + 1);
    Mat A = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        A(i, i) = 2.0 / (h * h);
        if (i > 0) A(i, i - 1) = -1.0 / (h * h);
        if (i + 1 < m) A(i, i + 1) = -1.0 / (h * h);
    }
    return A;
}

EnergyProblem build_allen_cahn(const AllenCahnConfig& cfg) {
    if (cfg.m < 3)
        raise(ErrorKind::Usage, "build_allen_cahn: m must be >= 3");
    if (!(cfg.domain_length > 0.0))
        raise(ErrorKind::Usage, "build_allen_cahn: domain_length must be > 0");

    auto d = std::make_shared<AcData>(AcData{
        cfg.m, cfg.domain_length / (cfg.m + 1), cfg.domain_length,
        cfg.profile.size() ? cfg.profile : Vec(Vec::Ones(cfg.m)),
        cfg.y.size() ? cfg.y : Vec(Vec::Zero(cfg.m)),
        cfg.z.size() ? cfg.z : Vec(Vec::Zero(cfg.m)),
        [&] {
            try {
                return Expression::parse(cfg.load_expr, {"t"});
            } catch (const Error& e) {
                raise(ErrorKind::BadLoadExpression, e.what());
            }
        }()});
    if (d->profile.size() != cfg.m || d->y.size() != cfg.m || d->z.size() != cfg.m)
        raise(ErrorKind::DimensionMismatch,
              "build_allen_cahn: profile/y/z must have length m");

    const std::string name =
        cfg.name.empty() ? ("allencahn" + std::to_string(cfg.m)) : cfg.name;
    const int m = cfg.m;

    ProblemSpec p = make_problem(
        name, m, cfg.t_lo, cfg.t_hi,
        [d](const Vec& u, double t) {
            Vec f = d->laplacian_apply(u);
            const double amp = d->load_at(t);
            for (int i = 0; i < d->m; ++i) {
                const double ui = u(i);
                f(i) += ui * ui * ui - ui - amp * d->profile(i) + d->y(i) + d->z(i) * ui;
            }
            return f;
        },
        4);
    p.eval_DxF = [d](const Vec& u, double) {
        Mat H = allen_cahn_laplacian(d->m, d->length);
        for (int i = 0; i < d->m; ++i)
            H(i, i) += 3.0 * u(i) * u(i) - 1.0 + d->z(i);
        return H;
    };
    p.eval_dtF = [d](const Vec&, double t) {
        return Vec(-d->dload_at(t) * d->profile);
    };
    p.eval_D2xF_dir = [d](const Vec& u, double, const Vec& v) {
        Vec out(d->m);
        for (int i = 0; i < d->m; ++i) out(i) = 6.0 * u(i) * v(i) * v(i);
        return out;
    };
    p.eval_dtDxF_dir = [d](const Vec&, double, const Vec&) {
        return Vec(Vec::Zero(d->m));
    };

    EnergyProblem ep;
    ep.problem = std::move(p);
    ep.inner_weight = d->h;
    ep.eval_E = [d](const Vec& u, double t) {
        const double amp = d->load_at(t);
        double grad_sq = 0.0;
        double prev = 0.0;  // u_0 = 0
        for (int i = 0; i <= d->m; ++i) {
            const double cur = (i < d->m) ? u(i) : 0.0;  // u_{m+1} = 0
            const double diff = (cur - prev) / d->h;
            grad_sq += 0.5 * diff * diff;
            prev = cur;
        }
        double well = 0.0;
        for (int i = 0; i < d->m; ++i) {
            const double ui = u(i);
            const double w = (ui * ui - 1.0) * (ui * ui - 1.0) / 4.0;
            well += w - amp * d->profile(i) * ui + d->y(i) * ui + 0.5 * d->z(i) * ui * ui;
        }
        return d->h * (grad_sq + well);
    };
    ep.eval_D3_dir = [d](const Vec& u, double, const Vec& v) {
        double acc = 0.0;
        for (int i = 0; i < d->m; ++i) acc += 6.0 * u(i) * v(i) * v(i) * v(i);
        return d->h * acc;
    };
    return ep;
}

std::vector<Vec> allen_cahn_starts(int m, double lo, double hi, int count) {
    std::vector<Vec> starts;
    Vec mode(m);
    for (int i = 0; i < m; ++i)
        mode(i) = std::sin(kPi * static_cast<double>(i + 1) / (m + 1));
    for (int k = 0; k < count; ++k) {
        const double c = lo + (hi - lo) * static_cast<double>(k) / (count - 1);
        starts.push_back(Vec(Vec::Constant(m, c)));
        starts.push_back(Vec(c * mode));
    }
    return starts;
}

SweepResult sweep_and_certify(const EnergyProblem& ep, double amp_lo, double amp_hi,
                              const StepConfig& cfg) {
    const ProblemSpec& p = ep.problem;
    if (!(amp_lo < amp_hi))
        raise(ErrorKind::Usage, "sweep_and_certify: empty amplitude range");
    if (!p.in_t_range(amp_lo) || !p.in_t_range(amp_hi))
        raise(ErrorKind::Domain, p.name + ": amplitude range outside the load domain");

    StepConfig step = cfg;
    step.t_stop_min = amp_lo;
    step.t_stop_max = amp_hi;

    SweepResult result;
    const std::vector<Vec> starts = allen_cahn_starts(p.dim);

    struct SeedPlan {
        double t;
        int direction;
    };
    const std::vector<SeedPlan> plans = {{amp_lo, +1}, {amp_hi, -1}};
    for (const auto& plan : plans) {
        ZeroSetSection sec = enumerate_from_starts(p, plan.t, starts, step.newton);
        for (const auto& z : sec.zeros) {
            BranchCurve curve;
            try {
                curve = trace_branch(p, Point{z, plan.t}, plan.direction, step);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::RankDeficientStart) continue;
                throw;
            }
            std::vector<FoldRecord> found = refine_all_folds(p, curve, step);
            for (auto& rec : found) {
                bool dup = false;
                for (const auto& f : result.folds) {
                    if ((f.point.x - rec.point.x).norm() +
                            std::abs(f.point.t - rec.point.t) <=
                        10.0 * sep_tol(rec.point.x)) {
                        dup = true;
                        break;
                    }
                }
                if (!dup) result.folds.push_back(std::move(rec));
            }
            if (curve.size() > result.branch.size()) result.branch = std::move(curve);
        }
    }

    std::sort(result.folds.begin(), result.folds.end(),
              [](const FoldRecord& a, const FoldRecord& b) {
                  return a.point.t < b.point.t;
              });
    for (const auto& f : result.folds)
        result.energy_certificates.push_back(certify_energy(ep, f.point, step.tols));
    return result;
}

}  // namespace foldcert
