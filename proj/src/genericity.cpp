#include "foldcert/genericity.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "foldcert/parallel.hpp"

namespace foldcert {

const char* to_string(SampleOutcome o) {
    switch (o) {
        case SampleOutcome::AllFoldsTransversal: return "AllFoldsTransversal";
        case SampleOutcome::SomeNonTransversal: return "SomeNonTransversal";
        case SampleOutcome::InconclusiveNumerics: return "InconclusiveNumerics";
    }
    return "?";
}

ProblemSpec perturb_problem(const ProblemSpec& p, const PerturbationSample& s) {
    if (s.y.size() != p.dim || s.K.rows() != p.dim || s.K.cols() != p.dim)
        raise(ErrorKind::DimensionMismatch,
              p.name + ": perturbation dimensions do not match dim " +
                  std::to_string(p.dim));

    auto base = std::make_shared<const ProblemSpec>(p);
    const Vec y = s.y;
    const Mat K = s.K;

    ProblemSpec out;
    out.name = p.name + "+yK#" + std::to_string(s.seed);
    out.dim = p.dim;
    out.t_lo = p.t_lo;
    out.t_hi = p.t_hi;
    out.smoothness_order = p.smoothness_order;
    out.eval_F = [base, y, K](const Vec& x, double t) {
        return Vec(base->eval_F(x, t) + y + K * x);
    };
    // Derivatives compose exactly: the perturbation is affine in x.
    out.eval_DxF = [base, K](const Vec& x, double t) {
        return Mat(jacobian_x(*base, Point{x, t}) + K);
    };
    out.eval_dtF = [base](const Vec& x, double t) { return dt_F(*base, Point{x, t}); };
    out.eval_D2xF_dir = [base](const Vec& x, double t, const Vec& v) {
        return d2x_F_dir(*base, Point{x, t}, v);
    };
    out.eval_dtDxF_dir = [base](const Vec& x, double t, const Vec& v) {
        return dt_jacobian_dir(*base, Point{x, t}, v);
    };
    return out;
}

EnergyProblem perturb_energy(const EnergyProblem& ep, const SymmetricPerturbation& sp) {
    const int n = ep.problem.dim;
    if (sp.ell.size() != n || sp.Kform.rows() != n || sp.Kform.cols() != n)
        raise(ErrorKind::DimensionMismatch,
              ep.problem.name + ": symmetric perturbation dimension mismatch");
    if ((sp.Kform - sp.Kform.transpose()).norm() != 0.0)
        raise(ErrorKind::Usage, ep.problem.name + ": Kform must be stored symmetric");
    if (!ep.problem.eval_DxF)
        raise(ErrorKind::Usage,
              ep.problem.name + ": perturb_energy requires Hessian callbacks");

    PerturbationSample s;
    s.y = sp.ell;
    s.K = sp.Kform;
    s.seed = 0;

    EnergyProblem out;
    out.problem = perturb_problem(ep.problem, s);
    out.problem.name = ep.problem.name + "+lK";
    out.inner_weight = ep.inner_weight;

    auto base = std::make_shared<const EnergyProblem>(ep);
    const Vec ell = sp.ell;
    const Mat K = sp.Kform;
    const double w = ep.inner_weight;
    if (ep.eval_E) {
        out.eval_E = [base, ell, K, w](const Vec& x, double t) {
            return base->eval_E(x, t) + w * (ell.dot(x) + 0.5 * x.dot(K * x));
        };
    }
    out.eval_D3_dir = ep.eval_D3_dir;  // quadratic perturbation: D^3 unchanged
    out.eval_dtDxE = ep.eval_dtDxE;
    return out;
}

PerturbationSample sample_perturbation(Rng& rng, int n, double radius) {
    if (radius < 0.0) raise(ErrorKind::Usage, "sample_perturbation: radius < 0");
    PerturbationSample s;
    s.radius = radius;
    s.y = Vec::Zero(n);
    s.K = Mat::Zero(n, n);
    if (radius == 0.0) return s;

    const double bound = radius / std::sqrt(static_cast<double>(n) + static_cast<double>(n) * n);
    for (int i = 0; i < n; ++i) s.y(i) = rng.uniform(-bound, bound);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s.K(i, j) = rng.uniform(-bound, bound);

    const double norm = std::sqrt(s.y.squaredNorm() + s.K.squaredNorm());
    if (norm > radius) {
        s.y *= radius / norm;
        s.K *= radius / norm;
    }
    return s;
}

namespace {

struct SampleResult {
    SampleOutcome outcome = SampleOutcome::InconclusiveNumerics;
    int folds = 0;
};

SampleResult classify_problem(const ProblemSpec& p, const ScanConfig& scan) {
    SampleResult r;
    try {
        const std::vector<FoldRecord> folds = scan_folds(p, scan);
        r.folds = static_cast<int>(folds.size());
        r.outcome = SampleOutcome::AllFoldsTransversal;
        for (const auto& f : folds) {
            if (f.certificate.classification == Classification::NonTransversal) {
                r.outcome = SampleOutcome::SomeNonTransversal;
                break;
            }
        }
    } catch (const Error&) {
        r.outcome = SampleOutcome::InconclusiveNumerics;
    } catch (const std::exception&) {
        r.outcome = SampleOutcome::InconclusiveNumerics;
    }
    return r;
}

}  // namespace

GenericityReport genericity_experiment(const ProblemSpec& p, int n_samples,
                                       double radius, const ScanConfig& scan,
                                       std::uint64_t master_seed) {
    if (n_samples < 0) raise(ErrorKind::Usage, "genericity_experiment: n_samples < 0");

    GenericityReport report;
    report.n_samples = n_samples;
    report.radius = radius;
    report.master_seed = master_seed;
    report.scan = scan;

    const SampleResult unperturbed = classify_problem(p, scan);
    report.unperturbed_outcome = unperturbed.outcome;

    std::vector<SampleResult> results(static_cast<std::size_t>(n_samples));
    parallel_for_index(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
        Rng rng = Rng::for_sample(master_seed, i);
        PerturbationSample s = sample_perturbation(rng, p.dim, radius);
        s.seed = master_seed ^ (i + 1);
        try {
            const ProblemSpec pv = perturb_problem(p, s);
            results[i] = classify_problem(pv, scan);
        } catch (const std::exception&) {
            results[i].outcome = SampleOutcome::InconclusiveNumerics;
        }
    });

    int failures = 0;
    for (const auto& r : results) {
        report.outcomes.push_back(r.outcome);
        report.total_folds_certified += r.folds;
        if (r.outcome == SampleOutcome::SomeNonTransversal) ++failures;
        if (r.outcome == SampleOutcome::InconclusiveNumerics) ++report.n_inconclusive;
    }
    report.failure_fraction =
        (n_samples > 0) ? static_cast<double>(failures) / n_samples : 0.0;
    return report;
}

Mat rescue_linear(const Vec& v, const Vec& w, const Vec& ell) {
    const auto n = v.size();
    if (w.size() != n || ell.size() != n)
        raise(ErrorKind::DimensionMismatch, "rescue_linear: size mismatch");
    const double d = ell.dot(v);
    if (std::abs(d) < 1e-300)
        raise(ErrorKind::DegeneratePairing, "rescue_linear: <ell, v> = 0");
    return Mat((w / d) * ell.transpose());
}

Mat rescue_symmetric(const Vec& x, const Vec& ell) {
    const auto n = x.size();
    if (ell.size() != n)
        raise(ErrorKind::DimensionMismatch, "rescue_symmetric: size mismatch");
    if (x.norm() == 0.0 || ell.norm() == 0.0)
        raise(ErrorKind::ZeroInput, "rescue_symmetric: zero input vector");
    const double d = ell.dot(x);
    // Relative threshold: the first branch divides by <ell, x>; below it the
    // exact orthogonal construction takes over.
    if (std::abs(d) > 1e-12 * ell.norm() * x.norm())
        return Mat((ell / d) * ell.transpose());
    const Vec xs = x / x.squaredNorm();
    return Mat(ell * xs.transpose() + xs * ell.transpose());
}

OntoReport check_full_regularity(const ProblemSpec& p, const AugmentedPoint& q,
                                 const TolPolicy& tols) {
    const double tol = tols.zero_tol_base * (1.0 + q.x.norm() + q.v.norm());
    const double res = augmented_G(p, q).norm();
    if (res > tol)
        raise(ErrorKind::NotOnZeroSetOfG,
              p.name + ": |G| = " + std::to_string(res) + " exceeds " +
                  std::to_string(tol));

    const int n = p.dim;
    Mat ext = Mat::Zero(2 * n, 2 * n + 1 + n + n * n);
    ext.leftCols(2 * n + 1) = dG_total(p, q);
    // y~ enters row block 1 as the identity.
    ext.block(0, 2 * n + 1, n, n) = Mat::Identity(n, n);
    // K~ = e_a e_b^T enters row 1 as K~ x and row 2 as K~ v.
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const int col = 2 * n + 1 + n + a * n + b;
            ext(a, col) = q.x(b);
            ext(n + a, col) = q.v(b);
        }
    }
    OntoReport r;
    r.report = rank_report(ext, tols);
    r.onto = r.report.surjective;
    return r;
}

}  // namespace foldcert
