#include "foldcert/transversality.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace foldcert {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double spectral_norm(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

/// Singularity decision for D_x F. The reference scale is taken over the
/// local 2-jet of F (D_x F, dF/dt, D^2_x F[v,v], dt D_x F[v]) rather than
/// over sigma_max(D_x F) alone: at fully degenerate points (the pitchfork)
/// every first derivative collapses together with the Jacobian, and a
/// purely relative test would classify numerically refined singular points
/// as regular.
struct SingularDecision {
    bool singular = false;
    bool one_dimensional = false;  // kernel passes smallness + gap tests
    double scale = 0.0;
};

SingularDecision decide_singular(const KernelPair& kp, double jet_scale,
                                 const TolPolicy& tols) {
    SingularDecision d;
    d.scale = jet_scale;
    const double tol = tols.rank_tol * d.scale;
    d.singular = kp.sigma_min <= tol;
    d.one_dimensional =
        d.singular && kp.sigma_next > tol && kp.gap_ratio >= tols.kernel_gap_min;
    return d;
}

}  // namespace

const char* to_string(Classification c) {
    switch (c) {
        case Classification::Regular: return "Regular";
        case Classification::TransversalSingular: return "TransversalSingular";
        case Classification::NonTransversal: return "NonTransversal";
    }
    return "?";
}

const char* to_string(Cond c) {
    switch (c) {
        case Cond::T1: return "T1";
        case Cond::T2: return "T2";
        case Cond::T3: return "T3";
        case Cond::E1: return "E1";
        case Cond::E2: return "E2";
        case Cond::E3: return "E3";
    }
    return "?";
}

TransversalityCertificate certify(const ProblemSpec& p, const Point& pt,
                                  const TolPolicy& tols) {
    TransversalityCertificate cert;
    cert.point = pt;
    cert.tolerances_used = tols;
    cert.residual_norm = eval(p, pt).norm();
    if (cert.residual_norm > tols.zero_tol(pt.x))
        raise(ErrorKind::NotOnZeroSet,
              p.name + ": residual " + std::to_string(cert.residual_norm) +
                  " exceeds zero_tol " + std::to_string(tols.zero_tol(pt.x)));

    const Mat J = jacobian_x(p, pt);
    const Vec dt = dt_F(p, pt);
    Mat dF(p.dim, p.dim + 1);
    dF.leftCols(p.dim) = J;
    dF.col(p.dim) = dt;

    cert.kernel = kernel_pair(J, tols);
    const double sigma_max_J = spectral_norm(J);
    cert.condition_estimate =
        std::min(kGapRatioCap, sigma_max_J / std::max(cert.kernel.sigma_min, kSigmaFloor));

    const double jet_scale =
        std::max({sigma_max_J, spectral_norm(dF),
                  d2x_F_dir(p, pt, cert.kernel.v).norm(),
                  dt_jacobian_dir(p, pt, cert.kernel.v).norm()});
    const SingularDecision sd = decide_singular(cert.kernel, jet_scale, tols);

    if (!sd.singular) {
        cert.classification = Classification::Regular;
        cert.t2_margin = kNaN;
        cert.t3_margin = kNaN;
        return cert;
    }

    if (!sd.one_dimensional) {
        cert.classification = Classification::NonTransversal;
        cert.failures = {Cond::T1};
        cert.ambiguous_kernel = true;
        cert.t2_margin = kNaN;
        cert.t3_margin = kNaN;
        return cert;
    }

    cert.t2_margin = std::abs(dt.dot(cert.kernel.w_star));
    cert.t3_margin =
        std::abs(d2x_F_dir(p, pt, cert.kernel.v).dot(cert.kernel.w_star));
    if (cert.t2_margin <= tols.margin_tol) cert.failures.push_back(Cond::T2);
    if (cert.t3_margin <= tols.margin_tol) cert.failures.push_back(Cond::T3);
    cert.classification = cert.failures.empty() ? Classification::TransversalSingular
                                                : Classification::NonTransversal;
    return cert;
}

EnergyCertificate certify_energy(const EnergyProblem& ep, const Point& pt,
                                 const TolPolicy& tols) {
    const ProblemSpec& p = ep.problem;
    EnergyCertificate cert;
    cert.point = pt;
    cert.tolerances_used = tols;
    cert.residual_norm = eval(p, pt).norm();
    if (cert.residual_norm > tols.zero_tol(pt.x))
        raise(ErrorKind::NotOnZeroSet,
              p.name + ": residual " + std::to_string(cert.residual_norm) +
                  " exceeds zero_tol " + std::to_string(tols.zero_tol(pt.x)));

    const Mat H = jacobian_x(p, pt);
    const double asym = (H - H.transpose()).norm();
    if (asym > 1e-8 * std::max(H.norm(), 1e-300))
        raise(ErrorKind::HessianAsymmetry,
              p.name + ": Hessian asymmetry " + std::to_string(asym));

    const Vec dt = dt_gradient(ep, pt.x, pt.t);
    Mat dF(p.dim, p.dim + 1);
    dF.leftCols(p.dim) = H;
    dF.col(p.dim) = dt;

    cert.kernel = kernel_pair(H, tols);
    cert.self_duality_gap = std::min((cert.kernel.v - cert.kernel.w_star).norm(),
                                     (cert.kernel.v + cert.kernel.w_star).norm());

    const double sigma_max_H = spectral_norm(H);
    const double jet_scale =
        std::max({sigma_max_H, spectral_norm(dF),
                  d2x_F_dir(p, pt, cert.kernel.v).norm(),
                  dt_jacobian_dir(p, pt, cert.kernel.v).norm()});
    const SingularDecision sd = decide_singular(cert.kernel, jet_scale, tols);

    if (!sd.singular) {
        cert.classification = Classification::Regular;
        cert.e2_margin = kNaN;
        cert.e3_margin = kNaN;
        return cert;
    }
    if (!sd.one_dimensional) {
        cert.classification = Classification::NonTransversal;
        cert.failures = {Cond::E1};
        cert.ambiguous_kernel = true;
        cert.e2_margin = kNaN;
        cert.e3_margin = kNaN;
        return cert;
    }

    cert.e2_margin = std::abs(dt.dot(cert.kernel.v));
    cert.e3_margin = std::abs(d3_dir(ep, pt.x, pt.t, cert.kernel.v));
    if (cert.e2_margin <= tols.margin_tol) cert.failures.push_back(Cond::E2);
    if (cert.e3_margin <= tols.margin_tol) cert.failures.push_back(Cond::E3);
    cert.classification = cert.failures.empty() ? Classification::TransversalSingular
                                                : Classification::NonTransversal;
    return cert;
}

Vec augmented_G(const ProblemSpec& p, const AugmentedPoint& q) {
    const Point pt{q.x, q.t};
    Vec g(2 * p.dim);
    g.head(p.dim) = eval(p, pt);
    g.tail(p.dim) = jacobian_x(p, pt) * q.v;
    return g;
}

Mat dG_total(const ProblemSpec& p, const AugmentedPoint& q) {
    const Point pt{q.x, q.t};
    const int n = p.dim;
    const Mat J = jacobian_x(p, pt);
    Mat d = Mat::Zero(2 * n, 2 * n + 1);
    d.block(0, 0, n, n) = J;
    d.block(0, n, n, 1) = dt_F(p, pt);
    d.block(n, 0, n, n) = d2x_F_bilinear(p, pt, q.v);
    d.block(n, n, n, 1) = dt_jacobian_dir(p, pt, q.v);
    d.block(n, n + 1, n, n) = J;
    return d;
}

OntoReport check_regular_value_G(const ProblemSpec& p, const AugmentedPoint& q,
                                 const TolPolicy& tols) {
    const double tol = tols.zero_tol_base * (1.0 + q.x.norm() + q.v.norm());
    const double res = augmented_G(p, q).norm();
    if (res > tol)
        raise(ErrorKind::NotOnZeroSetOfG,
              p.name + ": |G| = " + std::to_string(res) + " exceeds " +
                  std::to_string(tol));
    OntoReport r;
    r.report = rank_report(dG_total(p, q), tols);
    r.onto = r.report.surjective;
    return r;
}

OntoReport check_dF_onto(const ProblemSpec& p, const Point& pt,
                         const TolPolicy& tols) {
    const double res = eval(p, pt).norm();
    if (res > tols.zero_tol(pt.x))
        raise(ErrorKind::NotOnZeroSet,
              p.name + ": residual " + std::to_string(res) + " exceeds zero_tol");
    OntoReport r;
    r.report = rank_report(total_differential(p, pt), tols);
    r.onto = r.report.surjective;
    return r;
}

bool passes_t1_t2(const TransversalityCertificate& cert) {
    if (cert.classification == Classification::Regular) return true;
    if (cert.ambiguous_kernel) return false;
    for (Cond c : cert.failures)
        if (c == Cond::T1 || c == Cond::T2) return false;
    return true;
}

}  // namespace foldcert
