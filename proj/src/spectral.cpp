#include "foldcert/spectral.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace foldcert {

namespace {

void require_finite(const Mat& m, const char* who) {
    if (!m.allFinite())
        raise(ErrorKind::SvdFailure, std::string(who) + ": non-finite input matrix");
}

/// First component of magnitude > 1e-12 made positive.
void canonical_sign(Vec& v) {
    for (int i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            if (v(i) < 0.0) v = -v;
            return;
        }
    }
}

}  // namespace

KernelPair kernel_pair(const Mat& J, const TolPolicy&) {
    require_finite(J, "kernel_pair");
    if (J.rows() != J.cols() || J.rows() < 1)
        raise(ErrorKind::DimensionMismatch, "kernel_pair: square matrix required");
    const int n = static_cast<int>(J.rows());

    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (!svd.singularValues().allFinite())
        raise(ErrorKind::SvdFailure, "kernel_pair: SVD did not produce finite values");

    KernelPair kp;
    kp.sigma_min = svd.singularValues()(n - 1);
    kp.sigma_next = (n >= 2) ? svd.singularValues()(n - 2) : kGapRatioCap;
    kp.gap_ratio =
        std::min(kGapRatioCap, kp.sigma_next / std::max(kp.sigma_min, kSigmaFloor));
    kp.v = svd.matrixV().col(n - 1);
    kp.w_star = svd.matrixU().col(n - 1);
    canonical_sign(kp.v);
    canonical_sign(kp.w_star);
    return kp;
}

RankReport rank_report(const Mat& M, const TolPolicy& tols) {
    require_finite(M, "rank_report");
    Eigen::JacobiSVD<Mat> svd(M);
    const auto& sv = svd.singularValues();
    if (!sv.allFinite())
        raise(ErrorKind::SvdFailure, "rank_report: SVD did not produce finite values");

    RankReport r;
    r.rows = static_cast<int>(M.rows());
    r.cols = static_cast<int>(M.cols());
    r.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double sigma_max = sv.size() ? sv(0) : 0.0;
    r.rank_tolerance_used = tols.rank_tol * sigma_max;
    r.numerical_rank = 0;
    for (double s : r.singular_values)
        if (s > r.rank_tolerance_used) ++r.numerical_rank;
    r.surjective = (r.numerical_rank == r.rows);
    return r;
}

InvertibilityReport is_invertible(const Mat& J, const TolPolicy& tols) {
    require_finite(J, "is_invertible");
    if (J.rows() != J.cols())
        raise(ErrorKind::DimensionMismatch, "is_invertible: square matrix required");
    Eigen::JacobiSVD<Mat> svd(J);
    const auto& sv = svd.singularValues();
    if (!sv.allFinite())
        raise(ErrorKind::SvdFailure, "is_invertible: SVD did not produce finite values");
    const double sigma_max = sv(0);
    const double sigma_min = sv(sv.size() - 1);
    InvertibilityReport r;
    r.invertible = sigma_min > tols.rank_tol * sigma_max;
    r.condition = sigma_max / std::max(sigma_min, kSigmaFloor);
    r.condition = std::min(r.condition, kGapRatioCap);
    return r;
}

}  // namespace foldcert
