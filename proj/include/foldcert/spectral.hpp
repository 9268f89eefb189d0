#pragma once

#include <vector>

#include "foldcert/problem.hpp"

namespace foldcert {

/// Tolerance policy shared by the rank/kernel/certificate machinery.
/// rank_tol: singular values sigma <= rank_tol * sigma_max count as zero.
/// kernel_gap_min: a kernel is declared one-dimensional only when
///   sigma_next / sigma_min >= kernel_gap_min on top of the smallness test.
/// margin_tol: strict-inequality conditions pass when the margin exceeds it.
/// zero_tol_base: membership in the zero set requires
///   |F| <= zero_tol_base * (1 + |x|).
struct TolPolicy {
    double rank_tol = 1e-8;
    double kernel_gap_min = 1e4;
    double margin_tol = 1e-6;
    double zero_tol_base = 1e-9;

    double zero_tol(const Vec& x) const { return zero_tol_base * (1.0 + x.norm()); }
};

/// gap_ratio values are capped here so reports stay JSON-representable.
inline constexpr double kGapRatioCap = 1e300;
inline constexpr double kSigmaFloor = 1e-300;

/// Kernel/cokernel pair of a square matrix from its full SVD. v spans the
/// near-null space of J, w_star the near-null space of J^T (the annihilator
/// of the range). Sign convention: the first component of magnitude
/// > 1e-12 is positive, applied to v and w_star independently.
struct KernelPair {
    Vec v;
    Vec w_star;
    double sigma_min = 0.0;
    double sigma_next = 0.0;   // = kGapRatioCap for 1x1 matrices
    double gap_ratio = 0.0;    // sigma_next / max(sigma_min, kSigmaFloor)
};

struct RankReport {
    int rows = 0;
    int cols = 0;
    int numerical_rank = 0;
    std::vector<double> singular_values;  // descending
    bool surjective = false;              // numerical_rank == rows
    double rank_tolerance_used = 0.0;
};

struct InvertibilityReport {
    bool invertible = false;
    double condition = 0.0;  // sigma_max / sigma_min
};

KernelPair kernel_pair(const Mat& J, const TolPolicy& tols = {});

RankReport rank_report(const Mat& M, const TolPolicy& tols = {});

/// true iff sigma_min > rank_tol * sigma_max.
InvertibilityReport is_invertible(const Mat& J, const TolPolicy& tols = {});

}  // namespace foldcert
