#pragma once

#include <string>
#include <vector>

#include "foldcert/energy.hpp"
#include "foldcert/spectral.hpp"

namespace foldcert {

enum class Classification { Regular, TransversalSingular, NonTransversal };

/// Conditions that can fail at a singular zero. T* is the general form,
/// E* the energy (gradient) form.
enum class Cond { T1, T2, T3, E1, E2, E3 };

const char* to_string(Classification c);
const char* to_string(Cond c);

/// Certificate for a point of the zero set. At a singular zero with a
/// one-dimensional kernel the margins are
///   t2_margin = |<dF/dt, w*>|,  t3_margin = |<D^2_x F[v,v], w*>|
/// with unit v, w*. Margins are NaN at Regular points.
struct TransversalityCertificate {
    Point point;
    Classification classification = Classification::Regular;
    KernelPair kernel;   // empty vectors at Regular points
    double t2_margin = 0.0;
    double t3_margin = 0.0;
    std::vector<Cond> failures;
    double residual_norm = 0.0;
    TolPolicy tolerances_used;
    bool ambiguous_kernel = false;  // near rank-2 deficiency diagnostic
    double condition_estimate = 0.0;  // sigma_max/sigma_min of D_x F
};

/// Energy-form certificate. The cokernel functional is the kernel vector
/// itself (symmetric Hessian):
///   e2_margin = |<d/dt D_x E, v>|,  e3_margin = |D^3_x E[v,v,v]|.
struct EnergyCertificate {
    Point point;
    Classification classification = Classification::Regular;
    KernelPair kernel;
    double e2_margin = 0.0;
    double e3_margin = 0.0;
    std::vector<Cond> failures;
    double residual_norm = 0.0;
    TolPolicy tolerances_used;
    bool ambiguous_kernel = false;
    double self_duality_gap = 0.0;  // min over signs of |v -+ w*|
};

/// A point of the extended space carrying a kernel direction candidate.
struct AugmentedPoint {
    Vec x;
    double t = 0.0;
    Vec v;  // nonzero; solvers keep |v| = 1 via the normalization row
};

/// Certifies a point of the zero set. Throws Error(NotOnZeroSet) when
/// |F| > zero_tol. Near rank-2 deficiency (smallness without the spectral
/// gap) is reported as NonTransversal with failure T1 and the
/// ambiguous_kernel flag set, not thrown.
TransversalityCertificate certify(const ProblemSpec& p, const Point& pt,
                                  const TolPolicy& tols = {});

/// Energy-form certification with F = D_x E. Throws Error(HessianAsymmetry)
/// if |H - H^T| > 1e-8 |H|.
EnergyCertificate certify_energy(const EnergyProblem& ep, const Point& pt,
                                 const TolPolicy& tols = {});

/// G(x, t, v) = (F(x,t), D_x F(x,t)[v]) in R^{2n}.
Vec augmented_G(const ProblemSpec& p, const AugmentedPoint& q);

/// Total differential of G, a 2n x (2n+1) matrix with columns ordered
/// (x~ in R^n, t~ in R, v~ in R^n):
///   row block 1: [ D_x F         | dF/dt          | 0     ]
///   row block 2: [ D^2_xF[v, .]  | d/dt D_xF [v]  | D_x F ]
Mat dG_total(const ProblemSpec& p, const AugmentedPoint& q);

struct OntoReport {
    bool onto = false;
    RankReport report;
};

/// (0,0) regular-value test at a zero of G: surjectivity (rank 2n) of
/// dG_total. Throws Error(NotOnZeroSetOfG) if |G(q)| > zero_tol.
OntoReport check_regular_value_G(const ProblemSpec& p, const AugmentedPoint& q,
                                 const TolPolicy& tols = {});

/// Surjectivity of the n x (n+1) total differential at a zero of F.
OntoReport check_dF_onto(const ProblemSpec& p, const Point& pt,
                         const TolPolicy& tols = {});

/// True when the certificate does not fail conditions 1 or 2 (Regular
/// points pass vacuously: D_x F alone is already onto).
bool passes_t1_t2(const TransversalityCertificate& cert);

}  // namespace foldcert
