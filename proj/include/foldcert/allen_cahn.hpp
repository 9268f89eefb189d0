#pragma once

#include <string>
#include <vector>

#include "foldcert/continuation.hpp"
#include "foldcert/energy.hpp"
#include "foldcert/transversality.hpp"

namespace foldcert {

/// 1-D finite-difference Allen-Cahn energy on (0, length) with homogeneous
/// Dirichlet conditions, m interior nodes, spacing h = length/(m+1):
///   E_h(u, t) = h * [ sum_i 1/2 ((u_{i+1}-u_i)/h)^2
///                     + W(u_i) - l(t) p_i u_i + y_i u_i + 1/2 z_i u_i^2 ]
/// with W(u) = (u^2-1)^2 / 4, load l(t) * profile, additive perturbation y
/// and multiplicative perturbation z. The gradient with respect to the
/// lumped pairing h * <.,.> is
///   F(u, t) = A_h u + W'(u) - l(t) p + y + z .* u,
/// A_h the second-difference Dirichlet Laplacian (sign of -Laplace).
/// Hessian = A_h + diag(3 u^2 - 1 + z); D^3E[v,v,v] = h * sum 6 u_i v_i^3.
struct AllenCahnConfig {
    int m = 64;
    std::string load_expr = "t";   // amplitude path l(t), variable t
    double domain_length = 1.0;
    double t_lo = -2.0;
    double t_hi = 2.0;
    Vec profile;  // defaults to all ones
    Vec y;        // defaults to zero
    Vec z;        // defaults to zero
    std::string name;  // defaults to "allencahn<m>"
};

/// Builds the EnergyProblem (analytic gradient, Hessian, mixed and third
/// derivatives). Throws Error(BadLoadExpression) for an unparsable load and
/// Error(DimensionMismatch) for profile/y/z of the wrong length.
EnergyProblem build_allen_cahn(const AllenCahnConfig& cfg);

/// The m x m Dirichlet Laplacian matrix used by the builder (exposed for
/// tests: eigenvalues are 4/h^2 sin^2(k pi h / (2 length))).
Mat allen_cahn_laplacian(int m, double length);

struct SweepResult {
    std::vector<FoldRecord> folds;                  // general-form records
    std::vector<EnergyCertificate> energy_certificates;  // one per fold
    BranchCurve branch;                             // the traced S-curve
};

/// Multistart enumeration at the endpoints of the amplitude range (constant
/// and sine-mode profiles), branch tracing across the range, fold refinement
/// and energy certification at every fold.
SweepResult sweep_and_certify(const EnergyProblem& ep, double amp_lo, double amp_hi,
                              const StepConfig& cfg = {});

/// Newton starts used by the sweep and by the section scans: constant
/// profiles c * 1 and first-sine-mode bumps c * sin(pi x / L).
std::vector<Vec> allen_cahn_starts(int m, double lo = -1.5, double hi = 1.5,
                                   int count = 13);

}  // namespace foldcert
