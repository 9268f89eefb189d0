#pragma once

#include <cstdint>
#include <vector>

#include "foldcert/continuation.hpp"
#include "foldcert/rng.hpp"

namespace foldcert {

/// Additive perturbation F~(x,t) = F(x,t) + y + K x.
struct PerturbationSample {
    Vec y;
    Mat K;
    double radius = 0.0;
    std::uint64_t seed = 0;
};

/// Energy perturbation E~ = E + <ell, x> + 1/2 <K x, x> with K symmetric,
/// i.e. F~ = F + ell + K x on the gradient.
struct SymmetricPerturbation {
    Vec ell;
    Mat Kform;  // stored exactly symmetric
};

enum class SampleOutcome { AllFoldsTransversal, SomeNonTransversal, InconclusiveNumerics };

const char* to_string(SampleOutcome o);

struct GenericityReport {
    int n_samples = 0;
    double radius = 0.0;
    std::uint64_t master_seed = 0;
    std::vector<SampleOutcome> outcomes;
    double failure_fraction = 0.0;  // SomeNonTransversal / n_samples
    int n_inconclusive = 0;
    SampleOutcome unperturbed_outcome = SampleOutcome::InconclusiveNumerics;
    int total_folds_certified = 0;
    ScanConfig scan;
    std::string distribution = "iid uniform entries, product-Frobenius ball";
};

/// Derivative callbacks compose exactly: D_x F~ = D_x F + K, dF~/dt = dF/dt,
/// D^2_x F~ = D^2_x F.
ProblemSpec perturb_problem(const ProblemSpec& p, const PerturbationSample& s);

EnergyProblem perturb_energy(const EnergyProblem& ep, const SymmetricPerturbation& sp);

/// Entries of (y, K) i.i.d. uniform on [-r/sqrt(n + n^2), +r/sqrt(n + n^2)];
/// the pair is rescaled onto the ball if its product Frobenius norm exceeds
/// the radius.
PerturbationSample sample_perturbation(Rng& rng, int n, double radius);

/// Monte-Carlo realization of the genericity statement: for each sample the
/// perturbed problem is scanned for folds (scan_folds), every fold is
/// certified, and the sample is classified. Numerical failures are recorded
/// as InconclusiveNumerics, never dropped. The unperturbed problem is always
/// scanned too. Samples run on a parallel map with per-sample seeds derived
/// from (master_seed, index).
GenericityReport genericity_experiment(const ProblemSpec& p, int n_samples,
                                       double radius, const ScanConfig& scan,
                                       std::uint64_t master_seed = kDefaultSeed);

/// Rank-one rescue K = w (ell / <ell, v>)^T so that K v = w exactly.
/// Throws Error(DegeneratePairing) when <ell, v> = 0.
Mat rescue_linear(const Vec& v, const Vec& w, const Vec& ell);

/// Symmetric rescue with K x = ell exactly:
///   <ell, x> != 0 : K = ell ell^T / <ell, x>
///   <ell, x>  = 0 : K = ell x*^T + x* ell^T with x* = x / |x|^2.
/// Throws Error(ZeroInput) when x = 0 or ell = 0.
Mat rescue_symmetric(const Vec& x, const Vec& ell);

/// Full-regularity check of the extended differential of the augmented
/// family G(x,t,v,y,K): the 2n x (2n+1+n+n^2) matrix
///   [ dG_total | I  | K~ -> K~ x ]
///   [          | 0  | K~ -> K~ v ]
/// tested for rank 2n at a zero of G.
OntoReport check_full_regularity(const ProblemSpec& p, const AugmentedPoint& q,
                                 const TolPolicy& tols = {});

}  // namespace foldcert
