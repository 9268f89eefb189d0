#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "foldcert/errors.hpp"

namespace foldcert {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A point (x, t) of the extended phase space R^n x (t_lo, t_hi).
struct Point {
    Vec x;
    double t = 0.0;
};

/// Parameterized square system F : R^n x (t_lo, t_hi) -> R^n with uniform
/// derivative access. Analytic callbacks are optional; evaluation falls back
/// to central finite differences (steps below). Immutable after
/// construction; all evaluation is reentrant.
struct ProblemSpec {
    std::string name;
    int dim = 0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    int smoothness_order = 2;

    std::function<Vec(const Vec&, double)> eval_F;
    // Optional analytic derivatives (empty std::function when absent).
    std::function<Mat(const Vec&, double)> eval_DxF;
    std::function<Vec(const Vec&, double)> eval_dtF;
    // Directional second derivative D^2_x F(x,t)[v,v].
    std::function<Vec(const Vec&, double, const Vec&)> eval_D2xF_dir;
    // Mixed derivative d/dt (D_x F(x,t)[v]).
    std::function<Vec(const Vec&, double, const Vec&)> eval_dtDxF_dir;

    // Closed-form zero set section, carried by catalog fixtures for tests
    // only. Never consulted by solvers.
    std::function<std::vector<Vec>(double)> reference_section;

    bool has_analytic_jacobian() const { return static_cast<bool>(eval_DxF); }
    bool in_t_range(double t) const { return t > t_lo && t < t_hi; }
};

/// Validates dim >= 1, t_lo < t_hi and the presence of eval_F.
/// Rectangular systems cannot be expressed (eval_F output length is checked
/// against dim at every evaluation).
ProblemSpec make_problem(std::string name, int dim, double t_lo, double t_hi,
                         std::function<Vec(const Vec&, double)> F,
                         int smoothness_order = 2);

/// Finite-difference step conventions.
double fd_step_jacobian(const Vec& x);   // 1e-6 * max(1, |x|)
double fd_step_second(const Vec& x);     // 1e-4 * max(1, |x|)

/// Hard domain check: x finite, t strictly inside (t_lo, t_hi).
void check_in_domain(const ProblemSpec& p, const Point& pt);

/// F(x, t). Throws Error(Evaluation) on non-finite output (message carries
/// the offending point) and Error(Domain) outside the domain.
Vec eval(const ProblemSpec& p, const Point& pt);

/// D_x F(x, t); analytic callback if present, else central differences with
/// step fd_step_jacobian. Columns indexed by perturbed coordinate.
Mat jacobian_x(const ProblemSpec& p, const Point& pt);

/// dF/dt(x, t).
Vec dt_F(const ProblemSpec& p, const Point& pt);

/// D^2_x F(x, t)[v, v], analytic or the second directional difference
/// (F(x+hv) - 2 F(x) + F(x-hv)) / h^2.
Vec d2x_F_dir(const ProblemSpec& p, const Point& pt, const Vec& v);

/// d/dt (D_x F(x,t)[v]), analytic or central t-difference of the
/// Jacobian-vector product.
Vec dt_jacobian_dir(const ProblemSpec& p, const Point& pt, const Vec& v);

/// The n x (n+1) total differential [D_x F | dF/dt]; applied to (v, tau)
/// it gives D_x F[v] + tau * dF/dt.
Mat total_differential(const ProblemSpec& p, const Point& pt);

/// Recovers the bilinear form D^2_x F(x,t)[v, e_j] for all j from the
/// directional-quadratic interface:
///   D^2F[v, e] = (D^2F[v+e, v+e] - D^2F[v-e, v-e]) / 4.
/// Returns the n x n matrix whose column j is D^2_x F[v, e_j].
Mat d2x_F_bilinear(const ProblemSpec& p, const Point& pt, const Vec& v);

/// Names available through builtin_catalog().
std::vector<std::string> catalog_names();

/// Looks up a catalog fixture by name; Error(NotFound) for unknown names.
/// Contains at minimum: "fold1d" (x^2 - t), "pitchfork1d" (x^3 - t x),
/// "cubicload" (x^3 - x - t), "foldprod2" ((x1^2 - t, x2)),
/// "foldprod4" (fold times a 3-dim stable linear block), and the
/// Allen-Cahn discretizations "allencahn32"/"allencahn64".
ProblemSpec builtin_catalog(const std::string& name);

/// Builds a ProblemSpec from expression strings in variables x1..xn, t.
/// Derivatives are finite-differenced.
ProblemSpec problem_from_expressions(std::string name, int dim, double t_lo,
                                     double t_hi,
                                     const std::vector<std::string>& exprs,
                                     int smoothness_order = 2);

/// FNV-1a hash of the problem identity (name, dim, t-range), used in output
/// metadata.
std::uint64_t problem_hash(const ProblemSpec& p);

}  // namespace foldcert
