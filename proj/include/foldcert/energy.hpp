#pragma once

#include <functional>
#include <string>
#include <vector>

#include "foldcert/problem.hpp"

namespace foldcert {

/// Gradient-system specialization: problem.eval_F is the spatial gradient
/// of eval_E, the Jacobian is the (symmetric) Hessian, and third directional
/// derivatives are available. For mass-lumped discretizations the duality
/// pairing carries a quadrature weight: d/ds E(x + s v) = inner_weight *
/// <F(x,t), v>. Model problems use inner_weight = 1.
struct EnergyProblem {
    ProblemSpec problem;
    std::function<double(const Vec&, double)> eval_E;
    std::function<double(const Vec&, double, const Vec&)> eval_D3_dir;  // D^3E[v,v,v]
    std::function<Vec(const Vec&, double)> eval_dtDxE;  // defaults to dt_F
    double inner_weight = 1.0;
};

double energy_value(const EnergyProblem& ep, const Vec& x, double t);

/// D^3_x E(x,t)[v,v,v]; analytic when available, else a third central
/// directional difference of eval_E.
double d3_dir(const EnergyProblem& ep, const Vec& x, double t, const Vec& v);

Vec dt_gradient(const EnergyProblem& ep, const Vec& x, double t);

/// Energy fixtures:
///   "energy_fold1d"    E = x^3/3 - t x   (F = x^2 - t)
///   "energy_quartic1d" E = x^4/4 - t x   (F = x^3 - t)
///   "energy_doublewell1d" E = x^4/4 - x^2/2 - t x (F = x^3 - x - t)
///   "allencahn32" / "allencahn64"  (see allen_cahn.hpp)
std::vector<std::string> energy_catalog_names();
EnergyProblem energy_catalog(const std::string& name);

}  // namespace foldcert
