#include "foldcert/energy.hpp"

#include <cmath>

#include "foldcert/allen_cahn.hpp"

namespace foldcert {

namespace {

Vec scalar_vec(double v) {
    Vec out(1);
    out(0) = v;
    return out;
}

/// E = x^3/3 - t x, F = x^2 - t. Transversal fold of the energy at (0,0).
EnergyProblem make_energy_fold1d() {
    EnergyProblem ep;
    ep.problem = builtin_catalog("fold1d");
    ep.problem.name = "energy_fold1d";
    ep.eval_E = [](const Vec& x, double t) {
        return x(0) * x(0) * x(0) / 3.0 - t * x(0);
    };
    ep.eval_D3_dir = [](const Vec&, double, const Vec& v) {
        return 2.0 * v(0) * v(0) * v(0);
    };
    return ep;
}

/// E = x^4/4 - t x, F = x^3 - t. D^3E vanishes on the kernel at the
/// origin: the (E3)-failure fixture.
EnergyProblem make_energy_quartic1d() {
    EnergyProblem ep;
    ProblemSpec p = make_problem(
        "energy_quartic1d", 1, -2.0, 2.0,
        [](const Vec& x, double t) { return scalar_vec(x(0) * x(0) * x(0) - t); }, 3);
    p.eval_DxF = [](const Vec& x, double) {
        Mat J(1, 1);
        J(0, 0) = 3.0 * x(0) * x(0);
        return J;
    };
    p.eval_dtF = [](const Vec&, double) { return scalar_vec(-1.0); };
    p.eval_D2xF_dir = [](const Vec& x, double, const Vec& v) {
        return scalar_vec(6.0 * x(0) * v(0) * v(0));
    };
    p.eval_dtDxF_dir = [](const Vec&, double, const Vec&) { return scalar_vec(0.0); };
    p.reference_section = [](double t) {
        std::vector<Vec> zeros;
        zeros.push_back(scalar_vec(std::cbrt(t)));
        return zeros;
    };
    ep.problem = std::move(p);
    ep.eval_E = [](const Vec& x, double t) {
        const double x2 = x(0) * x(0);
        return x2 * x2 / 4.0 - t * x(0);
    };
    ep.eval_D3_dir = [](const Vec& x, double, const Vec& v) {
        return 6.0 * x(0) * v(0) * v(0) * v(0);
    };
    return ep;
}

/// E = x^4/4 - x^2/2 - t x, F = x^3 - x - t (the cubic-load problem).
EnergyProblem make_energy_doublewell1d() {
    EnergyProblem ep;
    ep.problem = builtin_catalog("cubicload");
    ep.problem.name = "energy_doublewell1d";
    ep.eval_E = [](const Vec& x, double t) {
        const double x2 = x(0) * x(0);
        return x2 * x2 / 4.0 - x2 / 2.0 - t * x(0);
    };
    ep.eval_D3_dir = [](const Vec& x, double, const Vec& v) {
        return 6.0 * x(0) * v(0) * v(0) * v(0);
    };
    return ep;
}

AllenCahnConfig catalog_ac_config(int m) {
    AllenCahnConfig cfg;
    cfg.m = m;
    cfg.load_expr = "t";
    cfg.domain_length = 6.0;
    cfg.t_lo = -1.5;
    cfg.t_hi = 1.5;
    cfg.name = "allencahn" + std::to_string(m);
    return cfg;
}

}  // namespace

double energy_value(const EnergyProblem& ep, const Vec& x, double t) {
    check_in_domain(ep.problem, Point{x, t});
    if (!ep.eval_E)
        raise(ErrorKind::Usage, ep.problem.name + ": no energy callback");
    const double e = ep.eval_E(x, t);
    if (!std::isfinite(e))
        raise(ErrorKind::Evaluation, ep.problem.name + ": non-finite energy");
    return e;
}

double d3_dir(const EnergyProblem& ep, const Vec& x, double t, const Vec& v) {
    check_in_domain(ep.problem, Point{x, t});
    if (!v.allFinite())
        raise(ErrorKind::Domain, ep.problem.name + ": non-finite direction");
    if (ep.eval_D3_dir) {
        const double d = ep.eval_D3_dir(x, t, v);
        if (!std::isfinite(d))
            raise(ErrorKind::Evaluation, ep.problem.name + ": non-finite D3E[v,v,v]");
        return d;
    }
    // Third central directional difference of E, O(h^2).
    const double h = 1e-3 * std::max(1.0, x.norm());
    const double e_p2 = ep.eval_E(x + 2.0 * h * v, t);
    const double e_p1 = ep.eval_E(x + h * v, t);
    const double e_m1 = ep.eval_E(x - h * v, t);
    const double e_m2 = ep.eval_E(x - 2.0 * h * v, t);
    const double d = (e_p2 - 2.0 * e_p1 + 2.0 * e_m1 - e_m2) / (2.0 * h * h * h);
    if (!std::isfinite(d))
        raise(ErrorKind::Evaluation, ep.problem.name + ": non-finite D3E difference");
    return d;
}

Vec dt_gradient(const EnergyProblem& ep, const Vec& x, double t) {
    if (ep.eval_dtDxE) {
        const Vec d = ep.eval_dtDxE(x, t);
        if (!d.allFinite())
            raise(ErrorKind::Evaluation, ep.problem.name + ": non-finite dt DxE");
        return d;
    }
    return dt_F(ep.problem, Point{x, t});
}

std::vector<std::string> energy_catalog_names() {
    return {"energy_fold1d", "energy_quartic1d", "energy_doublewell1d",
            "allencahn32", "allencahn64"};
}

EnergyProblem energy_catalog(const std::string& name) {
    if (name == "energy_fold1d") return make_energy_fold1d();
    if (name == "energy_quartic1d") return make_energy_quartic1d();
    if (name == "energy_doublewell1d") return make_energy_doublewell1d();
    if (name == "allencahn32") return build_allen_cahn(catalog_ac_config(32));
    if (name == "allencahn64") return build_allen_cahn(catalog_ac_config(64));
    raise(ErrorKind::NotFound, "unknown energy problem '" + name + "'");
}

}  // namespace foldcert
