#include <algorithm>
#include <cmath>

#include "foldcert/allen_cahn.hpp"
#include "foldcert/problem.hpp"

namespace foldcert {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

Vec scalar_vec(double v) {
    Vec out(1);
    out(0) = v;
    return out;
}

/// x^2 - t. Fold at (0, 0); zeros x = +-sqrt(t).
ProblemSpec make_fold1d() {
    ProblemSpec p = make_problem(
        "fold1d", 1, -2.0, 2.0,
        [](const Vec& x, double t) { return scalar_vec(x(0) * x(0) - t); });
    p.eval_DxF = [](const Vec& x, double) {
        Mat J(1, 1);
        J(0, 0) = 2.0 * x(0);
        return J;
    };
    p.eval_dtF = [](const Vec&, double) { return scalar_vec(-1.0); };
    p.eval_D2xF_dir = [](const Vec&, double, const Vec& v) {
        return scalar_vec(2.0 * v(0) * v(0));
    };
    p.eval_dtDxF_dir = [](const Vec&, double, const Vec&) { return scalar_vec(0.0); };
    p.reference_section = [](double t) {
        std::vector<Vec> zeros;
        if (t > 0.0) {
            zeros.push_back(scalar_vec(-std::sqrt(t)));
            zeros.push_back(scalar_vec(std::sqrt(t)));
        } else if (t == 0.0) {
            zeros.push_back(scalar_vec(0.0));
        }
        return zeros;
    };
    return p;
}

/// x^3 - t x. The normal form violating condition (T2) at the origin.
ProblemSpec make_pitchfork1d() {
    ProblemSpec p = make_problem(
        "pitchfork1d", 1, -2.0, 2.0,
        [](const Vec& x, double t) { return scalar_vec(x(0) * x(0) * x(0) - t * x(0)); },
        3);
    p.eval_DxF = [](const Vec& x, double t) {
        Mat J(1, 1);
        J(0, 0) = 3.0 * x(0) * x(0) - t;
        return J;
    };
    p.eval_dtF = [](const Vec& x, double) { return scalar_vec(-x(0)); };
    p.eval_D2xF_dir = [](const Vec& x, double, const Vec& v) {
        return scalar_vec(6.0 * x(0) * v(0) * v(0));
    };
    p.eval_dtDxF_dir = [](const Vec&, double, const Vec& v) { return scalar_vec(-v(0)); };
    p.reference_section = [](double t) {
        std::vector<Vec> zeros;
        if (t > 0.0) {
            zeros.push_back(scalar_vec(-std::sqrt(t)));
            zeros.push_back(scalar_vec(0.0));
            zeros.push_back(scalar_vec(std::sqrt(t)));
        } else {
            zeros.push_back(scalar_vec(0.0));
        }
        return zeros;
    };
    return p;
}

/// Real roots of x^3 - x - t = 0 (trigonometric / Cardano split on the
/// discriminant). Test oracle only.
std::vector<Vec> cubic_load_roots(double t) {
    std::vector<Vec> zeros;
    const double disc = 4.0 - 27.0 * t * t;  // -4p^3 - 27q^2 with p=-1, q=-t
    if (disc > 0.0) {
        const double arg = std::clamp(1.5 * std::sqrt(3.0) * t, -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        const double r = 2.0 / std::sqrt(3.0);
        for (int k = 0; k < 3; ++k)
            zeros.push_back(scalar_vec(r * std::cos(theta - 2.0 * kPi * k / 3.0)));
    } else if (disc == 0.0) {
        // double root at -+1/sqrt(3), simple root at +-2/sqrt(3)
        const double s = (t > 0.0) ? 1.0 : -1.0;
        zeros.push_back(scalar_vec(-s / std::sqrt(3.0)));
        zeros.push_back(scalar_vec(2.0 * s / std::sqrt(3.0)));
    } else {
        const double q = -t;
        const double root = std::sqrt(q * q / 4.0 - 1.0 / 27.0);
        zeros.push_back(scalar_vec(std::cbrt(-q / 2.0 + root) + std::cbrt(-q / 2.0 - root)));
    }
    std::sort(zeros.begin(), zeros.end(),
              [](const Vec& a, const Vec& b) { return a(0) < b(0); });
    return zeros;
}

/// x^3 - x - l(t) with l(t) = t: the tilted double well's equilibrium
/// equation. Folds at (x, t) = (-+1/sqrt(3), +-2/(3 sqrt(3))).
ProblemSpec make_cubicload() {
    ProblemSpec p = make_problem(
        "cubicload", 1, -1.5, 1.5,
        [](const Vec& x, double t) {
            return scalar_vec(x(0) * x(0) * x(0) - x(0) - t);
        },
        3);
    p.eval_DxF = [](const Vec& x, double) {
        Mat J(1, 1);
        J(0, 0) = 3.0 * x(0) * x(0) - 1.0;
        return J;
    };
    p.eval_dtF = [](const Vec&, double) { return scalar_vec(-1.0); };
    p.eval_D2xF_dir = [](const Vec& x, double, const Vec& v) {
        return scalar_vec(6.0 * x(0) * v(0) * v(0));
    };
    p.eval_dtDxF_dir = [](const Vec&, double, const Vec&) { return scalar_vec(0.0); };
    p.reference_section = cubic_load_roots;
    return p;
}

/// (x1^2 - t, x2): the fold times a trivial stable block.
ProblemSpec make_foldprod2() {
    ProblemSpec p = make_problem("foldprod2", 2, -2.0, 2.0,
                                 [](const Vec& x, double t) {
                                     Vec out(2);
                                     out(0) = x(0) * x(0) - t;
                                     out(1) = x(1);
                                     return out;
                                 });
    p.eval_DxF = [](const Vec& x, double) {
        Mat J = Mat::Zero(2, 2);
        J(0, 0) = 2.0 * x(0);
        J(1, 1) = 1.0;
        return J;
    };
    p.eval_dtF = [](const Vec&, double) {
        Vec d(2);
        d << -1.0, 0.0;
        return d;
    };
    p.eval_D2xF_dir = [](const Vec&, double, const Vec& v) {
        Vec d(2);
        d << 2.0 * v(0) * v(0), 0.0;
        return d;
    };
    p.eval_dtDxF_dir = [](const Vec&, double, const Vec&) {
        return Vec(Vec::Zero(2));
    };
    p.reference_section = [](double t) {
        std::vector<Vec> zeros;
        if (t >= 0.0) {
            const double r = std::sqrt(t);
            Vec a = Vec::Zero(2), b = Vec::Zero(2);
            a(0) = -r;
            b(0) = r;
            zeros.push_back(a);
            if (t > 0.0) zeros.push_back(b);
        }
        return zeros;
    };
    return p;
}

/// 4-dim product of the fold with a stable (positive-spectrum) linear
/// block acting on (x2, x3, x4).
ProblemSpec make_foldprod4() {
    Mat L = Mat::Zero(3, 3);
    L << 2.0, 1.0, 0.0,
         0.0, 1.0, 0.5,
         0.0, 0.0, 3.0;
    ProblemSpec p = make_problem("foldprod4", 4, -2.0, 2.0,
                                 [L](const Vec& x, double t) {
                                     Vec out(4);
                                     out(0) = x(0) * x(0) - t;
                                     out.tail(3) = L * x.tail(3);
                                     return out;
                                 });
    p.eval_DxF = [L](const Vec& x, double) {
        Mat J = Mat::Zero(4, 4);
        J(0, 0) = 2.0 * x(0);
        J.bottomRightCorner(3, 3) = L;
        return J;
    };
    p.eval_dtF = [](const Vec&, double) {
        Vec d = Vec::Zero(4);
        d(0) = -1.0;
        return d;
    };
    p.eval_D2xF_dir = [](const Vec&, double, const Vec& v) {
        Vec d = Vec::Zero(4);
        d(0) = 2.0 * v(0) * v(0);
        return d;
    };
    p.eval_dtDxF_dir = [](const Vec&, double, const Vec&) {
        return Vec(Vec::Zero(4));
    };
    p.reference_section = [](double t) {
        std::vector<Vec> zeros;
        if (t >= 0.0) {
            const double r = std::sqrt(t);
            Vec a = Vec::Zero(4), b = Vec::Zero(4);
            a(0) = -r;
            b(0) = r;
            zeros.push_back(a);
            if (t > 0.0) zeros.push_back(b);
        }
        return zeros;
    };
    return p;
}

AllenCahnConfig catalog_ac_config(int m) {
    AllenCahnConfig cfg;
    cfg.m = m;
    cfg.load_expr = "t";
    // Length above pi so the double well dominates the gradient term and the
    // tilted-well hysteresis (the fold pair) is present; kept below 2*pi so
    // the only equilibria at zero load are the two phases and the saddle.
    cfg.domain_length = 6.0;
    cfg.t_lo = -1.5;
    cfg.t_hi = 1.5;
    cfg.name = "allencahn" + std::to_string(m);
    return cfg;
}

}  // namespace

std::vector<std::string> catalog_names() {
    return {"fold1d",    "pitchfork1d", "cubicload",  "foldprod2",
            "foldprod4", "allencahn32", "allencahn64"};
}

ProblemSpec builtin_catalog(const std::string& name) {
    if (name == "fold1d") return make_fold1d();
    if (name == "pitchfork1d") return make_pitchfork1d();
    if (name == "cubicload") return make_cubicload();
    if (name == "foldprod2") return make_foldprod2();
    if (name == "foldprod4") return make_foldprod4();
    if (name == "allencahn32") return build_allen_cahn(catalog_ac_config(32)).problem;
    if (name == "allencahn64") return build_allen_cahn(catalog_ac_config(64)).problem;
    raise(ErrorKind::NotFound, "unknown catalog problem '" + name + "'");
}

}  // namespace foldcert
