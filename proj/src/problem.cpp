#include "foldcert/problem.hpp"

#include <cmath>
#include <sstream>

#include "foldcert/expression.hpp"

namespace foldcert {

namespace {

std::string describe_point(const Vec& x, double t) {
    std::ostringstream os;
    os << "(x = [";
    for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
    os << "], t = " << t << ")";
    return os.str();
}

/// Raw callback evaluation with output validation. Derivative stencils go
/// through here so that a step of size h near the t-range boundary does not
/// trip the open-interval domain check.
Vec eval_raw(const ProblemSpec& p, const Vec& x, double t) {
    const Vec out = p.eval_F(x, t);
    if (out.size() != p.dim)
        raise(ErrorKind::DimensionMismatch,
              p.name + ": eval_F returned length " + std::to_string(out.size()) +
                  ", expected " + std::to_string(p.dim));
    if (!out.allFinite())
        raise(ErrorKind::Evaluation,
              p.name + ": non-finite F at " + describe_point(x, t));
    return out;
}

void check_finite(const ProblemSpec& p, const Mat& m, const char* what, const Point& pt) {
    if (!m.allFinite())
        raise(ErrorKind::Evaluation, p.name + ": non-finite " + what + " at " +
                                         describe_point(pt.x, pt.t));
}

}  // namespace

ProblemSpec make_problem(std::string name, int dim, double t_lo, double t_hi,
                         std::function<Vec(const Vec&, double)> F,
                         int smoothness_order) {
    if (dim < 1)
        raise(ErrorKind::DimensionMismatch, name + ": dim must be >= 1");
    if (!(t_lo < t_hi))
        raise(ErrorKind::Domain, name + ": empty t-range");
    if (!F) raise(ErrorKind::Usage, name + ": eval_F is required");
    if (smoothness_order < 2)
        raise(ErrorKind::Usage, name + ": smoothness_order must be >= 2");
    ProblemSpec p;
    p.name = std::move(name);
    p.dim = dim;
    p.t_lo = t_lo;
    p.t_hi = t_hi;
    p.eval_F = std::move(F);
    p.smoothness_order = smoothness_order;
    return p;
}

double fd_step_jacobian(const Vec& x) { return 1e-6 * std::max(1.0, x.norm()); }
double fd_step_second(const Vec& x) { return 1e-4 * std::max(1.0, x.norm()); }

void check_in_domain(const ProblemSpec& p, const Point& pt) {
    if (pt.x.size() != p.dim)
        raise(ErrorKind::DimensionMismatch,
              p.name + ": point has dim " + std::to_string(pt.x.size()) +
                  ", problem has dim " + std::to_string(p.dim));
    if (!pt.x.allFinite() || !std::isfinite(pt.t))
        raise(ErrorKind::Domain, p.name + ": non-finite point");
    if (!p.in_t_range(pt.t))
        raise(ErrorKind::Domain,
              p.name + ": t = " + std::to_string(pt.t) + " outside (" +
                  std::to_string(p.t_lo) + ", " + std::to_string(p.t_hi) + ")");
}

Vec eval(const ProblemSpec& p, const Point& pt) {
    check_in_domain(p, pt);
    return eval_raw(p, pt.x, pt.t);
}

Mat jacobian_x(const ProblemSpec& p, const Point& pt) {
    check_in_domain(p, pt);
    if (p.eval_DxF) {
        const Mat J = p.eval_DxF(pt.x, pt.t);
        if (J.rows() != p.dim || J.cols() != p.dim)
            raise(ErrorKind::DimensionMismatch, p.name + ": eval_DxF shape mismatch");
        check_finite(p, J, "Jacobian", pt);
        return J;
    }
    const double h = fd_step_jacobian(pt.x);
    Mat J(p.dim, p.dim);
    Vec xp = pt.x, xm = pt.x;
    for (int j = 0; j < p.dim; ++j) {
        xp(j) += h;
        xm(j) -= h;
        J.col(j) = (eval_raw(p, xp, pt.t) - eval_raw(p, xm, pt.t)) / (2.0 * h);
        xp(j) = pt.x(j);
        xm(j) = pt.x(j);
    }
    return J;
}

Vec dt_F(const ProblemSpec& p, const Point& pt) {
    check_in_domain(p, pt);
    if (p.eval_dtF) {
        const Vec d = p.eval_dtF(pt.x, pt.t);
        check_finite(p, d, "dF/dt", pt);
        return d;
    }
    const double h = fd_step_jacobian(pt.x);
    return (eval_raw(p, pt.x, pt.t + h) - eval_raw(p, pt.x, pt.t - h)) / (2.0 * h);
}

Vec d2x_F_dir(const ProblemSpec& p, const Point& pt, const Vec& v) {
    check_in_domain(p, pt);
    if (!v.allFinite())
        raise(ErrorKind::Domain, p.name + ": non-finite direction");
    if (v.size() != p.dim)
        raise(ErrorKind::DimensionMismatch, p.name + ": direction dim mismatch");
    if (p.eval_D2xF_dir) {
        const Vec d = p.eval_D2xF_dir(pt.x, pt.t, v);
        check_finite(p, d, "D2F[v,v]", pt);
        return d;
    }
    const double h = fd_step_second(pt.x);
    return (eval_raw(p, pt.x + h * v, pt.t) - 2.0 * eval_raw(p, pt.x, pt.t) +
            eval_raw(p, pt.x - h * v, pt.t)) /
           (h * h);
}

Vec dt_jacobian_dir(const ProblemSpec& p, const Point& pt, const Vec& v) {
    check_in_domain(p, pt);
    if (p.eval_dtDxF_dir) {
        const Vec d = p.eval_dtDxF_dir(pt.x, pt.t, v);
        check_finite(p, d, "dt DxF[v]", pt);
        return d;
    }
    const double h = fd_step_jacobian(pt.x);
    // Stencil-internal evaluations bypass the open-interval domain check.
    auto jac_at = [&](double t) {
        if (p.eval_DxF) return p.eval_DxF(pt.x, t);
        Mat J(p.dim, p.dim);
        const double hj = fd_step_jacobian(pt.x);
        Vec xp = pt.x, xm = pt.x;
        for (int j = 0; j < p.dim; ++j) {
            xp(j) += hj;
            xm(j) -= hj;
            J.col(j) = (eval_raw(p, xp, t) - eval_raw(p, xm, t)) / (2.0 * hj);
            xp(j) = pt.x(j);
            xm(j) = pt.x(j);
        }
        return J;
    };
    const Vec d = (jac_at(pt.t + h) * v - jac_at(pt.t - h) * v) / (2.0 * h);
    if (!d.allFinite())
        raise(ErrorKind::Evaluation, p.name + ": non-finite dt DxF[v]");
    return d;
}

Mat total_differential(const ProblemSpec& p, const Point& pt) {
    Mat d(p.dim, p.dim + 1);
    d.leftCols(p.dim) = jacobian_x(p, pt);
    d.col(p.dim) = dt_F(p, pt);
    return d;
}

Mat d2x_F_bilinear(const ProblemSpec& p, const Point& pt, const Vec& v) {
    Mat B(p.dim, p.dim);
    Vec e = Vec::Zero(p.dim);
    for (int j = 0; j < p.dim; ++j) {
        e(j) = 1.0;
        B.col(j) = (d2x_F_dir(p, pt, v + e) - d2x_F_dir(p, pt, v - e)) / 4.0;
        e(j) = 0.0;
    }
    return B;
}

ProblemSpec problem_from_expressions(std::string name, int dim, double t_lo,
                                     double t_hi,
                                     const std::vector<std::string>& exprs,
                                     int smoothness_order) {
    if (static_cast<int>(exprs.size()) != dim)
        raise(ErrorKind::DimensionMismatch,
              name + ": got " + std::to_string(exprs.size()) + " expressions for dim " +
                  std::to_string(dim));
    std::vector<std::string> vars;
    vars.reserve(dim + 1);
    for (int i = 1; i <= dim; ++i) vars.push_back("x" + std::to_string(i));
    vars.push_back("t");

    auto compiled = std::make_shared<std::vector<Expression>>();
    compiled->reserve(dim);
    for (const auto& e : exprs) compiled->push_back(Expression::parse(e, vars));

    auto F = [compiled, dim](const Vec& x, double t) {
        std::vector<double> vals(dim + 1);
        for (int i = 0; i < dim; ++i) vals[i] = x(i);
        vals[dim] = t;
        Vec out(dim);
        for (int i = 0; i < dim; ++i) out(i) = (*compiled)[i].eval(vals);
        return out;
    };
    return make_problem(std::move(name), dim, t_lo, t_hi, F, smoothness_order);
}

std::uint64_t problem_hash(const ProblemSpec& p) {
    std::ostringstream os;
    os << p.name << '|' << p.dim << '|' << p.t_lo << '|' << p.t_hi << '|'
       << p.smoothness_order;
    const std::string s = os.str();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace foldcert
