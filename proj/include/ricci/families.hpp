#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ricci/expression.hpp"
#include "ricci/fields.hpp"
#include "ricci/soliton.hpp"

namespace ricci {

// ---------------------------------------------------------------------------
// Shipped metric families. Both live on the chart (u, v, x1, ..., xn):
//
//   plane-fronted wave   g = du dv + f(u) sum (dx_i)^2          (profile f > 0)
//   symmetric wave       g = (sum k_i x_i^2) du^2 + du dv + sum (dx_i)^2
//
// together with every soliton vector field and gradient potential these
// metrics admit. Constructors validate the constraint equations on the free
// constants; candidates that cannot satisfy the defining equation are
// rejected here rather than left to fail numerically downstream.
// ---------------------------------------------------------------------------

constexpr std::size_t kMaxTransverseDimension = 12; // keeps d^4 tensors desk-scale
constexpr std::size_t kDomainProbes = 1000;
constexpr double kProfileFloor = 1e-9;
constexpr double kConstraintTol = 1e-8;
constexpr double kSkewTol = 1e-12;

/// Chart (u, v, x1, ..., xn) shared by every family.
inline Chart family_chart(std::size_t n) {
    std::vector<std::string> names = {"u", "v"};
    for (std::size_t i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    return Chart(names);
}

/// Open interval used as the validity range of a wave profile.
struct Interval {
    double lo = -1.0;
    double hi = 1.0;

    Interval() = default;
    Interval(double a, double b) : lo(a), hi(b) {
        if (!(std::isfinite(a) && std::isfinite(b) && a < b))
            throw ValidationError("interval endpoints must be finite with lo < hi");
    }
    double midpoint() const { return 0.5 * (lo + hi); }
    double probe(std::size_t k) const {
        return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(kDomainProbes - 1);
    }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

namespace detail {

inline void check_transverse(std::size_t n) {
    if (n < 1) throw ValidationError("family needs at least one transverse coordinate");
    if (n > kMaxTransverseDimension)
        throw ValidationError("transverse dimension exceeds the supported maximum of 12");
}

inline void check_univariate(const Expression& e, const char* what) {
    for (const auto& s : free_symbols(e))
        if (s != "u")
            throw ValidationError(std::string(what) + " may depend on u only, found symbol '" + s + "'");
}

inline std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

} // namespace detail

// ---------------------------------------------------------------------------
// Plane-fronted wave with profile f(u)
// ---------------------------------------------------------------------------

/// Profile data: dimension n, positive profile f(u), and the u-interval on
/// which positivity was requested. Positivity is probed on 1000 equispaced
/// points; evaluation elsewhere is the caller's risk.
class EgorovParams {
public:
    EgorovParams(std::size_t n, Expression f, Interval u_domain)
        : n_(n), f_(simplify(f)), domain_(u_domain) {
        detail::check_transverse(n);
        detail::check_univariate(f_, "profile f");
        Bindings env;
        env.set("u", 0.0);
        for (std::size_t k = 0; k < kDomainProbes; ++k) {
            env.set("u", domain_.probe(k));
            double v = evaluate(f_, env);
            if (!(v > kProfileFloor))
                throw ValidationError("profile f is not positive at u = " +
                                      detail::fmt(domain_.probe(k)) + " (value " +
                                      detail::fmt(v) + ")");
        }
        fp_ = differentiate(f_, "u");
        fpp_ = differentiate(fp_, "u");
        // Ric_uu = n ((f')^2 - 2 f f'') / (4 f^2), the only curvature entry.
        ric_uu_ = simplify((constant(static_cast<double>(n_)) *
                            (fp_ * fp_ - constant(2.0) * f_ * fpp_)) /
                           (constant(4.0) * pow_int(f_, 2)));
        chart_ = family_chart(n_);
    }

    std::size_t n() const { return n_; }
    const Expression& f() const { return f_; }
    const Expression& f_prime() const { return fp_; }
    const Interval& u_domain() const { return domain_; }
    const Expression& ric_uu() const { return ric_uu_; }
    const Chart& chart() const { return chart_; }

private:
    std::size_t n_;
    Expression f_, fp_, fpp_, ric_uu_;
    Interval domain_;
    Chart chart_ = Chart({"u", "v"});
};

inline MetricSpec egorov_metric(const EgorovParams& params) {
    const std::size_t n = params.n();
    const std::size_t d = n + 2;
    Expression zero = constant(0.0);
    std::vector<std::vector<Expression>> comp(d, std::vector<Expression>(d, zero));
    comp[0][1] = comp[1][0] = constant(1.0);
    for (std::size_t i = 0; i < n; ++i) comp[2 + i][2 + i] = params.f();
    return MetricSpec(params.chart(), comp, {});
}

/// The one-integral soliton field (0, -1/2 int Ric_uu du + lambda v,
/// (lambda/2) x_i, ...). A closed-form primitive of Ric_uu may be supplied;
/// it is probed against Ric_uu before use. Otherwise an antiderivative node
/// anchored at the domain midpoint stands in.
inline SolitonCandidate egorov_particular_soliton(const EgorovParams& params, double lambda,
                                                  const std::optional<Expression>& ric_uu_primitive =
                                                      std::nullopt) {
    Expression integral = constant(0.0);
    if (ric_uu_primitive) {
        detail::check_univariate(*ric_uu_primitive, "Ric_uu primitive");
        Expression deriv = differentiate(*ric_uu_primitive, "u");
        Bindings env;
        env.set("u", 0.0);
        double worst = 0.0, at = params.u_domain().lo;
        for (std::size_t k = 0; k < kDomainProbes; ++k) {
            double u = params.u_domain().probe(k);
            env.set("u", u);
            double dev = std::abs(evaluate(deriv, env) - evaluate(params.ric_uu(), env));
            if (dev > worst) { worst = dev; at = u; }
        }
        if (worst > kConstraintTol)
            throw ValidationError("primitive does not differentiate to Ric_uu: deviation " +
                                  detail::fmt(worst) + " at u = " + detail::fmt(at));
        integral = *ric_uu_primitive;
    } else {
        integral = antiderivative(params.ric_uu(), "u", params.u_domain().midpoint());
    }

    const std::size_t n = params.n();
    std::vector<Expression> comp;
    comp.reserve(n + 2);
    comp.push_back(constant(0.0));
    comp.push_back(constant(-0.5) * integral + constant(lambda) * symbol("v"));
    for (std::size_t i = 1; i <= n; ++i)
        comp.push_back(constant(lambda / 2.0) * symbol("x" + std::to_string(i)));
    return SolitonCandidate::vector(VectorFieldSpec(params.chart(), std::move(comp)), lambda);
}

/// Free constants of the full solution family on a plane-fronted wave.
/// Unset vectors and the matrix default to zeros of the right shape.
struct EgorovGeneralConstants {
    double a = 0.0;
    double b = 0.0;
    double K = 0.0;
    double c0 = 0.0;
    std::vector<double> c; // n offsets, one per transverse component
    std::vector<double> k; // n transverse couplings entering X_v
    std::vector<std::vector<double>> A; // n x n skew matrix
};

namespace detail {

inline void normalize_general(std::size_t n, std::vector<double>& v, const char* what) {
    if (v.empty()) v.assign(n, 0.0);
    if (v.size() != n)
        throw ValidationError(std::string(what) + " must have one entry per transverse coordinate");
}

inline void normalize_skew(std::size_t n, std::vector<std::vector<double>>& A, const char* what) {
    if (A.empty()) A.assign(n, std::vector<double>(n, 0.0));
    if (A.size() != n)
        throw ValidationError(std::string(what) + " must be n x n");
    for (auto& row : A)
        if (row.size() != n) throw ValidationError(std::string(what) + " must be n x n");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(A[i][j] + A[j][i]) > kSkewTol)
                throw ValidationError(std::string(what) + " must be skew-symmetric");
}

} // namespace detail

/// Full solution family: X_u = a + b u, X_v and X_i as integrated, subject to
/// the compatibility equation b f' + (a + b u)(f'' - f'^2/f) = 4K on the
/// profile domain. Violations report the worst probe.
inline SolitonCandidate egorov_general_soliton(const EgorovParams& params, double lambda,
                                               EgorovGeneralConstants constants) {
    const std::size_t n = params.n();
    detail::normalize_general(n, constants.c, "offset vector c");
    detail::normalize_general(n, constants.k, "coupling vector k");
    detail::normalize_skew(n, constants.A, "matrix A");

    // b f'(u) + (a + b u)(f''(u) - f'(u)^2 / f(u)) = 4K
    Expression u = symbol("u");
    Expression ab = constant(constants.a) + constant(constants.b) * u;
    Expression fp = differentiate(params.f(), "u");
    Expression fpp = differentiate(fp, "u");
    Expression lhs = constant(constants.b) * fp + ab * (fpp - fp * fp / params.f());
    Bindings env;
    env.set("u", 0.0);
    double worst = 0.0, at = params.u_domain().lo;
    for (std::size_t q = 0; q < kDomainProbes; ++q) {
        double uu = params.u_domain().probe(q);
        env.set("u", uu);
        double dev = std::abs(evaluate(lhs, env) - 4.0 * constants.K);
        if (dev > worst) { worst = dev; at = uu; }
    }
    if (worst > kConstraintTol)
        throw ValidationError("constants violate b f' + (a+bu)(f'' - f'^2/f) = 4K: deviation " +
                              detail::fmt(worst) + " at u = " + detail::fmt(at));

    const double u0 = params.u_domain().midpoint();
    std::vector<Expression> comp;
    comp.reserve(n + 2);
    comp.push_back(constant(constants.a) + constant(constants.b) * u);

    Expression xv = constant(constants.c0) + constant(lambda - constants.b) * symbol("v") +
                    constant(-0.5) * antiderivative(params.ric_uu(), "u", u0);
    Expression sum_sq = constant(0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        Expression xi = symbol("x" + std::to_string(i));
        xv = xv + constant(constants.k[i - 1]) * xi;
        sum_sq = sum_sq + pow_int(xi, 2);
    }
    xv = xv + constant(constants.K) * sum_sq;
    comp.push_back(xv);

    Expression inv_f_integral = antiderivative(constant(1.0) / params.f(), "u", u0);
    Expression stretch = constant(lambda / 2.0) - ab * fp / (constant(2.0) * params.f());
    for (std::size_t i = 1; i <= n; ++i) {
        Expression xi_comp = constant(constants.c[i - 1]) -
                             constant(constants.k[i - 1]) * inv_f_integral +
                             stretch * symbol("x" + std::to_string(i));
        for (std::size_t j = 1; j <= n; ++j) {
            if (j == i) continue;
            double aij = constants.A[i - 1][j - 1];
            xi_comp = xi_comp + constant(aij) * symbol("x" + std::to_string(j));
        }
        comp.push_back(xi_comp);
    }
    return SolitonCandidate::vector(VectorFieldSpec(params.chart(), std::move(comp)), lambda);
}

/// Steady gradient potential: h(u) with h'' = -1/2 Ric_uu, realized as a
/// double antiderivative anchored at the domain midpoint. Nonzero lambda is
/// rejected: on a non-flat profile the gradient equation forces lambda = 0,
/// and on a flat one the zero potential already witnesses it.
inline SolitonCandidate egorov_gradient_potential(const EgorovParams& params, double lambda = 0.0) {
    if (lambda != 0.0)
        throw ValidationError("gradient potentials on wave profiles require lambda = 0");
    const double u0 = params.u_domain().midpoint();
    Expression hpp = constant(-0.5) * params.ric_uu();
    Expression h = antiderivative(antiderivative(hpp, "u", u0), "u", u0);
    return SolitonCandidate::gradient(ScalarFieldSpec(params.chart(), h), 0.0);
}

// ---------------------------------------------------------------------------
// Symmetric wave with profile coefficients kappa
// ---------------------------------------------------------------------------

/// Wave coefficients kappa_1..kappa_n, all nonzero.
class CWParams {
public:
    explicit CWParams(std::vector<double> kappa) : kappa_(std::move(kappa)) {
        detail::check_transverse(kappa_.size());
        for (double k : kappa_)
            if (!(std::isfinite(k)) || k == 0.0)
                throw ValidationError("every kappa coefficient must be finite and nonzero");
        chart_ = family_chart(kappa_.size());
    }

    std::size_t n() const { return kappa_.size(); }
    const std::vector<double>& kappa() const { return kappa_; }
    double kappa_sum() const {
        double s = 0.0;
        for (double k : kappa_) s += k;
        return s;
    }
    const Chart& chart() const { return chart_; }

private:
    std::vector<double> kappa_;
    Chart chart_ = Chart({"u", "v"});
};

inline MetricSpec cw_metric(const CWParams& params) {
    const std::size_t n = params.n();
    const std::size_t d = n + 2;
    Expression zero = constant(0.0);
    std::vector<std::vector<Expression>> comp(d, std::vector<Expression>(d, zero));
    Expression guu = constant(0.0);
    for (std::size_t i = 1; i <= n; ++i)
        guu = guu + constant(params.kappa()[i - 1]) * pow_int(symbol("x" + std::to_string(i)), 2);
    comp[0][0] = guu;
    comp[0][1] = comp[1][0] = constant(1.0);
    for (std::size_t i = 0; i < n; ++i) comp[2 + i][2 + i] = constant(1.0);
    return MetricSpec(params.chart(), comp, {});
}

/// The closed-form field (0, 1/2 (sum kappa) u + lambda v, (lambda/2) x_i, ...).
inline SolitonCandidate cw_particular_soliton(const CWParams& params, double lambda) {
    const std::size_t n = params.n();
    std::vector<Expression> comp;
    comp.reserve(n + 2);
    comp.push_back(constant(0.0));
    comp.push_back(constant(0.5 * params.kappa_sum()) * symbol("u") +
                   constant(lambda) * symbol("v"));
    for (std::size_t i = 1; i <= n; ++i)
        comp.push_back(constant(lambda / 2.0) * symbol("x" + std::to_string(i)));
    return SolitonCandidate::vector(VectorFieldSpec(params.chart(), std::move(comp)), lambda);
}

/// Free constants of the full solution family on a symmetric wave. The
/// rotation matrix c must be skew and may only mix directions with equal
/// kappa; d1/d2 choose each transverse oscillation h_i in the basis matching
/// the sign of kappa_i (exponential for positive, trigonometric for negative).
struct CWGeneralConstants {
    double a = 0.0;
    double b = 0.0;
    std::vector<std::vector<double>> c; // n x n skew, c_ij (kappa_i - kappa_j) = 0
    std::vector<double> d1, d2;         // oscillation coefficients
};

inline SolitonCandidate cw_general_soliton(const CWParams& params, double lambda,
                                           CWGeneralConstants constants) {
    const std::size_t n = params.n();
    detail::normalize_skew(n, constants.c, "rotation matrix c");
    detail::normalize_general(n, constants.d1, "coefficient vector d1");
    detail::normalize_general(n, constants.d2, "coefficient vector d2");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(constants.c[i][j] * (params.kappa()[i] - params.kappa()[j])) > kSkewTol)
                throw ValidationError(
                    "rotation entry c[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) +
                    "] mixes directions with different kappa");

    Expression u = symbol("u");
    std::vector<Expression> h(n, constant(0.0)), hp(n, constant(0.0));
    for (std::size_t i = 0; i < n; ++i) {
        double kap = params.kappa()[i];
        Expression d1c = constant(constants.d1[i]);
        Expression d2c = constant(constants.d2[i]);
        if (kap > 0.0) {
            double r = std::sqrt(kap);
            h[i] = d1c * exp(constant(-r) * u) + d2c * exp(constant(r) * u);
        } else {
            double r = std::sqrt(-kap);
            h[i] = d1c * sin(constant(r) * u) + d2c * cos(constant(r) * u);
        }
        h[i] = simplify(h[i]);
        hp[i] = differentiate(h[i], "u");
    }

    std::vector<Expression> comp;
    comp.reserve(n + 2);
    comp.push_back(constant(constants.a));
    Expression xv = constant(constants.b) + constant(lambda) * symbol("v") +
                    constant(0.5 * params.kappa_sum()) * u;
    for (std::size_t i = 1; i <= n; ++i)
        xv = xv - symbol("x" + std::to_string(i)) * hp[i - 1];
    comp.push_back(xv);
    for (std::size_t j = 1; j <= n; ++j) {
        Expression xj = constant(lambda / 2.0) * symbol("x" + std::to_string(j)) + h[j - 1];
        for (std::size_t i = 1; i <= n; ++i) {
            if (i == j) continue;
            xj = xj + constant(constants.c[i - 1][j - 1]) * symbol("x" + std::to_string(i));
        }
        comp.push_back(xj);
    }
    return SolitonCandidate::vector(VectorFieldSpec(params.chart(), std::move(comp)), lambda);
}

/// Steady gradient potential h(u) = alpha + beta u + 1/4 (sum kappa) u^2.
/// Nonzero lambda is rejected: the gradient equation on these waves forces
/// the potential to depend on u alone and lambda to vanish.
inline SolitonCandidate cw_gradient_potential(const CWParams& params, double alpha, double beta,
                                              double lambda = 0.0) {
    if (lambda != 0.0)
        throw ValidationError("gradient potentials on symmetric waves require lambda = 0");
    Expression u = symbol("u");
    Expression h = constant(alpha) + constant(beta) * u +
                   constant(0.25 * params.kappa_sum()) * pow_int(u, 2);
    return SolitonCandidate::gradient(ScalarFieldSpec(params.chart(), h), 0.0);
}

// ---------------------------------------------------------------------------
// Constant-coefficient special case kappa_i = epsilon
// ---------------------------------------------------------------------------

namespace detail {

inline CWParams epsilon_params(std::size_t n, double epsilon) {
    if (!(std::isfinite(epsilon)) || epsilon == 0.0)
        throw ValidationError("epsilon must be finite and nonzero");
    return CWParams(std::vector<double>(n, epsilon));
}

} // namespace detail

inline MetricSpec epsilon_metric(std::size_t n, double epsilon) {
    return cw_metric(detail::epsilon_params(n, epsilon));
}

inline SolitonCandidate epsilon_particular_soliton(std::size_t n, double epsilon, double lambda) {
    return cw_particular_soliton(detail::epsilon_params(n, epsilon), lambda);
}

/// With all kappa equal the mixing constraint is vacuous: every skew rotation
/// matrix is admissible.
inline SolitonCandidate epsilon_general_soliton(std::size_t n, double epsilon, double lambda,
                                                CWGeneralConstants constants) {
    return cw_general_soliton(detail::epsilon_params(n, epsilon), lambda, std::move(constants));
}

inline SolitonCandidate epsilon_gradient_potential(std::size_t n, double epsilon, double alpha,
                                                   double beta, double lambda = 0.0) {
    return cw_gradient_potential(detail::epsilon_params(n, epsilon), alpha, beta, lambda);
}

} // namespace ricci
