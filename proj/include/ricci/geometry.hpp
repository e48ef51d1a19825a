#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ricci/chart.hpp"
#include "ricci/expression.hpp"
#include "ricci/fields.hpp"
#include "ricci/linalg.hpp"

namespace ricci {

// ---------------------------------------------------------------------------
// Curvature conventions
//
// Christoffel: Gamma^k_ij = (1/2) g^{kl} (d_i g_{lj} + d_j g_{il} - d_l g_{ij})
// Curvature uses R(X,Y) = nabla_[X,Y] - [nabla_X, nabla_Y], which in
// coordinates carries a leading minus against the textbook expansion:
//   R^l_{ijk} = -(d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
//                 + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik})
// Index order: l is the output slot, (i,j) are the curvature arguments, k is
// the vector acted on. Lowered components are g_{lm} R^m_{ijk}. The Ricci
// tensor Ric_{ij} = R^k_{ikj} agrees with the usual one; plane-wave metrics
// get Ric_uu < 0 for positive profile sums.
// ---------------------------------------------------------------------------

constexpr double kMetricDetFloor = 1e-12;

/// Everything pointwise the calculus needs, evaluated once per point from the
/// metric's cached derivative trees. Third-order data (d3g and curvature
/// derivatives) is only filled when order >= 3; it feeds the second-Bianchi
/// and contracted-Bianchi defects.
struct PointFrame {
    Point point;
    std::size_t d = 0;
    int order = 2;
    Bindings env; // coordinates plus metric parameters

    Matrix g, g_inv;
    double det_g = 0.0;
    std::vector<double> dg;      // (i,j,k) = d_k g_ij
    std::vector<double> d2g;     // (i,j,k,l)
    std::vector<double> d3g;     // (i,j,k,l,m), order 3 only
    std::vector<double> dginv;   // (i,j,k) = d_k g^ij
    std::vector<double> gamma;   // (k,i,j) = Gamma^k_ij
    std::vector<double> dgamma;  // (k,i,j,q) = d_q Gamma^k_ij
    std::vector<double> riemann;     // (l,i,j,k) = R^l_ijk
    std::vector<double> driemann;    // (l,i,j,k,m) = d_m R^l_ijk, order 3 only
    std::vector<double> riemann_low; // (l,i,j,k) = g_lm R^m_ijk
    Matrix ricci, ricci_op;
    double scalar = 0.0;

    std::size_t i3(std::size_t i, std::size_t j, std::size_t k) const {
        return (i * d + j) * d + k;
    }
    std::size_t i4(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return ((i * d + j) * d + k) * d + l;
    }
    std::size_t i5(std::size_t i, std::size_t j, std::size_t k, std::size_t l, std::size_t m) const {
        return (((i * d + j) * d + k) * d + l) * d + m;
    }
};

namespace detail {

inline void require_chart(const MetricSpec& M, const Chart& other, const char* what) {
    if (!(M.chart() == other))
        throw ValidationError(std::string(what) + " does not share the metric's chart");
}

} // namespace detail

inline PointFrame frame_at(const MetricSpec& M, const Point& p, int order = 2) {
    if (order != 2 && order != 3)
        throw ValidationError("frame order must be 2 or 3");
    const std::size_t d = M.dimension();
    PointFrame F;
    F.point = p;
    F.d = d;
    F.order = order;
    F.env = M.bindings_at(p);
    const Bindings& env = F.env;

    F.g = Matrix(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j)
            F.g(i, j) = F.g(j, i) = M.value(i, j, env);

    F.det_g = invert(F.g, F.g_inv);
    if (std::abs(F.det_g) <= kMetricDetFloor)
        throw EvalError("metric is singular at the requested point");

    F.dg.assign(d * d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k) {
                double v = M.d1(i, j, k, env);
                F.dg[F.i3(i, j, k)] = v;
                F.dg[F.i3(j, i, k)] = v;
            }

    F.d2g.assign(d * d * d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t l = k; l < d; ++l) {
                    double v = M.d2(i, j, k, l, env);
                    F.d2g[F.i4(i, j, k, l)] = v;
                    F.d2g[F.i4(i, j, l, k)] = v;
                    F.d2g[F.i4(j, i, k, l)] = v;
                    F.d2g[F.i4(j, i, l, k)] = v;
                }

    // d_k g^ij = -g^ia (d_k g_ab) g^bj
    F.dginv.assign(d * d * d, 0.0);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                double s = 0.0;
                for (std::size_t a = 0; a < d; ++a) {
                    double gia = F.g_inv(i, a);
                    if (gia == 0.0) continue;
                    for (std::size_t b = 0; b < d; ++b)
                        s += gia * F.dg[F.i3(a, b, k)] * F.g_inv(b, j);
                }
                F.dginv[F.i3(i, j, k)] = -s;
            }

    F.gamma.assign(d * d * d, 0.0);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < d; ++l) {
                    double gkl = F.g_inv(k, l);
                    if (gkl == 0.0) continue;
                    s += gkl * (F.dg[F.i3(l, j, i)] + F.dg[F.i3(i, l, j)] - F.dg[F.i3(i, j, l)]);
                }
                F.gamma[F.i3(k, i, j)] = 0.5 * s;
                F.gamma[F.i3(k, j, i)] = 0.5 * s;
            }

    F.dgamma.assign(d * d * d * d, 0.0);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j)
                for (std::size_t q = 0; q < d; ++q) {
                    double s = 0.0;
                    for (std::size_t l = 0; l < d; ++l) {
                        double A = F.dg[F.i3(l, j, i)] + F.dg[F.i3(i, l, j)] - F.dg[F.i3(i, j, l)];
                        double dA = F.d2g[F.i4(l, j, i, q)] + F.d2g[F.i4(i, l, j, q)] -
                                    F.d2g[F.i4(i, j, l, q)];
                        s += F.dginv[F.i3(k, l, q)] * A + F.g_inv(k, l) * dA;
                    }
                    F.dgamma[F.i4(k, i, j, q)] = 0.5 * s;
                    F.dgamma[F.i4(k, j, i, q)] = 0.5 * s;
                }

    F.riemann.assign(d * d * d * d, 0.0);
    for (std::size_t l = 0; l < d; ++l)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                if (i == j) continue; // antisymmetric arguments
                for (std::size_t k = 0; k < d; ++k) {
                    double s = F.dgamma[F.i4(l, j, k, i)] - F.dgamma[F.i4(l, i, k, j)];
                    for (std::size_t m = 0; m < d; ++m)
                        s += F.gamma[F.i3(l, i, m)] * F.gamma[F.i3(m, j, k)] -
                             F.gamma[F.i3(l, j, m)] * F.gamma[F.i3(m, i, k)];
                    F.riemann[F.i4(l, i, j, k)] = -s;
                }
            }

    F.riemann_low.assign(d * d * d * d, 0.0);
    for (std::size_t l = 0; l < d; ++l)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k) {
                    double s = 0.0;
                    for (std::size_t m = 0; m < d; ++m)
                        s += F.g(l, m) * F.riemann[F.i4(m, i, j, k)];
                    F.riemann_low[F.i4(l, i, j, k)] = s;
                }

    F.ricci = Matrix(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += F.riemann[F.i4(k, i, k, j)];
            F.ricci(i, j) = s;
        }

    F.ricci_op = multiply(F.g_inv, F.ricci);
    F.scalar = 0.0;
    for (std::size_t i = 0; i < d; ++i) F.scalar += F.ricci_op(i, i);

    if (order >= 3) {
        F.d3g.assign(d * d * d * d * d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k)
                    for (std::size_t l = k; l < d; ++l)
                        for (std::size_t m = l; m < d; ++m) {
                            double v = M.d3(i, j, k, l, m, env);
                            const std::size_t ks[6][3] = {{k, l, m}, {k, m, l}, {l, k, m},
                                                          {l, m, k}, {m, k, l}, {m, l, k}};
                            for (const auto& t : ks) {
                                F.d3g[F.i5(i, j, t[0], t[1], t[2])] = v;
                                F.d3g[F.i5(j, i, t[0], t[1], t[2])] = v;
                            }
                        }

        // d_r d_q g^ij, then d_r d_q Gamma, then d_m R^l_ijk.
        std::vector<double> d2ginv(d * d * d * d, 0.0);
        for (std::size_t q = 0; q < d; ++q)
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j) {
                        double s = 0.0;
                        for (std::size_t a = 0; a < d; ++a)
                            for (std::size_t b = 0; b < d; ++b)
                                s += F.dginv[F.i3(i, a, r)] * F.dg[F.i3(a, b, q)] * F.g_inv(b, j) +
                                     F.g_inv(i, a) * F.d2g[F.i4(a, b, q, r)] * F.g_inv(b, j) +
                                     F.g_inv(i, a) * F.dg[F.i3(a, b, q)] * F.dginv[F.i3(b, j, r)];
                        d2ginv[F.i4(i, j, q, r)] = -s;
                    }

        std::vector<double> d2gamma(d * d * d * d * d, 0.0);
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = i; j < d; ++j)
                    for (std::size_t q = 0; q < d; ++q)
                        for (std::size_t r = 0; r < d; ++r) {
                            double s = 0.0;
                            for (std::size_t l = 0; l < d; ++l) {
                                double A = F.dg[F.i3(l, j, i)] + F.dg[F.i3(i, l, j)] -
                                           F.dg[F.i3(i, j, l)];
                                double Aq = F.d2g[F.i4(l, j, i, q)] + F.d2g[F.i4(i, l, j, q)] -
                                            F.d2g[F.i4(i, j, l, q)];
                                double Ar = F.d2g[F.i4(l, j, i, r)] + F.d2g[F.i4(i, l, j, r)] -
                                            F.d2g[F.i4(i, j, l, r)];
                                double Aqr = F.d3g[F.i5(l, j, i, q, r)] + F.d3g[F.i5(i, l, j, q, r)] -
                                             F.d3g[F.i5(i, j, l, q, r)];
                                s += d2ginv[F.i4(k, l, q, r)] * A + F.dginv[F.i3(k, l, q)] * Ar +
                                     F.dginv[F.i3(k, l, r)] * Aq + F.g_inv(k, l) * Aqr;
                            }
                            d2gamma[F.i5(k, i, j, q, r)] = 0.5 * s;
                            d2gamma[F.i5(k, j, i, q, r)] = 0.5 * s;
                        }

        F.driemann.assign(d * d * d * d * d, 0.0);
        for (std::size_t l = 0; l < d; ++l)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    if (i == j) continue;
                    for (std::size_t k = 0; k < d; ++k)
                        for (std::size_t m = 0; m < d; ++m) {
                            double s = d2gamma[F.i5(l, j, k, i, m)] - d2gamma[F.i5(l, i, k, j, m)];
                            for (std::size_t a = 0; a < d; ++a)
                                s += F.dgamma[F.i4(l, i, a, m)] * F.gamma[F.i3(a, j, k)] +
                                     F.gamma[F.i3(l, i, a)] * F.dgamma[F.i4(a, j, k, m)] -
                                     F.dgamma[F.i4(l, j, a, m)] * F.gamma[F.i3(a, i, k)] -
                                     F.gamma[F.i3(l, j, a)] * F.dgamma[F.i4(a, i, k, m)];
                            F.driemann[F.i5(l, i, j, k, m)] = -s;
                        }
                }
    }

    return F;
}

// ---------------------------------------------------------------------------
// Derived tensors and field operations
// ---------------------------------------------------------------------------

/// Weyl tensor in the lowered arrangement of PointFrame::riemann_low.
/// Identically zero in dimension 3; dimensions below 3 are rejected.
inline std::vector<double> weyl(const PointFrame& F) {
    const std::size_t d = F.d;
    if (d < 3) throw ValidationError("Weyl tensor requires dimension >= 3");
    std::vector<double> W(d * d * d * d, 0.0);
    if (d == 3) return W;

    const double dd = static_cast<double>(d);
    Matrix P(d); // Schouten
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            P(i, j) = (F.ricci(i, j) - F.scalar * F.g(i, j) / (2.0 * (dd - 1.0))) / (dd - 2.0);

    for (std::size_t l = 0; l < d; ++l)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k) {
                    double kn = P(i, l) * F.g(j, k) + P(j, k) * F.g(i, l) -
                                P(i, k) * F.g(j, l) - P(j, l) * F.g(i, k);
                    W[F.i4(l, i, j, k)] = F.riemann_low[F.i4(l, i, j, k)] + kn;
                }
    return W;
}

inline std::vector<double> weyl_at(const MetricSpec& M, const Point& p) {
    return weyl(frame_at(M, p));
}

/// (L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k
inline Matrix lie_derivative_metric(const VectorFieldSpec& X, const PointFrame& F) {
    const std::size_t d = F.d;
    std::vector<double> xv(d), dx(d * d);
    for (std::size_t i = 0; i < d; ++i) {
        xv[i] = X.value(i, F.env);
        for (std::size_t k = 0; k < d; ++k) dx[i * d + k] = X.d1(i, k, F.env);
    }
    Matrix L(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k)
                s += xv[k] * F.dg[F.i3(i, j, k)] + F.g(k, j) * dx[k * d + i] +
                     F.g(i, k) * dx[k * d + j];
            L(i, j) = L(j, i) = s;
        }
    return L;
}

inline Matrix lie_derivative_metric_at(const MetricSpec& M, const VectorFieldSpec& X, const Point& p) {
    detail::require_chart(M, X.chart(), "vector field");
    return lie_derivative_metric(X, frame_at(M, p));
}

/// (grad h)^i = g^ij d_j h
inline std::vector<double> gradient(const ScalarFieldSpec& h, const PointFrame& F) {
    const std::size_t d = F.d;
    std::vector<double> dh(d), out(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) dh[j] = h.d1(j, F.env);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) out[i] += F.g_inv(i, j) * dh[j];
    return out;
}

inline std::vector<double> gradient_at(const MetricSpec& M, const ScalarFieldSpec& h, const Point& p) {
    detail::require_chart(M, h.chart(), "scalar field");
    return gradient(h, frame_at(M, p));
}

/// (Hes h)_ij = d_i d_j h - Gamma^k_ij d_k h
inline Matrix hessian(const ScalarFieldSpec& h, const PointFrame& F) {
    const std::size_t d = F.d;
    std::vector<double> dh(d);
    for (std::size_t k = 0; k < d; ++k) dh[k] = h.d1(k, F.env);
    Matrix H(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            double s = h.d2(i, j, F.env);
            for (std::size_t k = 0; k < d; ++k) s -= F.gamma[F.i3(k, i, j)] * dh[k];
            H(i, j) = H(j, i) = s;
        }
    return H;
}

inline Matrix hessian_at(const MetricSpec& M, const ScalarFieldSpec& h, const Point& p) {
    detail::require_chart(M, h.chart(), "scalar field");
    return hessian(h, frame_at(M, p));
}

/// div X = d_i X^i + Gamma^i_ik X^k
inline double divergence(const VectorFieldSpec& X, const PointFrame& F) {
    const std::size_t d = F.d;
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += X.d1(i, i, F.env);
    for (std::size_t k = 0; k < d; ++k) {
        double xk = X.value(k, F.env);
        if (xk == 0.0) continue;
        double tr = 0.0;
        for (std::size_t i = 0; i < d; ++i) tr += F.gamma[F.i3(i, i, k)];
        s += tr * xk;
    }
    return s;
}

inline double divergence_at(const MetricSpec& M, const VectorFieldSpec& X, const Point& p) {
    detail::require_chart(M, X.chart(), "vector field");
    return divergence(X, frame_at(M, p));
}

/// Returns (i,k) -> nabla_i X^k = d_i X^k + Gamma^k_im X^m
inline Matrix covariant_derivative(const VectorFieldSpec& X, const PointFrame& F) {
    const std::size_t d = F.d;
    std::vector<double> xv(d);
    for (std::size_t m = 0; m < d; ++m) xv[m] = X.value(m, F.env);
    Matrix out(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            double s = X.d1(k, i, F.env);
            for (std::size_t m = 0; m < d; ++m) s += F.gamma[F.i3(k, i, m)] * xv[m];
            out(i, k) = s;
        }
    return out;
}

inline Matrix covariant_derivative_at(const MetricSpec& M, const VectorFieldSpec& X, const Point& p) {
    detail::require_chart(M, X.chart(), "vector field");
    return covariant_derivative(X, frame_at(M, p));
}

// ---------------------------------------------------------------------------
// Causal character
// ---------------------------------------------------------------------------

enum class CausalCharacter { Zero, Null, Timelike, Spacelike };

inline const char* to_string(CausalCharacter c) {
    switch (c) {
        case CausalCharacter::Zero: return "zero";
        case CausalCharacter::Null: return "null";
        case CausalCharacter::Timelike: return "timelike";
        case CausalCharacter::Spacelike: return "spacelike";
    }
    return "?";
}

/// Classification of a component vector against a metric value. The zero
/// test precedes the null test; both thresholds scale with the sup norm.
inline CausalCharacter causal_character_of(const Matrix& g, const std::vector<double>& v) {
    const std::size_t d = g.size();
    double sup = 0.0;
    for (double c : v) sup = std::max(sup, std::abs(c));
    if (sup <= 1e-12) return CausalCharacter::Zero;
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) s += g(i, j) * v[i] * v[j];
    if (std::abs(s) <= 1e-10 * (1.0 + sup * sup)) return CausalCharacter::Null;
    return s < 0.0 ? CausalCharacter::Timelike : CausalCharacter::Spacelike;
}

inline CausalCharacter causal_character_at(const MetricSpec& M, const VectorFieldSpec& X, const Point& p) {
    detail::require_chart(M, X.chart(), "vector field");
    PointFrame F = frame_at(M, p);
    std::vector<double> v(F.d);
    for (std::size_t i = 0; i < F.d; ++i) v[i] = X.value(i, F.env);
    return causal_character_of(F.g, v);
}

// ---------------------------------------------------------------------------
// Identity defects
// ---------------------------------------------------------------------------

struct RiemannSymmetryDefects {
    double argument_antisymmetry = 0.0; // R^l_ijk + R^l_jik
    double lowered_antisymmetry = 0.0;  // R_lijk + R_kijl
    double pair_symmetry = 0.0;         // R_lijk - R_jkli
    double first_bianchi = 0.0;         // cyclic sum over (i,j,k)
};

inline RiemannSymmetryDefects riemann_symmetry_defects(const PointFrame& F) {
    const std::size_t d = F.d;
    RiemannSymmetryDefects out;
    for (std::size_t l = 0; l < d; ++l)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k) {
                    out.argument_antisymmetry =
                        std::max(out.argument_antisymmetry,
                                 std::abs(F.riemann[F.i4(l, i, j, k)] + F.riemann[F.i4(l, j, i, k)]));
                    out.lowered_antisymmetry =
                        std::max(out.lowered_antisymmetry,
                                 std::abs(F.riemann_low[F.i4(l, i, j, k)] +
                                          F.riemann_low[F.i4(k, i, j, l)]));
                    out.pair_symmetry =
                        std::max(out.pair_symmetry,
                                 std::abs(F.riemann_low[F.i4(l, i, j, k)] -
                                          F.riemann_low[F.i4(j, k, l, i)]));
                    out.first_bianchi =
                        std::max(out.first_bianchi,
                                 std::abs(F.riemann[F.i4(l, i, j, k)] + F.riemann[F.i4(l, j, k, i)] +
                                          F.riemann[F.i4(l, k, i, j)]));
                }
    return out;
}

namespace detail {

// nabla_m R^l_ijk assembled from the stored curvature derivative.
inline double covariant_driemann(const PointFrame& F, std::size_t l, std::size_t i, std::size_t j,
                                 std::size_t k, std::size_t m) {
    double s = F.driemann[F.i5(l, i, j, k, m)];
    for (std::size_t a = 0; a < F.d; ++a)
        s += F.gamma[F.i3(l, m, a)] * F.riemann[F.i4(a, i, j, k)] -
             F.gamma[F.i3(a, m, i)] * F.riemann[F.i4(l, a, j, k)] -
             F.gamma[F.i3(a, m, j)] * F.riemann[F.i4(l, i, a, k)] -
             F.gamma[F.i3(a, m, k)] * F.riemann[F.i4(l, i, j, a)];
    return s;
}

} // namespace detail

/// Max cyclic defect of nabla_m R^l_ijk over the derivative index and the
/// two curvature arguments. Needs an order-3 frame.
inline double second_bianchi_defect(const PointFrame& F) {
    if (F.order < 3) throw ValidationError("second Bianchi defect needs an order-3 frame");
    const std::size_t d = F.d;
    double worst = 0.0;
    for (std::size_t l = 0; l < d; ++l)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k)
                    for (std::size_t m = 0; m < d; ++m) {
                        double s = detail::covariant_driemann(F, l, i, j, k, m) +
                                   detail::covariant_driemann(F, l, j, m, k, i) +
                                   detail::covariant_driemann(F, l, m, i, k, j);
                        worst = std::max(worst, std::abs(s));
                    }
    return worst;
}

/// Max over i of |d_i Sc - 2 g^{jk} nabla_j Ric_{ki}|. Needs an order-3 frame.
inline double contracted_bianchi_defect(const PointFrame& F) {
    if (F.order < 3) throw ValidationError("contracted Bianchi defect needs an order-3 frame");
    const std::size_t d = F.d;

    // d_m Ric_ij by contracting the curvature derivative.
    std::vector<double> dricci(d * d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t m = 0; m < d; ++m) {
                double s = 0.0;
                for (std::size_t k = 0; k < d; ++k) s += F.driemann[F.i5(k, i, k, j, m)];
                dricci[F.i3(i, j, m)] = s;
            }

    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double dsc = 0.0;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                dsc += F.dginv[F.i3(a, b, i)] * F.ricci(a, b) +
                       F.g_inv(a, b) * dricci[F.i3(a, b, i)];

        double div = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k) {
                double nab = dricci[F.i3(k, i, j)];
                for (std::size_t a = 0; a < d; ++a)
                    nab -= F.gamma[F.i3(a, j, k)] * F.ricci(a, i) +
                           F.gamma[F.i3(a, j, i)] * F.ricci(k, a);
                div += F.g_inv(j, k) * nab;
            }
        worst = std::max(worst, std::abs(dsc - 2.0 * div));
    }
    return worst;
}

} // namespace ricci
