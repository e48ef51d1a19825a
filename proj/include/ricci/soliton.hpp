#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "ricci/geometry.hpp"

namespace ricci {

// ---------------------------------------------------------------------------
// Candidates
// ---------------------------------------------------------------------------

/// A claimed soliton structure: either a vector field X with
///   L_X g + Ric = lambda g
/// or a potential h whose gradient field should satisfy
///   2 Hes_h + Ric = lambda g.
/// Gradient candidates always recompute grad h from h; there is no way to
/// pass a mismatched (X, h) pair.
class SolitonCandidate {
public:
    enum class Kind { Vector, Gradient };

    static SolitonCandidate vector(VectorFieldSpec X, double lambda) {
        require_finite(lambda);
        SolitonCandidate c;
        c.kind_ = Kind::Vector;
        c.lambda_ = lambda;
        c.field_.emplace(std::move(X));
        return c;
    }

    static SolitonCandidate gradient(ScalarFieldSpec h, double lambda) {
        require_finite(lambda);
        SolitonCandidate c;
        c.kind_ = Kind::Gradient;
        c.lambda_ = lambda;
        c.potential_.emplace(std::move(h));
        return c;
    }

    Kind kind() const { return kind_; }
    bool is_gradient() const { return kind_ == Kind::Gradient; }
    double lambda() const { return lambda_; }

    const VectorFieldSpec& field() const {
        if (!field_) throw ValidationError("candidate has no vector field");
        return *field_;
    }
    const ScalarFieldSpec& potential() const {
        if (!potential_) throw ValidationError("candidate has no potential");
        return *potential_;
    }

    const Chart& chart() const { return field_ ? field_->chart() : potential_->chart(); }

    bool has_antiderivative() const {
        return field_ ? field_->has_antiderivative() : potential_->has_antiderivative();
    }

private:
    SolitonCandidate() = default;
    static void require_finite(double lambda) {
        if (!std::isfinite(lambda)) throw ValidationError("lambda must be finite");
    }

    Kind kind_ = Kind::Vector;
    double lambda_ = 0.0;
    std::optional<VectorFieldSpec> field_;
    std::optional<ScalarFieldSpec> potential_;
};

enum class SolitonType { Shrinking, Steady, Expanding };

inline const char* to_string(SolitonType t) {
    switch (t) {
        case SolitonType::Shrinking: return "shrinking";
        case SolitonType::Steady: return "steady";
        case SolitonType::Expanding: return "expanding";
    }
    return "?";
}

/// Exact sign trichotomy: positive shrinks, zero is steady, negative expands.
inline SolitonType classify(double lambda) {
    if (lambda > 0.0) return SolitonType::Shrinking;
    if (lambda < 0.0) return SolitonType::Expanding;
    return SolitonType::Steady;
}

// ---------------------------------------------------------------------------
// Residuals
// ---------------------------------------------------------------------------

/// L_X g + Ric - lambda g at the frame's point.
inline Matrix soliton_residual(const VectorFieldSpec& X, double lambda, const PointFrame& F) {
    Matrix R = lie_derivative_metric(X, F);
    for (std::size_t i = 0; i < F.d; ++i)
        for (std::size_t j = 0; j < F.d; ++j)
            R(i, j) += F.ricci(i, j) - lambda * F.g(i, j);
    return R;
}

inline Matrix soliton_residual_at(const MetricSpec& M, const SolitonCandidate& c, const Point& p) {
    if (c.kind() != SolitonCandidate::Kind::Vector)
        throw ValidationError("soliton_residual_at expects a vector candidate");
    detail::require_chart(M, c.chart(), "candidate");
    return soliton_residual(c.field(), c.lambda(), frame_at(M, p));
}

/// 2 Hes_h + Ric - lambda g at the frame's point.
inline Matrix gradient_residual(const ScalarFieldSpec& h, double lambda, const PointFrame& F) {
    Matrix R = hessian(h, F);
    for (std::size_t i = 0; i < F.d; ++i)
        for (std::size_t j = 0; j < F.d; ++j)
            R(i, j) = 2.0 * R(i, j) + F.ricci(i, j) - lambda * F.g(i, j);
    return R;
}

inline Matrix gradient_residual_at(const MetricSpec& M, const SolitonCandidate& c, const Point& p) {
    if (c.kind() != SolitonCandidate::Kind::Gradient)
        throw ValidationError("gradient_residual_at expects a gradient candidate");
    detail::require_chart(M, c.chart(), "candidate");
    return gradient_residual(c.potential(), c.lambda(), frame_at(M, p));
}

/// Kind-dispatching residual on a prebuilt frame.
inline Matrix residual(const SolitonCandidate& c, const PointFrame& F) {
    if (c.is_gradient()) return gradient_residual(c.potential(), c.lambda(), F);
    return soliton_residual(c.field(), c.lambda(), F);
}

inline Matrix residual_at(const MetricSpec& M, const SolitonCandidate& c, const Point& p) {
    detail::require_chart(M, c.chart(), "candidate");
    return residual(c, frame_at(M, p));
}

/// Components of the candidate's field at a frame: X itself, or grad h.
inline std::vector<double> candidate_components(const SolitonCandidate& c, const PointFrame& F) {
    if (c.is_gradient()) return gradient(c.potential(), F);
    std::vector<double> v(F.d);
    for (std::size_t i = 0; i < F.d; ++i) v[i] = c.field().value(i, F.env);
    return v;
}

// ---------------------------------------------------------------------------
// Derived scalars
// ---------------------------------------------------------------------------

/// lambda - (2 div X + Sc)/d, with X = grad h for gradient candidates.
/// Vanishes whenever the defining equation holds (trace of the residual).
inline double lambda_consistency(const SolitonCandidate& c, const PointFrame& F) {
    double div;
    if (c.is_gradient()) {
        // div(grad h) is the trace of the raised Hessian.
        Matrix H = hessian(c.potential(), F);
        div = 0.0;
        for (std::size_t i = 0; i < F.d; ++i)
            for (std::size_t j = 0; j < F.d; ++j) div += F.g_inv(i, j) * H(i, j);
    } else {
        div = divergence(c.field(), F);
    }
    return c.lambda() - (2.0 * div + F.scalar) / static_cast<double>(F.d);
}

inline double lambda_consistency_at(const MetricSpec& M, const SolitonCandidate& c, const Point& p) {
    detail::require_chart(M, c.chart(), "candidate");
    return lambda_consistency(c, frame_at(M, p));
}

/// Sc + 2 g(grad h, grad h) - 2 lambda h. Constant across points for a true
/// gradient soliton; identically zero in the steady families shipped here.
inline double hamilton_value(const ScalarFieldSpec& h, double lambda, const PointFrame& F) {
    std::vector<double> G = gradient(h, F);
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < F.d; ++i)
        for (std::size_t j = 0; j < F.d; ++j) norm_sq += F.g(i, j) * G[i] * G[j];
    double pot = (lambda == 0.0) ? 0.0 : 2.0 * lambda * h.value(F.env);
    return F.scalar + 2.0 * norm_sq - pot;
}

inline double hamilton_value_at(const MetricSpec& M, const SolitonCandidate& c, const Point& p) {
    if (!c.is_gradient())
        throw ValidationError("hamilton_value_at expects a gradient candidate");
    detail::require_chart(M, c.chart(), "candidate");
    return hamilton_value(c.potential(), c.lambda(), frame_at(M, p));
}

/// Max absolute entry of L_X g - c g. c = 0 measures the Killing defect.
inline double homothety_defect(const VectorFieldSpec& X, double c, const PointFrame& F) {
    Matrix L = lie_derivative_metric(X, F);
    double worst = 0.0;
    for (std::size_t i = 0; i < F.d; ++i)
        for (std::size_t j = 0; j < F.d; ++j)
            worst = std::max(worst, std::abs(L(i, j) - c * F.g(i, j)));
    return worst;
}

inline double homothety_defect_at(const MetricSpec& M, const VectorFieldSpec& X, double c,
                                  const Point& p) {
    detail::require_chart(M, X.chart(), "vector field");
    return homothety_defect(X, c, frame_at(M, p));
}

/// Max absolute entry of the squared Ricci operator. Two-step nilpotency
/// forces the scalar curvature to vanish as well; pass scalar_abs to receive
/// |Sc| alongside.
inline double nilpotency_defect(const PointFrame& F, double* scalar_abs = nullptr) {
    Matrix Q2 = multiply(F.ricci_op, F.ricci_op);
    if (scalar_abs) *scalar_abs = std::abs(F.scalar);
    return Q2.max_abs();
}

inline double nilpotency_defect_at(const MetricSpec& M, const Point& p,
                                   double* scalar_abs = nullptr) {
    return nilpotency_defect(frame_at(M, p), scalar_abs);
}

// ---------------------------------------------------------------------------
// Gradient diagnostics
// ---------------------------------------------------------------------------

struct DiagnosticsResult {
    double norm_sq_grad = 0.0;     // g(grad h, grad h), signed
    double geodesic_defect = 0.0;  // max component of nabla_{grad h} grad h
    double recurrence_defect = 0.0;
    double hamilton_value = 0.0;
    double nilpotency_defect = 0.0;
    double ricci_grad_max = 0.0;   // max entry of Ric(grad h, .)
};

/// Pointwise structure of a gradient candidate. The recurrence defect is the
/// largest normalized 2x2 minor of [nabla_i grad h ; grad h] over coordinate
/// directions i: it vanishes iff every covariant derivative of grad h stays
/// parallel to grad h. A vanishing gradient makes every minor zero, so the
/// defect degrades gracefully to 0 there.
inline DiagnosticsResult gradient_diagnostics(const ScalarFieldSpec& h, const PointFrame& F,
                                              double lambda = 0.0) {
    const std::size_t d = F.d;
    DiagnosticsResult out;

    std::vector<double> G = gradient(h, F);
    Matrix H = hessian(h, F);

    double sup_g = 0.0;
    for (double c : G) sup_g = std::max(sup_g, std::abs(c));

    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) out.norm_sq_grad += F.g(i, j) * G[i] * G[j];

    // N(i,k) = nabla_i (grad h)^k = g^{km} Hes_{im}
    Matrix N(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            double s = 0.0;
            for (std::size_t m = 0; m < d; ++m) s += F.g_inv(k, m) * H(i, m);
            N(i, k) = s;
        }

    for (std::size_t k = 0; k < d; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += G[i] * N(i, k);
        out.geodesic_defect = std::max(out.geodesic_defect, std::abs(s));
    }

    for (std::size_t i = 0; i < d; ++i) {
        double sup_n = 0.0;
        for (std::size_t k = 0; k < d; ++k) sup_n = std::max(sup_n, std::abs(N(i, k)));
        double scale = 1.0 + sup_g * sup_n;
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = k + 1; l < d; ++l) {
                double minor = N(i, k) * G[l] - N(i, l) * G[k];
                out.recurrence_defect = std::max(out.recurrence_defect, std::abs(minor) / scale);
            }
    }

    out.hamilton_value = hamilton_value(h, lambda, F);
    out.nilpotency_defect = nilpotency_defect(F);

    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += F.ricci(i, j) * G[j];
        out.ricci_grad_max = std::max(out.ricci_grad_max, std::abs(s));
    }
    return out;
}

inline DiagnosticsResult gradient_diagnostics_at(const MetricSpec& M, const ScalarFieldSpec& h,
                                                 const Point& p, double lambda = 0.0) {
    detail::require_chart(M, h.chart(), "scalar field");
    return gradient_diagnostics(h, frame_at(M, p), lambda);
}

} // namespace ricci
