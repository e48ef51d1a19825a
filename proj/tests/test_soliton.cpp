// Soliton layer: residuals, classification, consistency checks, and the
// gradient diagnostics.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ricci/soliton.hpp"

using namespace ricci;

namespace {

Expression zero_e() { return constant(0.0); }

/// Flat wave chart du dv + dx1^2 + dx2^2.
MetricSpec flat_wave() {
    Chart c({"u", "v", "x1", "x2"});
    std::vector<std::vector<Expression>> comp(4, std::vector<Expression>(4, zero_e()));
    comp[0][1] = comp[1][0] = constant(1.0);
    comp[2][2] = comp[3][3] = constant(1.0);
    return MetricSpec(c, comp, {});
}

MetricSpec minkowski2() {
    Chart c({"t", "x"});
    std::vector<std::vector<Expression>> comp(2, std::vector<Expression>(2, zero_e()));
    comp[0][0] = constant(-1.0);
    comp[1][1] = constant(1.0);
    return MetricSpec(c, comp, {});
}

MetricSpec cahen_wallach_23() {
    Chart c({"u", "v", "x1", "x2"});
    std::vector<std::vector<Expression>> comp(4, std::vector<Expression>(4, zero_e()));
    comp[0][0] = parse("2*x1^2 + 3*x2^2", c, {});
    comp[0][1] = comp[1][0] = constant(1.0);
    comp[2][2] = comp[3][3] = constant(1.0);
    return MetricSpec(c, comp, {});
}

MetricSpec unit_sphere() {
    Chart c({"th", "ph"});
    std::vector<std::vector<Expression>> comp(2, std::vector<Expression>(2, zero_e()));
    comp[0][0] = constant(1.0);
    comp[1][1] = parse("sin(th)^2", c, {});
    return MetricSpec(c, comp, {});
}

const std::vector<Point>& wave_points() {
    static const std::vector<Point> pts = {
        {0.0, 0.0, 0.0, 0.0},
        {0.3, -0.7, 0.4, 1.1},
        {-0.5, 0.2, -0.9, 0.6},
        {0.8, 0.8, 0.1, -0.3},
    };
    return pts;
}

} // namespace

TEST_CASE("candidate construction and accessors") {
    MetricSpec M = flat_wave();
    const Chart& c = M.chart();
    VectorFieldSpec X(c, {constant(1.0), zero_e(), zero_e(), zero_e()});
    ScalarFieldSpec h(c, parse("u^2", c, {}));

    SolitonCandidate cv = SolitonCandidate::vector(X, 1.5);
    CHECK(cv.kind() == SolitonCandidate::Kind::Vector);
    CHECK_FALSE(cv.is_gradient());
    CHECK(cv.lambda() == 1.5);
    CHECK_NOTHROW(cv.field());
    CHECK_THROWS_AS(cv.potential(), ValidationError);

    SolitonCandidate cg = SolitonCandidate::gradient(h, -2.0);
    CHECK(cg.is_gradient());
    CHECK_NOTHROW(cg.potential());
    CHECK_THROWS_AS(cg.field(), ValidationError);
    CHECK(cg.chart() == c);
    CHECK_FALSE(cg.has_antiderivative());

    CHECK_THROWS_AS(SolitonCandidate::vector(X, std::nan("")), ValidationError);
    CHECK_THROWS_AS(SolitonCandidate::gradient(h, INFINITY), ValidationError);
}

TEST_CASE("classification follows the exact sign of lambda") {
    CHECK(classify(1e-300) == SolitonType::Shrinking);
    CHECK(classify(0.0) == SolitonType::Steady);
    CHECK(classify(-1e-300) == SolitonType::Expanding);
    CHECK(to_string(SolitonType::Shrinking) == std::string("shrinking"));
    CHECK(to_string(SolitonType::Steady) == std::string("steady"));
    CHECK(to_string(SolitonType::Expanding) == std::string("expanding"));
}

TEST_CASE("position field on flat space is a shrinking soliton with lambda two") {
    MetricSpec M = minkowski2();
    const Chart& c = M.chart();
    VectorFieldSpec X(c, {parse("t", c, {}), parse("x", c, {})});
    for (const Point& p : {Point{0.0, 0.0}, Point{0.7, -0.2}, Point{-1.3, 2.0}}) {
        PointFrame F = frame_at(M, p);
        CHECK(soliton_residual(X, 2.0, F).max_abs() <= 1e-14);
        CHECK(soliton_residual(X, 1.0, F).max_abs() >= 0.9);
    }
}

TEST_CASE("adding a Killing field preserves the soliton equation") {
    MetricSpec M = minkowski2();
    const Chart& c = M.chart();
    VectorFieldSpec X(c, {parse("t", c, {}), parse("x", c, {})});
    // Lorentz boost: Killing for dt^2 - dx^2 style metrics.
    VectorFieldSpec boost(c, {parse("x", c, {}), parse("t", c, {})});
    VectorFieldSpec Y = add(X, boost);
    PointFrame F = frame_at(M, {0.4, -1.1});
    CHECK(lie_derivative_metric(boost, F).max_abs() <= 1e-14);
    CHECK(soliton_residual(Y, 2.0, F).max_abs() <= 1e-13);
}

TEST_CASE("residuals are affine in the candidate and in lambda") {
    MetricSpec M = cahen_wallach_23();
    const Chart& c = M.chart();
    VectorFieldSpec X1(c, {parse("u", c, {}), parse("v - x1", c, {}),
                           parse("x2^2", c, {}), parse("u*x1", c, {})});
    VectorFieldSpec X2(c, {parse("x2", c, {}), parse("u^2", c, {}),
                           parse("v", c, {}), parse("-x2", c, {})});
    double l1 = 0.7, l2 = -1.2;
    for (const Point& p : wave_points()) {
        PointFrame F = frame_at(M, p);
        Matrix r1 = soliton_residual(X1, l1, F);
        Matrix r2 = soliton_residual(X2, l2, F);
        Matrix rs = soliton_residual(add(X1, X2), l1 + l2, F);
        // Both sides count Ric once more than the sum of parts.
        for (std::size_t i = 0; i < F.d; ++i)
            for (std::size_t j = 0; j < F.d; ++j)
                CHECK(std::abs(rs(i, j) - (r1(i, j) + r2(i, j) - F.ricci(i, j))) <= 1e-10);
    }
}

TEST_CASE("gradient residual equals vector residual of the gradient field") {
    // L_{grad h} g = 2 Hes h makes the two residual notions agree whenever
    // the gradient can be written symbolically.
    MetricSpec M = cahen_wallach_23();
    const Chart& c = M.chart();
    // h = u^2: grad h = 2u d/dv on this metric (g^{uv} = 1, g^{uu} = 0).
    ScalarFieldSpec h(c, parse("u^2", c, {}));
    VectorFieldSpec gradh(c, {zero_e(), parse("2*u", c, {}), zero_e(), zero_e()});
    for (const Point& p : wave_points()) {
        PointFrame F = frame_at(M, p);
        auto gv = gradient(h, F);
        CHECK(std::abs(gv[1] - 2.0 * p[0]) <= 1e-13);
        Matrix a = gradient_residual(h, 0.3, F);
        Matrix b = soliton_residual(gradh, 0.3, F);
        for (std::size_t i = 0; i < F.d; ++i)
            for (std::size_t j = 0; j < F.d; ++j) CHECK(std::abs(a(i, j) - b(i, j)) <= 1e-12);
    }
}

TEST_CASE("flat wave Gaussian potential is an exact shrinking gradient soliton") {
    MetricSpec M = flat_wave();
    const Chart& c = M.chart();
    ScalarFieldSpec h(c, parse("u*v + 0.5*(x1^2 + x2^2)", c, {}));
    SolitonCandidate cand = SolitonCandidate::gradient(h, 2.0);
    for (const Point& p : wave_points()) {
        PointFrame F = frame_at(M, p);
        CHECK(residual(cand, F).max_abs() <= 1e-13);
        CHECK(std::abs(lambda_consistency(cand, F)) <= 1e-13);
    }
    // Hamilton quantity Sc + 2|grad h|^2 - 2 lambda h is the same constant
    // at every point (here exactly zero).
    for (const Point& p : wave_points()) {
        PointFrame F = frame_at(M, p);
        CHECK(std::abs(hamilton_value(h, 2.0, F)) <= 1e-12);
    }
}

TEST_CASE("lambda consistency is the trace of the soliton equation") {
    // lambda = (2 div X + Sc) / d for exact solitons; a wrong lambda shows up
    // as the exact offset.
    MetricSpec M = minkowski2();
    const Chart& c = M.chart();
    VectorFieldSpec X(c, {parse("t", c, {}), parse("x", c, {})});
    PointFrame F = frame_at(M, {0.2, 0.9});
    SolitonCandidate good = SolitonCandidate::vector(X, 2.0);
    SolitonCandidate off = SolitonCandidate::vector(X, 2.5);
    CHECK(std::abs(lambda_consistency(good, F)) <= 1e-14);
    CHECK(lambda_consistency(off, F) == Catch::Approx(0.5).margin(1e-13));

    // Gradient form uses the metric trace of the hessian.
    ScalarFieldSpec h(c, parse("-0.25*t^2 + 0.25*x^2", c, {}));
    SolitonCandidate hg = SolitonCandidate::gradient(h, 1.0);
    CHECK(std::abs(lambda_consistency(hg, F)) <= 1e-14);
}

TEST_CASE("hamilton value skips the potential when lambda is zero") {
    // With lambda = 0 the identity reads Sc + 2|grad h|^2; a potential whose
    // evaluation would fail elsewhere is never touched.
    MetricSpec M = cahen_wallach_23();
    const Chart& c = M.chart();
    ScalarFieldSpec h(c, parse("ln(u)", c, {}));  // not evaluable at u <= 0
    PointFrame F = frame_at(M, {-2.0, 0.0, 0.3, 0.4});
    // grad(ln u) = (1/u) d/dv is null, so the whole quantity is Sc = 0.
    CHECK(std::abs(hamilton_value(h, 0.0, F)) <= 1e-13);
    CHECK_THROWS_AS(hamilton_value(h, 1.0, F), EvalError);
}

TEST_CASE("homothety defect measures L_X g - c g") {
    MetricSpec M = minkowski2();
    const Chart& c = M.chart();
    VectorFieldSpec X(c, {parse("t", c, {}), parse("x", c, {})});
    VectorFieldSpec boost(c, {parse("x", c, {}), parse("t", c, {})});
    PointFrame F = frame_at(M, {0.4, -1.1});
    CHECK(homothety_defect(X, 2.0, F) <= 1e-14);
    CHECK(homothety_defect(boost, 0.0, F) <= 1e-14);
    CHECK(homothety_defect(X, 0.0, F) == Catch::Approx(2.0).margin(1e-13));
}

TEST_CASE("nilpotency defect separates waves from Einstein metrics") {
    {
        PointFrame F = frame_at(cahen_wallach_23(), {0.2, -0.3, 0.4, 0.5});
        double sc = -1.0;
        CHECK(nilpotency_defect(F, &sc) <= 1e-14);
        CHECK(sc <= 1e-13);
    }
    {
        PointFrame F = frame_at(unit_sphere(), {1.0, 2.0});
        double sc = 0.0;
        double q2 = nilpotency_defect(F, &sc);
        // Ric = g means the Ricci operator is the identity: Q^2 has norm 1
        // and the scalar curvature is 2.
        CHECK(q2 == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(sc == Catch::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("gradient diagnostics certify the null recurrent structure") {
    MetricSpec M = cahen_wallach_23();
    const Chart& c = M.chart();
    // Steady gradient potential: h'' = -Ric_uu / 2 = (k1 + k2)/2 = 5/2.
    ScalarFieldSpec h(c, parse("0.7 - 0.3*u + 1.25*u^2", c, {}));
    SolitonCandidate cand = SolitonCandidate::gradient(h, 0.0);
    for (const Point& p : wave_points()) {
        PointFrame F = frame_at(M, p);
        CHECK(residual(cand, F).max_abs() <= 1e-13);
        DiagnosticsResult D = gradient_diagnostics(h, F, 0.0);
        CHECK(std::abs(D.norm_sq_grad) <= 1e-13);
        CHECK(D.geodesic_defect <= 1e-13);
        CHECK(D.recurrence_defect <= 1e-13);
        CHECK(D.ricci_grad_max <= 1e-13);
        CHECK(D.nilpotency_defect <= 1e-13);
        CHECK(std::abs(D.hamilton_value) <= 1e-12);
    }
    // The same potential's gradient is causally null at every point.
    PointFrame F = frame_at(M, {0.3, -0.7, 0.4, 1.1});
    auto comps = candidate_components(cand, F);
    CHECK(causal_character_of(F.g, comps) == CausalCharacter::Null);
}

TEST_CASE("diagnostics flag potentials without the null structure") {
    MetricSpec M = minkowski2();
    const Chart& c = M.chart();
    ScalarFieldSpec h(c, parse("x^2", c, {}));
    PointFrame F = frame_at(M, {0.0, 0.7});
    DiagnosticsResult D = gradient_diagnostics(h, F, 0.0);
    // grad h = 2x d/dx has squared norm 4 x^2 > 0: spacelike, not null.
    CHECK(D.norm_sq_grad == Catch::Approx(4.0 * 0.49).epsilon(1e-12));
}

TEST_CASE("candidate components are the field or the gradient") {
    MetricSpec M = flat_wave();
    const Chart& c = M.chart();
    VectorFieldSpec X(c, {constant(1.0), constant(2.0), constant(3.0), constant(4.0)});
    ScalarFieldSpec h(c, parse("u*v", c, {}));
    PointFrame F = frame_at(M, {0.5, -0.25, 0.0, 0.0});
    auto xv = candidate_components(SolitonCandidate::vector(X, 0.0), F);
    CHECK(xv == std::vector<double>{1.0, 2.0, 3.0, 4.0});
    auto gv = candidate_components(SolitonCandidate::gradient(h, 0.0), F);
    // grad(uv) = u d/du + v d/dv under g^{uv} = 1.
    CHECK(gv[0] == Catch::Approx(0.5).margin(1e-14));
    CHECK(gv[1] == Catch::Approx(-0.25).margin(1e-14));
    CHECK(gv[2] == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("point wrappers validate the candidate chart") {
    MetricSpec M = minkowski2();
    Chart other({"a", "b"});
    VectorFieldSpec X(other, {constant(0.0), constant(0.0)});
    SolitonCandidate cand = SolitonCandidate::vector(X, 0.0);
    CHECK_THROWS_AS(soliton_residual_at(M, cand, {0.0, 0.0}), ValidationError);
    ScalarFieldSpec h(other, constant(1.0));
    SolitonCandidate cg = SolitonCandidate::gradient(h, 0.0);
    CHECK_THROWS_AS(gradient_residual_at(M, cg, {0.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(soliton_residual_at(M, cg, {0.0, 0.0}), ValidationError);
}
