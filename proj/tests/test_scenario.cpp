#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <string>

#include "ricci/scenario.hpp"

using namespace ricci;

namespace {

/// Loads scenario text and reports whether it fails with a message containing
/// `needle`. Surfaces the actual message on mismatch.
bool load_fails_with(const std::string& text, const std::string& needle) {
    try {
        Scenario::from_text(text, "t");
    } catch (const std::exception& e) {
        std::string msg = e.what();
        if (msg.find(needle) == std::string::npos) {
            UNSCOPED_INFO("expected '" << needle << "' in: " << msg);
            return false;
        }
        return true;
    }
    UNSCOPED_INFO("no exception for text expecting '" << needle << "'");
    return false;
}

const CheckResult& check_named(const Report& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c;
    throw std::runtime_error("report has no check '" + name + "'");
}

const std::string kReferenceText = R"([metric]
family = cahen_wallach
n = 2
kappa = 2, 3
[candidate]
kind = particular
lambda = 1
[sampling]
box.u = -1, 1
box.v = -1, 1
box.x1 = -1, 1
box.x2 = -1, 1
count = 100
seed = 42
[checks]
enable = residual, lambda_consistency, nilpotency, signature
)";

std::string scenario_dir() {
    const char* dir = std::getenv("RICCISOL_SCENARIOS");
    REQUIRE(dir != nullptr);
    return std::string(dir);
}

} // namespace

TEST_CASE("scenario text fills documented defaults", "[scenario]") {
    Scenario s = Scenario::from_text(R"([metric]
family = cahen_wallach
kappa = 2, 3
[candidate]
kind = particular
lambda = 1
[checks]
enable = residual
)",
                                     "defaults");
    CHECK(s.name() == "defaults");
    CHECK(s.count() == 100);
    CHECK(s.seed() == 42);
    CHECK(s.tolerance() == 1e-8);
    CHECK(s.killing_c() == 0.0);
    REQUIRE(s.box().size() == 4);
    for (const Interval& iv : s.box()) {
        CHECK(iv.lo == -1.0);
        CHECK(iv.hi == 1.0);
    }
    CHECK(s.check_enabled("residual"));
    CHECK_FALSE(s.check_enabled("weyl"));
    CHECK(s.metric().chart().names() == std::vector<std::string>{"u", "v", "x1", "x2"});
    CHECK(s.candidate().lambda() == 1.0);
}

TEST_CASE("the reference wave scenario passes every enabled check", "[scenario]") {
    Scenario s = Scenario::from_text(kReferenceText, "reference");
    Report r = run(s);
    CHECK(r.points_evaluated == 100);
    CHECK(r.points_rejected == 0); // wave metrics are admissible everywhere
    CHECK(r.evaluation_errors == 0);
    CHECK(r.lambda == 1.0);
    CHECK(r.classification == "shrinking");
    REQUIRE(r.checks.size() == 4);
    for (const auto& c : r.checks) {
        INFO(c.name << " residual " << c.max_residual);
        CHECK(c.pass);
    }
    CHECK(check_named(r, "signature").max_residual == 0.0);
    CHECK(check_named(r, "nilpotency").max_residual <= 1e-12);
    CHECK(r.tally_zero + r.tally_null + r.tally_timelike + r.tally_spacelike == 100);
    CHECK(r.overall_pass);
}

TEST_CASE("reports are byte-identical across repeated runs", "[scenario]") {
    Scenario s = Scenario::from_text(kReferenceText, "reference");
    std::string a = render_json(run(s));
    std::string b = render_json(run(s));
    CHECK(a == b);
    CHECK(a.find("\"scenario\": \"reference\"") != std::string::npos);
    CHECK(a.find("\"seed\": 42") != std::string::npos);
    CHECK(a.back() == '\n');
    CHECK(render_text(run(s)) == render_text(run(s)));
    // key order is pinned: scenario first, overall verdict last
    CHECK(a.find("\"scenario\"") < a.find("\"seed\""));
    CHECK(a.find("\"causal_character\"") < a.find("\"checks\""));
    CHECK(a.rfind("\"overall_pass\"") > a.find("\"checks\""));
}

TEST_CASE("changing the seed moves the sample", "[scenario]") {
    Scenario s = Scenario::from_text(kReferenceText, "reference");
    SampleResult base = sample_points(s);
    REQUIRE(base.points.size() == 100);
    for (const Point& p : base.points)
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(p[i] >= -1.0);
            CHECK(p[i] <= 1.0);
        }
    s.set_seed(43);
    SampleResult moved = sample_points(s);
    CHECK(base.points[0] != moved.points[0]);
    s.set_seed(42);
    SampleResult again = sample_points(s);
    CHECK(base.points == again.points);
}

TEST_CASE("runtime overrides validate their arguments", "[scenario]") {
    Scenario s = Scenario::from_text(kReferenceText, "reference");
    CHECK_THROWS_AS(s.set_count(0), ValidationError);
    CHECK_THROWS_AS(s.set_tolerance(0.0), ValidationError);
    CHECK_THROWS_AS(s.set_tolerance(-1e-8), ValidationError);
    s.set_count(7);
    s.set_tolerance(1e-5);
    Report r = run(s);
    CHECK(r.points_evaluated == 7);
    CHECK(check_named(r, "residual").tolerance == 1e-5);
}

TEST_CASE("quadrature-backed candidates loosen the default tolerance", "[scenario]") {
    Scenario grad = Scenario::from_text(R"([metric]
family = egorov
n = 1
f = exp(-u)
[candidate]
kind = gradient
lambda = 0
[checks]
enable = residual, lambda_consistency, hamilton, diagnostics
)",
                                        "grad");
    CHECK(grad.tolerance() == 1e-6);
    Report r = run(grad);
    CHECK(r.classification == "steady");
    CHECK(r.overall_pass);

    // explicit tolerance wins over the automatic widening
    Scenario tight = Scenario::from_text(R"([metric]
family = egorov
n = 2
f = exp(2*u)
[candidate]
kind = particular
lambda = -1
primitive = -2*u
[sampling]
count = 60
[checks]
enable = residual, lambda_consistency
tolerance = 1e-10
)",
                                         "tight");
    CHECK(tight.tolerance() == 1e-10);
    Report t = run(tight);
    CHECK(t.classification == "expanding");
    CHECK(t.overall_pass);
}

TEST_CASE("wave scenarios certify curvature structure checks", "[scenario]") {
    Scenario s = Scenario::from_text(R"([metric]
family = egorov
n = 2
f = 1 + u^2
[candidate]
kind = particular
lambda = 0
[sampling]
count = 40
[checks]
enable = residual, weyl, bianchi
)",
                                     "egorov-structure");
    CHECK(s.tolerance() == 1e-6); // quadrature-backed primitive
    Report r = run(s);
    CHECK(r.overall_pass);
    CHECK(check_named(r, "weyl").max_residual <= 1e-9); // conformally flat
    CHECK(check_named(r, "bianchi").max_residual <= 1e-8);
}

TEST_CASE("particular candidates are self-consistent for any lambda", "[scenario]") {
    Scenario s = Scenario::from_text(R"([metric]
family = cahen_wallach
kappa = 1, -1
[candidate]
kind = particular
lambda = 5
[sampling]
count = 30
[checks]
enable = residual, lambda_consistency
)",
                                     "cw5");
    Report r = run(s);
    CHECK(r.overall_pass);
    CHECK(r.classification == "shrinking");
}

TEST_CASE("custom metrics accept parameters and scalar potentials", "[scenario]") {
    Scenario s = Scenario::from_text(R"([metric]
family = custom
coords = u, v, x1, x2
g.1.2 = 1
g.3.3 = 1
g.4.4 = 1
[params]
amp = 0.5
[candidate]
kind = custom
lambda = 2
h = u*v + amp*(x1^2 + x2^2)
[sampling]
count = 50
[checks]
enable = residual, lambda_consistency, hamilton
)",
                                     "gaussian");
    Report r = run(s);
    CHECK(r.overall_pass);
    CHECK(check_named(r, "residual").max_residual <= 1e-12);
    CHECK(check_named(r, "hamilton").max_residual <= 1e-12);
}

TEST_CASE("killing_defect certifies homotheties of flat space", "[scenario]") {
    Scenario s = Scenario::from_text(R"([metric]
family = custom
coords = t, x
g.1.1 = -1
g.2.2 = 1
[candidate]
kind = custom
lambda = 2
X.t = t
X.x = x
[sampling]
count = 25
[checks]
enable = residual, lambda_consistency, killing_defect
killing_c = 2
)",
                                     "homothety");
    CHECK(s.killing_c() == 2.0);
    Report r = run(s);
    CHECK(r.overall_pass);
    CHECK(check_named(r, "killing_defect").max_residual <= 1e-12);
}

TEST_CASE("a mismatched lambda fails with the exact metric gap", "[scenario]") {
    Scenario s = Scenario::from_text(R"([metric]
family = custom
coords = t, x
g.1.1 = -1
g.2.2 = 1
[candidate]
kind = custom
lambda = 1
X.t = 0
[sampling]
count = 20
[checks]
enable = residual
)",
                                     "offby1");
    Report r = run(s);
    CHECK_FALSE(r.overall_pass);
    // residual is exactly -lambda g on a flat metric with a zero field
    CHECK(check_named(r, "residual").max_residual == 1.0);
}

TEST_CASE("signature counts points violating the Lorentzian sign pattern", "[scenario]") {
    Scenario s = Scenario::from_text(R"([metric]
family = custom
coords = x, y
g.1.1 = 1
g.2.2 = 1
[candidate]
kind = custom
lambda = 0
X.x = 0
[sampling]
count = 25
[checks]
enable = signature
)",
                                     "euclid");
    Report r = run(s);
    CHECK_FALSE(r.overall_pass);
    CHECK(check_named(r, "signature").max_residual == 25.0);
}

TEST_CASE("degenerate metrics exhaust the admissible sampler", "[scenario]") {
    Scenario s = Scenario::from_text(R"([metric]
family = custom
coords = t, x
g.1.1 = 1
g.1.2 = 1
g.2.2 = 1
[candidate]
kind = custom
lambda = 0
X.t = 0
[sampling]
count = 5
[checks]
enable = residual
)",
                                     "degenerate");
    CHECK_THROWS_AS(sample_points(s), ValidationError);
    CHECK_THROWS_AS(run(s), ValidationError);
}

TEST_CASE("malformed scenario text is rejected with line context", "[scenario]") {
    const std::string head = R"([metric]
family = cahen_wallach
kappa = 2, 3
[candidate]
kind = particular
lambda = 1
[checks]
enable = residual
)";

    CHECK(load_fails_with(R"([metric]
family = torus
[candidate]
kind = particular
[checks]
enable = residual
)",
                          "unknown family"));

    CHECK(load_fails_with(R"([metric]
family = cahen_wallach
[candidate]
kind = particular
[checks]
enable = residual
)",
                          "missing key 'kappa'"));

    CHECK(load_fails_with(R"([metric]
family = cahen_wallach
kappa = 2, 3
kappa = 1
)" + head.substr(head.find("[candidate]")),
                          "line 4: duplicate key 'kappa'"));

    CHECK(load_fails_with(head + "colour = red\n", "line 9: unknown key 'colour'"));
    CHECK(load_fails_with("[metrics]\n" + head.substr(head.find("family")),
                          "line 1: unknown section [metrics]"));
    CHECK(load_fails_with("[metric]\nfamily cahen_wallach\n", "line 2: expected key = value"));
    CHECK(load_fails_with("family = cahen_wallach\n", "line 1: key before any [section]"));

    CHECK(load_fails_with(head.substr(0, head.find("enable")) + "enable = residual, ricciflow\n",
                          "unknown check 'ricciflow' (valid: "));
    CHECK(load_fails_with(head.substr(0, head.find("enable")) + "enable = residual, residual\n",
                          "enabled twice"));

    CHECK(load_fails_with(R"([metric]
family = cahen_wallach
kappa = 2, 0
[candidate]
kind = particular
[checks]
enable = residual
)",
                          "nonzero"));

    CHECK(load_fails_with(head + "[sampling]\ncount = 0\n", "must be at least 1"));
    CHECK(load_fails_with(head + "[sampling]\nbox.u = 1, -1\n", "lo < hi"));
    CHECK(load_fails_with(head + "[params]\nm = 1\n", "[params] applies to custom metrics only"));
    CHECK(load_fails_with(head.substr(0, head.find("enable")) + "enable = residual, hamilton\n",
                          "need a gradient candidate"));

    CHECK(load_fails_with(R"([metric]
family = epsilon
n = 2
epsilon = 1
[candidate]
kind = gradient
lambda = 1
[checks]
enable = residual
)",
                          "lambda = 0"));

    // diagnostics with lambda = 0 on a gradient candidate is legal
    CHECK_NOTHROW(Scenario::from_text(R"([metric]
family = epsilon
n = 2
epsilon = 1
[candidate]
kind = gradient
lambda = 0
alpha = 0
beta = 0
[checks]
enable = diagnostics
)",
                                      "ok"));

    CHECK(load_fails_with(R"([metric]
family = custom
coords = t, x
g.1.1 = -1
g.2.2 = 1
[candidate]
kind = custom
lambda = 1
h = t^2
[checks]
enable = diagnostics
)",
                          "lambda must be 0"));

    CHECK(load_fails_with(R"([metric]
family = custom
coords = t, x
g.1.1 = -1
g.2.2 = 1
[candidate]
kind = custom
lambda = 0
X.t = 0
[checks]
enable = weyl
)",
                          "dimension >= 3"));

    CHECK(load_fails_with(R"([metric]
family = egorov
n = 1
f = u + 2
u_domain = -1, 1
[candidate]
kind = particular
lambda = 0
[sampling]
box.u = -1.5, 1
[checks]
enable = residual
)",
                          "positivity domain"));

    CHECK(load_fails_with(R"([metric]
family = egorov
n = 1
f = u
[candidate]
kind = particular
lambda = 0
[checks]
enable = residual
)",
                          "not positive"));

    CHECK(load_fails_with(R"([metric]
family = custom
coords = t, x
g.1.1 = -1
g.2.2 = 1
[candidate]
kind = particular
lambda = 0
[checks]
enable = residual
)",
                          "custom metrics accept only custom candidates"));

    CHECK(load_fails_with(R"([metric]
family = custom
coords = t, x
g.1.1 = -1
g.2.2 = 1
[candidate]
kind = custom
lambda = 0
h = t
X.t = 1
[checks]
enable = residual
)",
                          "not both"));

    CHECK(load_fails_with(R"([metric]
family = custom
coords = t, x
g.1.1 = -1
g.2.2 = 1
[candidate]
kind = custom
lambda = 0
[checks]
enable = residual
)",
                          "needs h = <expr> or X.<coord>"));

    CHECK(load_fails_with(R"([metric]
family = egorov
n = 2
f = exp(2*u)
[candidate]
kind = general
A.1 = 0, 1
[checks]
enable = residual
)",
                          "missing row 2"));

    CHECK(load_fails_with(R"([metric]
family = cahen_wallach
n = 3
kappa = 2, 3
[candidate]
kind = particular
[checks]
enable = residual
)",
                          "does not match the kappa list length"));

    CHECK(load_fails_with(R"([metric]
family = epsilon
n = 2
epsilon = 0
[candidate]
kind = particular
[checks]
enable = residual
)",
                          "epsilon must be nonzero"));
}

TEST_CASE("shipped scenario files load and behave as documented", "[scenario]") {
    const std::string dir = scenario_dir();

    SECTION("the reference scenario file certifies the shrinking wave") {
        Scenario s = load_scenario(dir + "/cw_shrinking.scn");
        CHECK(s.name() == "cw_shrinking");
        Report r = run(s);
        CHECK(r.overall_pass);
        CHECK(r.points_evaluated == 100);
        CHECK(r.points_rejected == 0);
        CHECK(render_json(run(s)) == render_json(run(s)));
    }

    SECTION("the mismatched-lambda file fails its residual check") {
        Scenario s = load_scenario(dir + "/egorov_wrong_lambda.scn");
        Report r = run(s);
        CHECK_FALSE(r.overall_pass);
        // residual is -4g for a field solving the lambda = 1 equation
        CHECK(check_named(r, "residual").max_residual >= 4.0);
    }

    SECTION("the malformed file is rejected at load time") {
        CHECK_THROWS_AS(load_scenario(dir + "/malformed.scn"), ValidationError);
    }

    SECTION("the steady gradient demo passes with its tightened tolerance") {
        Scenario s = load_scenario(dir + "/epsilon_gradient.scn");
        CHECK(s.tolerance() == 1e-9);
        Report r = run(s);
        CHECK(r.overall_pass);
        CHECK(r.classification == "steady");
    }

    SECTION("the general-solution demo passes on the flat profile") {
        Scenario s = load_scenario(dir + "/egorov_general.scn");
        Report r = run(s);
        CHECK(r.overall_pass);
        CHECK(r.classification == "expanding");
    }

    SECTION("a missing file reports its path") {
        CHECK_THROWS_AS(load_scenario(dir + "/does_not_exist.scn"), ValidationError);
    }
}
