#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ricci/families.hpp"
#include "ricci/report.hpp"
#include "ricci/soliton.hpp"

namespace ricci {

// ---------------------------------------------------------------------------
// Scenario files
//
// Flat key-value text with [section] headers and # comments:
//
//   [metric]     family = egorov | cahen_wallach | epsilon | custom, plus the
//                family's parameters (f/u_domain, kappa, epsilon, coords/g.i.j)
//   [params]     numeric parameters for custom metric expressions
//   [candidate]  kind = particular | general | gradient | custom, lambda, and
//                the kind's constants
//   [sampling]   box.<coord> = lo, hi ; count ; seed
//   [checks]     enable = <list> ; tolerance ; killing_c
//
// Matrix-valued keys use 1-based row indices (A.1, c.2, g.1.1) matching the
// x1..xn coordinate naming. The full grammar lives in docs/scenario_format.md.
// ---------------------------------------------------------------------------

constexpr double kDefaultTolerance = 1e-8;
constexpr double kQuadratureBackedTolerance = 1e-6;

inline const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names = {
        "residual",  "lambda_consistency", "hamilton",  "diagnostics",   "nilpotency",
        "weyl",      "bianchi",            "signature", "killing_defect"};
    return names;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct RawEntry {
    std::string value;
    std::size_t line = 0;
    mutable bool used = false;
};

/// Parsed key-value soup, before interpretation. Tracks key usage so that
/// misspelled or misplaced keys are reported instead of silently ignored.
class RawScenario {
public:
    static RawScenario parse(const std::string& text) {
        static const std::vector<std::string> sections = {"metric", "params", "candidate",
                                                          "sampling", "checks"};
        RawScenario raw;
        std::istringstream in(text);
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ValidationError("line " + std::to_string(lineno) + ": unclosed section header");
                section = trim(t.substr(1, t.size() - 2));
                if (std::find(sections.begin(), sections.end(), section) == sections.end())
                    throw ValidationError("line " + std::to_string(lineno) + ": unknown section [" +
                                          section + "]");
                continue;
            }
            std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ValidationError("line " + std::to_string(lineno) + ": expected key = value");
            if (section.empty())
                throw ValidationError("line " + std::to_string(lineno) + ": key before any [section]");
            std::string key = trim(t.substr(0, eq));
            std::string value = trim(t.substr(eq + 1));
            if (key.empty())
                throw ValidationError("line " + std::to_string(lineno) + ": empty key");
            auto& sec = raw.data_[section];
            if (sec.count(key))
                throw ValidationError("line " + std::to_string(lineno) + ": duplicate key '" + key +
                                      "' in [" + section + "]");
            sec[key] = RawEntry{value, lineno, false};
        }
        return raw;
    }

    bool has_section(const std::string& s) const { return data_.count(s) > 0; }

    std::optional<std::string> get(const std::string& section, const std::string& key) const {
        auto si = data_.find(section);
        if (si == data_.end()) return std::nullopt;
        auto ki = si->second.find(key);
        if (ki == si->second.end()) return std::nullopt;
        ki->second.used = true;
        return ki->second.value;
    }

    std::string require(const std::string& section, const std::string& key) const {
        auto v = get(section, key);
        if (!v) throw ValidationError("missing key '" + key + "' in [" + section + "]");
        return *v;
    }

    /// Keys in a section sharing a prefix, in lexicographic order.
    std::vector<std::string> keys_with_prefix(const std::string& section,
                                              const std::string& prefix) const {
        std::vector<std::string> out;
        auto si = data_.find(section);
        if (si == data_.end()) return out;
        for (const auto& [k, v] : si->second)
            if (k.rfind(prefix, 0) == 0) out.push_back(k);
        return out;
    }

    /// All keys of a section, marking them used (for free-form sections).
    std::vector<std::pair<std::string, std::string>> consume_all(const std::string& section) const {
        std::vector<std::pair<std::string, std::string>> out;
        auto si = data_.find(section);
        if (si == data_.end()) return out;
        for (const auto& [k, v] : si->second) {
            v.used = true;
            out.emplace_back(k, v.value);
        }
        return out;
    }

    void check_fully_used() const {
        for (const auto& [section, keys] : data_)
            for (const auto& [key, entry] : keys)
                if (!entry.used)
                    throw ValidationError("line " + std::to_string(entry.line) + ": unknown key '" +
                                          key + "' in [" + section + "]");
    }

private:
    std::map<std::string, std::map<std::string, RawEntry>> data_;
};

inline double to_double(const std::string& s, const std::string& ctx) {
    std::string t = trim(s);
    double v = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw ValidationError(ctx + ": '" + s + "' is not a number");
    if (!std::isfinite(v)) throw ValidationError(ctx + ": value must be finite");
    return v;
}

inline std::uint64_t to_u64(const std::string& s, const std::string& ctx) {
    std::string t = trim(s);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw ValidationError(ctx + ": '" + s + "' is not an unsigned integer");
    return v;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    if (out.size() == 1 && out[0].empty()) out.clear();
    for (const auto& e : out)
        if (e.empty()) throw ValidationError("empty entry in list '" + s + "'");
    return out;
}

inline std::vector<double> to_double_list(const std::string& s, const std::string& ctx) {
    std::vector<double> out;
    for (const auto& e : split_list(s)) out.push_back(to_double(e, ctx));
    return out;
}

inline Interval to_interval(const std::string& s, const std::string& ctx) {
    auto v = to_double_list(s, ctx);
    if (v.size() != 2) throw ValidationError(ctx + ": expected 'lo, hi'");
    return Interval(v[0], v[1]);
}

inline std::size_t to_count(const std::string& s, const std::string& ctx) {
    std::uint64_t v = to_u64(s, ctx);
    if (v < 1) throw ValidationError(ctx + ": must be at least 1");
    if (v > 1000000) throw ValidationError(ctx + ": too large");
    return static_cast<std::size_t>(v);
}

/// Rows of an n x n matrix given as keys "<prefix>.1" .. "<prefix>.n".
inline std::vector<std::vector<double>> to_matrix(const RawScenario& raw,
                                                  const std::string& section,
                                                  const std::string& prefix, std::size_t n) {
    std::vector<std::vector<double>> m;
    bool any = false;
    for (std::size_t r = 1; r <= n; ++r) {
        std::string key = prefix + "." + std::to_string(r);
        auto v = raw.get(section, key);
        if (v) any = true;
    }
    if (!any) return m; // empty: constructor fills zeros
    m.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t r = 1; r <= n; ++r) {
        std::string key = prefix + "." + std::to_string(r);
        auto v = raw.get(section, key);
        if (!v)
            throw ValidationError("matrix '" + prefix + "' is missing row " + std::to_string(r));
        auto row = to_double_list(*v, "[" + section + "] " + key);
        if (row.size() != n)
            throw ValidationError("matrix row '" + key + "' needs " + std::to_string(n) + " entries");
        m[r - 1] = row;
    }
    return m;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

class Scenario {
public:
    /// Interprets scenario text. `name` labels the report (the file stem when
    /// loaded from disk).
    static Scenario from_text(const std::string& text, const std::string& name) {
        detail::RawScenario raw = detail::RawScenario::parse(text);
        Scenario s;
        s.name_ = name;
        s.build_metric_and_candidate(raw);
        s.build_sampling(raw);
        s.build_checks(raw);
        raw.check_fully_used();
        s.validate();
        return s;
    }

    static Scenario load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_text(buf.str(), stem(path));
    }

    const std::string& name() const { return name_; }
    const MetricSpec& metric() const { return *metric_; }
    const SolitonCandidate& candidate() const { return *candidate_; }
    const std::vector<Interval>& box() const { return box_; }
    std::size_t count() const { return count_; }
    std::uint64_t seed() const { return seed_; }
    double tolerance() const { return tolerance_; }
    double killing_c() const { return killing_c_; }
    const std::vector<std::string>& checks() const { return checks_; }
    bool check_enabled(const std::string& n) const {
        return std::find(checks_.begin(), checks_.end(), n) != checks_.end();
    }
    /// Profile data when the metric is a plane-fronted wave; powers the
    /// profile-floor admissibility test during sampling.
    const std::optional<EgorovParams>& egorov_params() const { return egorov_; }

    void set_count(std::size_t c) {
        if (c < 1) throw ValidationError("sample count must be at least 1");
        count_ = c;
    }
    void set_seed(std::uint64_t s) { seed_ = s; }
    void set_tolerance(double t) {
        if (!(std::isfinite(t) && t > 0.0)) throw ValidationError("tolerance must be positive");
        tolerance_ = t;
    }

private:
    Scenario() = default;

    static std::string stem(const std::string& path) {
        std::size_t slash = path.find_last_of("/\\");
        std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
        std::size_t dot = base.find_last_of('.');
        return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
    }

    void build_metric_and_candidate(const detail::RawScenario& raw) {
        const std::string family = detail::trim(raw.require("metric", "family"));
        if (family == "egorov") build_egorov(raw);
        else if (family == "cahen_wallach") build_cw(raw);
        else if (family == "epsilon") build_epsilon(raw);
        else if (family == "custom") build_custom(raw);
        else
            throw ValidationError("unknown family '" + family +
                                  "' (valid: egorov, cahen_wallach, epsilon, custom)");
        if (raw.has_section("params") && family != "custom")
            throw ValidationError("[params] applies to custom metrics only");
    }

    std::size_t require_n(const detail::RawScenario& raw) const {
        return detail::to_count(raw.require("metric", "n"), "[metric] n");
    }

    void build_egorov(const detail::RawScenario& raw) {
        std::size_t n = require_n(raw);
        Expression f = parse(raw.require("metric", "f"), std::vector<std::string>{"u"});
        Interval dom(-1.0, 1.0);
        if (auto v = raw.get("metric", "u_domain")) dom = detail::to_interval(*v, "[metric] u_domain");
        egorov_.emplace(n, f, dom);
        metric_.emplace(egorov_metric(*egorov_));

        const std::string kind = detail::trim(raw.require("candidate", "kind"));
        double lambda = candidate_lambda(raw);
        if (kind == "particular") {
            std::optional<Expression> prim;
            if (auto v = raw.get("candidate", "primitive"))
                prim = parse(*v, std::vector<std::string>{"u"});
            candidate_.emplace(egorov_particular_soliton(*egorov_, lambda, prim));
        } else if (kind == "general") {
            EgorovGeneralConstants g;
            if (auto v = raw.get("candidate", "a")) g.a = detail::to_double(*v, "[candidate] a");
            if (auto v = raw.get("candidate", "b")) g.b = detail::to_double(*v, "[candidate] b");
            if (auto v = raw.get("candidate", "K")) g.K = detail::to_double(*v, "[candidate] K");
            if (auto v = raw.get("candidate", "c0")) g.c0 = detail::to_double(*v, "[candidate] c0");
            if (auto v = raw.get("candidate", "c")) g.c = detail::to_double_list(*v, "[candidate] c");
            if (auto v = raw.get("candidate", "k")) g.k = detail::to_double_list(*v, "[candidate] k");
            g.A = detail::to_matrix(raw, "candidate", "A", n);
            candidate_.emplace(egorov_general_soliton(*egorov_, lambda, std::move(g)));
        } else if (kind == "gradient") {
            candidate_.emplace(egorov_gradient_potential(*egorov_, lambda));
        } else if (kind == "custom") {
            build_custom_candidate(raw, lambda, {});
        } else {
            unknown_kind(kind);
        }
    }

    CWParams cw_params_from(const detail::RawScenario& raw) const {
        auto kappa = detail::to_double_list(raw.require("metric", "kappa"), "[metric] kappa");
        if (auto v = raw.get("metric", "n")) {
            std::size_t n = detail::to_count(*v, "[metric] n");
            if (n != kappa.size())
                throw ValidationError("[metric] n does not match the kappa list length");
        }
        return CWParams(std::move(kappa));
    }

    void build_cw(const detail::RawScenario& raw) {
        CWParams P = cw_params_from(raw);
        metric_.emplace(cw_metric(P));
        build_wave_candidate(raw, P);
    }

    void build_epsilon(const detail::RawScenario& raw) {
        std::size_t n = require_n(raw);
        double eps = detail::to_double(raw.require("metric", "epsilon"), "[metric] epsilon");
        if (eps == 0.0) throw ValidationError("[metric] epsilon must be nonzero");
        CWParams P(std::vector<double>(n, eps));
        metric_.emplace(cw_metric(P));
        build_wave_candidate(raw, P);
    }

    void build_wave_candidate(const detail::RawScenario& raw, const CWParams& P) {
        const std::string kind = detail::trim(raw.require("candidate", "kind"));
        double lambda = candidate_lambda(raw);
        if (kind == "particular") {
            candidate_.emplace(cw_particular_soliton(P, lambda));
        } else if (kind == "general") {
            CWGeneralConstants g;
            if (auto v = raw.get("candidate", "a")) g.a = detail::to_double(*v, "[candidate] a");
            if (auto v = raw.get("candidate", "b")) g.b = detail::to_double(*v, "[candidate] b");
            if (auto v = raw.get("candidate", "d1")) g.d1 = detail::to_double_list(*v, "[candidate] d1");
            if (auto v = raw.get("candidate", "d2")) g.d2 = detail::to_double_list(*v, "[candidate] d2");
            g.c = detail::to_matrix(raw, "candidate", "c", P.n());
            candidate_.emplace(cw_general_soliton(P, lambda, std::move(g)));
        } else if (kind == "gradient") {
            double alpha = 0.0, beta = 0.0;
            if (auto v = raw.get("candidate", "alpha")) alpha = detail::to_double(*v, "[candidate] alpha");
            if (auto v = raw.get("candidate", "beta")) beta = detail::to_double(*v, "[candidate] beta");
            candidate_.emplace(cw_gradient_potential(P, alpha, beta, lambda));
        } else if (kind == "custom") {
            build_custom_candidate(raw, lambda, {});
        } else {
            unknown_kind(kind);
        }
    }

    void build_custom(const detail::RawScenario& raw) {
        auto names = detail::split_list(raw.require("metric", "coords"));
        Chart chart(names);
        std::map<std::string, double> params;
        std::vector<std::string> param_names;
        for (const auto& [k, v] : raw.consume_all("params")) {
            params[k] = detail::to_double(v, "[params] " + k);
            param_names.push_back(k);
        }
        const std::size_t d = chart.dimension();
        std::vector<std::vector<Expression>> comp(d, std::vector<Expression>(d, constant(0.0)));
        for (const auto& key : raw.keys_with_prefix("metric", "g.")) {
            std::string rest = key.substr(2);
            std::size_t dot = rest.find('.');
            if (dot == std::string::npos)
                throw ValidationError("metric entry key '" + key + "' must look like g.<i>.<j>");
            std::size_t i = detail::to_count(rest.substr(0, dot), "[metric] " + key);
            std::size_t j = detail::to_count(rest.substr(dot + 1), "[metric] " + key);
            if (i > d || j > d)
                throw ValidationError("metric entry '" + key + "' is outside the " +
                                      std::to_string(d) + "-dimensional chart");
            Expression e = parse(*raw.get("metric", key), chart, param_names);
            comp[i - 1][j - 1] = e;
            comp[j - 1][i - 1] = e;
        }
        metric_.emplace(MetricSpec(chart, comp, params));

        const std::string kind = detail::trim(raw.require("candidate", "kind"));
        if (kind != "custom")
            throw ValidationError("custom metrics accept only custom candidates");
        build_custom_candidate(raw, candidate_lambda(raw), param_names);
    }

    void build_custom_candidate(const detail::RawScenario& raw, double lambda,
                                const std::vector<std::string>& param_names) {
        const Chart& chart = metric_->chart();
        auto h = raw.get("candidate", "h");
        auto xkeys = raw.keys_with_prefix("candidate", "X.");
        if (h && !xkeys.empty())
            throw ValidationError("custom candidate takes either h or X.<coord> keys, not both");
        if (h) {
            candidate_.emplace(SolitonCandidate::gradient(
                ScalarFieldSpec(chart, parse(*h, chart, param_names)), lambda));
            return;
        }
        if (xkeys.empty())
            throw ValidationError("custom candidate needs h = <expr> or X.<coord> = <expr> keys");
        std::vector<Expression> comp(chart.dimension(), constant(0.0));
        for (const auto& key : xkeys) {
            std::string coord = key.substr(2);
            if (!chart.contains(coord))
                throw ValidationError("candidate key '" + key + "' names no chart coordinate");
            comp[*chart.index(coord)] = parse(*raw.get("candidate", key), chart, param_names);
        }
        candidate_.emplace(
            SolitonCandidate::vector(VectorFieldSpec(chart, std::move(comp)), lambda));
    }

    double candidate_lambda(const detail::RawScenario& raw) const {
        if (auto v = raw.get("candidate", "lambda"))
            return detail::to_double(*v, "[candidate] lambda");
        return 0.0;
    }

    [[noreturn]] static void unknown_kind(const std::string& kind) {
        throw ValidationError("unknown candidate kind '" + kind +
                              "' (valid: particular, general, gradient, custom)");
    }

    void build_sampling(const detail::RawScenario& raw) {
        const Chart& chart = metric_->chart();
        box_.assign(chart.dimension(), Interval(-1.0, 1.0));
        for (const auto& key : raw.keys_with_prefix("sampling", "box.")) {
            std::string coord = key.substr(4);
            if (!chart.contains(coord))
                throw ValidationError("sampling key '" + key + "' names no chart coordinate");
            box_[*chart.index(coord)] = detail::to_interval(*raw.get("sampling", key),
                                                            "[sampling] " + key);
        }
        if (auto v = raw.get("sampling", "count")) count_ = detail::to_count(*v, "[sampling] count");
        if (auto v = raw.get("sampling", "seed")) seed_ = detail::to_u64(*v, "[sampling] seed");
    }

    void build_checks(const detail::RawScenario& raw) {
        auto names = detail::split_list(raw.require("checks", "enable"));
        if (names.empty()) throw ValidationError("[checks] enable must list at least one check");
        for (const auto& n : names) {
            if (std::find(known_checks().begin(), known_checks().end(), n) == known_checks().end()) {
                std::string valid;
                for (const auto& k : known_checks()) valid += (valid.empty() ? "" : ", ") + k;
                throw ValidationError("unknown check '" + n + "' (valid: " + valid + ")");
            }
            if (std::find(checks_.begin(), checks_.end(), n) != checks_.end())
                throw ValidationError("check '" + n + "' enabled twice");
            checks_.push_back(n);
        }
        if (auto v = raw.get("checks", "tolerance"))
            set_tolerance(detail::to_double(*v, "[checks] tolerance"));
        else
            tolerance_ = candidate_->has_antiderivative() ? kQuadratureBackedTolerance
                                                          : kDefaultTolerance;
        if (auto v = raw.get("checks", "killing_c"))
            killing_c_ = detail::to_double(*v, "[checks] killing_c");
    }

    void validate() const {
        if ((check_enabled("hamilton") || check_enabled("diagnostics")) &&
            !candidate_->is_gradient())
            throw ValidationError("hamilton and diagnostics checks need a gradient candidate");
        if (check_enabled("diagnostics") && candidate_->lambda() != 0.0)
            throw ValidationError("diagnostics checks the steady gradient structure; lambda must be 0");
        if (check_enabled("weyl") && metric_->dimension() < 3)
            throw ValidationError("weyl check needs dimension >= 3");
        if (egorov_) {
            const Interval& dom = egorov_->u_domain();
            const Interval& bu = box_[0];
            if (!(dom.lo <= bu.lo && bu.hi <= dom.hi))
                throw ValidationError("sampling box for u exceeds the profile's positivity domain");
        }
    }

    std::string name_;
    std::optional<MetricSpec> metric_;
    std::optional<SolitonCandidate> candidate_;
    std::optional<EgorovParams> egorov_;
    std::vector<Interval> box_;
    std::size_t count_ = 100;
    std::uint64_t seed_ = 42;
    double tolerance_ = kDefaultTolerance;
    double killing_c_ = 0.0;
    std::vector<std::string> checks_;
};

inline Scenario load_scenario(const std::string& path) { return Scenario::load(path); }

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace detail {

/// 64-bit linear congruential generator; the sampling stream is fully
/// determined by the seed. Each draw advances the state once and returns
/// the top 53 bits as a double in [0, 1).
struct Lcg {
    std::uint64_t state;
    explicit Lcg(std::uint64_t seed) : state(seed) {}
    double next() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    }
};

} // namespace detail

struct SampleResult {
    std::vector<Point> points;
    std::size_t rejected = 0;
};

/// Draws `count` admissible points from the scenario's box, coordinates in
/// chart order. Inadmissible draws (singular metric, or a plane-wave profile
/// at or below its positivity floor) are discarded and redrawn; the draw
/// budget is 100x count.
inline SampleResult sample_points(const Scenario& s) {
    const MetricSpec& M = s.metric();
    const std::size_t d = M.dimension();
    detail::Lcg rng(s.seed());
    SampleResult out;
    out.points.reserve(s.count());
    const std::size_t max_attempts = 100 * s.count();
    std::size_t attempts = 0;
    Point p(d, 0.0);
    while (out.points.size() < s.count() && attempts < max_attempts) {
        ++attempts;
        for (std::size_t i = 0; i < d; ++i) {
            const Interval& b = s.box()[i];
            p[i] = b.lo + rng.next() * (b.hi - b.lo);
        }
        bool ok = true;
        if (s.egorov_params()) {
            Bindings env;
            env.set("u", p[0]);
            if (!(evaluate(s.egorov_params()->f(), env) > kProfileFloor)) ok = false;
        }
        if (ok) {
            Bindings env = M.bindings_at(p);
            Matrix g(d), inv;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = i; j < d; ++j) g(i, j) = g(j, i) = M.value(i, j, env);
            if (std::abs(invert(g, inv)) <= kMetricDetFloor) ok = false;
        }
        if (ok)
            out.points.push_back(p);
        else
            ++out.rejected;
    }
    if (out.points.size() < s.count())
        throw ValidationError("sampling exhausted: only " + std::to_string(out.points.size()) +
                              " admissible points in " + std::to_string(max_attempts) + " draws");
    return out;
}

// ---------------------------------------------------------------------------
// Check evaluation
// ---------------------------------------------------------------------------

namespace detail {

struct CheckState {
    double max_value = 0.0;                  // max-style checks
    double hmin = 0.0, hmax = 0.0;           // hamilton spread
    bool hamilton_seen = false;
    std::size_t bad_points = 0;              // signature counter
};

inline double check_point_value(const std::string& name, const Scenario& s,
                                const SolitonCandidate& c, const PointFrame& F,
                                CheckState& st) {
    if (name == "residual") return residual(c, F).max_abs();
    if (name == "lambda_consistency") return std::abs(lambda_consistency(c, F));
    if (name == "hamilton") {
        double v = hamilton_value(c.potential(), c.lambda(), F);
        if (!st.hamilton_seen) {
            st.hmin = st.hmax = v;
            st.hamilton_seen = true;
        } else {
            st.hmin = std::min(st.hmin, v);
            st.hmax = std::max(st.hmax, v);
        }
        return 0.0; // aggregated as a spread, not a max
    }
    if (name == "diagnostics") {
        DiagnosticsResult D = gradient_diagnostics(c.potential(), F, 0.0);
        return std::max(std::max(std::abs(D.norm_sq_grad), D.geodesic_defect),
                        std::max(D.recurrence_defect, D.ricci_grad_max));
    }
    if (name == "nilpotency") {
        double sc = 0.0;
        double v = nilpotency_defect(F, &sc);
        return std::max(v, sc);
    }
    if (name == "weyl") {
        double worst = 0.0;
        for (double w : weyl(F)) worst = std::max(worst, std::abs(w));
        return worst;
    }
    if (name == "bianchi") {
        RiemannSymmetryDefects S = riemann_symmetry_defects(F);
        double v = std::max(std::max(S.argument_antisymmetry, S.lowered_antisymmetry),
                            std::max(S.pair_symmetry, S.first_bianchi));
        v = std::max(v, second_bianchi_defect(F));
        return std::max(v, contracted_bianchi_defect(F));
    }
    if (name == "signature") {
        if (negative_eigenvalue_count(F.g) != 1) ++st.bad_points;
        return 0.0; // aggregated as a count
    }
    if (name == "killing_defect") {
        if (c.is_gradient()) {
            Matrix H = hessian(c.potential(), F);
            double worst = 0.0;
            for (std::size_t i = 0; i < F.d; ++i)
                for (std::size_t j = 0; j < F.d; ++j)
                    worst = std::max(worst, std::abs(2.0 * H(i, j) - s.killing_c() * F.g(i, j)));
            return worst;
        }
        return homothety_defect(c.field(), s.killing_c(), F);
    }
    throw ValidationError("unhandled check '" + name + "'");
}

} // namespace detail

/// Evaluates every enabled check at every sampled point and aggregates.
/// Points are processed sequentially in sample order; all aggregates are
/// order-independent reductions, so the report is deterministic.
inline Report run(const Scenario& s) {
    SampleResult sample = sample_points(s);
    const MetricSpec& M = s.metric();
    const SolitonCandidate& c = s.candidate();
    const int order = s.check_enabled("bianchi") ? 3 : 2;

    Report r;
    r.scenario = s.name();
    r.seed = s.seed();
    r.lambda = c.lambda();
    r.classification = to_string(classify(c.lambda()));
    r.points_rejected = sample.rejected;

    std::vector<detail::CheckState> states(s.checks().size());
    for (const Point& p : sample.points) {
        ++r.points_evaluated;
        try {
            PointFrame F = frame_at(M, p, order);
            switch (causal_character_of(F.g, candidate_components(c, F))) {
                case CausalCharacter::Zero: ++r.tally_zero; break;
                case CausalCharacter::Null: ++r.tally_null; break;
                case CausalCharacter::Timelike: ++r.tally_timelike; break;
                case CausalCharacter::Spacelike: ++r.tally_spacelike; break;
            }
            for (std::size_t k = 0; k < s.checks().size(); ++k) {
                double v = detail::check_point_value(s.checks()[k], s, c, F, states[k]);
                states[k].max_value = std::max(states[k].max_value, v);
            }
        } catch (const EvalError&) {
            ++r.evaluation_errors;
        }
    }

    r.overall_pass = r.evaluation_errors == 0;
    for (std::size_t k = 0; k < s.checks().size(); ++k) {
        const std::string& name = s.checks()[k];
        CheckResult cr;
        cr.name = name;
        cr.tolerance = s.tolerance();
        if (name == "hamilton")
            cr.max_residual = states[k].hamilton_seen ? states[k].hmax - states[k].hmin : 0.0;
        else if (name == "signature")
            cr.max_residual = static_cast<double>(states[k].bad_points);
        else
            cr.max_residual = states[k].max_value;
        cr.pass = r.evaluation_errors == 0 && cr.max_residual <= cr.tolerance;
        r.overall_pass = r.overall_pass && cr.pass;
        r.checks.push_back(cr);
    }
    return r;
}

} // namespace ricci
