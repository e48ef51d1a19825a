#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ricci/chart.hpp"
#include "ricci/expression.hpp"

namespace ricci {

namespace detail {

// Ranks for symmetric multi-indices. Mixed partials commute, so derivative
// caches store only sorted index tuples.
inline std::size_t tri2(std::size_t d, std::size_t k, std::size_t l) {
    if (k > l) std::swap(k, l);
    return k * d - k * (k - 1) / 2 + (l - k);
}

inline std::size_t tri2_size(std::size_t d) { return d * (d + 1) / 2; }

inline std::size_t tri3_size(std::size_t d) { return d * (d + 1) * (d + 2) / 6; }

inline void sort3(std::size_t& k, std::size_t& l, std::size_t& m) {
    if (k > l) std::swap(k, l);
    if (l > m) std::swap(l, m);
    if (k > l) std::swap(k, l);
}

// Lexicographic rank of the sorted triple (k <= l <= m).
inline std::size_t tri3(std::size_t d, std::size_t k, std::size_t l, std::size_t m) {
    sort3(k, l, m);
    // Number of sorted triples that start below k, plus the rank of (l, m)
    // within the (d - k)-sized tail.
    std::size_t skip = tri3_size(d) - tri3_size(d - k);
    return skip + tri2(d - k, l - k, m - k);
}

inline void check_symbols(const Expression& e, const Chart& chart,
                          const std::map<std::string, double>& params, const char* what) {
    for (const auto& s : free_symbols(e)) {
        if (chart.contains(s)) continue;
        if (params.count(s)) continue;
        throw ValidationError(std::string(what) + " references unknown symbol '" + s + "'");
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// MetricSpec
//
// Symmetric matrix of expressions over a chart, plus parameter bindings.
// Partial-derivative trees of every entry are built once here, up to third
// order; geometry evaluates them numerically per point. Instances are
// immutable after construction and safe to share across threads.
// ---------------------------------------------------------------------------

class MetricSpec {
public:
    MetricSpec(Chart chart, const std::vector<std::vector<Expression>>& components,
               std::map<std::string, double> parameters = {})
        : chart_(std::move(chart)), params_(std::move(parameters)) {
        const std::size_t d = chart_.dimension();
        if (components.size() != d)
            throw ValidationError("metric component matrix does not match chart dimension");
        for (const auto& row : components)
            if (row.size() != d)
                throw ValidationError("metric component matrix is not square");
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j)
                if (!equal(components[i][j], components[j][i]))
                    throw ValidationError("metric components are not structurally symmetric");

        entries_.reserve(detail::tri2_size(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) {
                detail::check_symbols(components[i][j], chart_, params_, "metric component");
                entries_.push_back(simplify(components[i][j]));
            }

        build_derivatives();
    }

    const Chart& chart() const { return chart_; }
    std::size_t dimension() const { return chart_.dimension(); }
    const std::map<std::string, double>& parameters() const { return params_; }

    const Expression& component(std::size_t i, std::size_t j) const {
        return entries_[detail::tri2(dimension(), i, j)];
    }

    /// Chart coordinates of `p` plus the stored parameters.
    Bindings bindings_at(const Point& p) const {
        Bindings b = bind_point(chart_, p);
        for (const auto& [k, v] : params_) b.set(k, v);
        return b;
    }

    double value(std::size_t i, std::size_t j, const Bindings& env) const {
        return evaluate(component(i, j), env);
    }

    double d1(std::size_t i, std::size_t j, std::size_t k, const Bindings& env) const {
        const std::size_t d = dimension();
        return evaluate(d1_[detail::tri2(d, i, j) * d + k], env);
    }

    double d2(std::size_t i, std::size_t j, std::size_t k, std::size_t l, const Bindings& env) const {
        const std::size_t d = dimension();
        return evaluate(d2_[detail::tri2(d, i, j) * detail::tri2_size(d) + detail::tri2(d, k, l)], env);
    }

    double d3(std::size_t i, std::size_t j, std::size_t k, std::size_t l, std::size_t m,
              const Bindings& env) const {
        const std::size_t d = dimension();
        return evaluate(d3_[detail::tri2(d, i, j) * detail::tri3_size(d) + detail::tri3(d, k, l, m)], env);
    }

    /// Derivative tree accessors, mostly for cross-checks in tests.
    const Expression& d1_expr(std::size_t i, std::size_t j, std::size_t k) const {
        const std::size_t d = dimension();
        return d1_[detail::tri2(d, i, j) * d + k];
    }

private:
    void build_derivatives() {
        const std::size_t d = chart_.dimension();
        const std::size_t t2 = detail::tri2_size(d), t3 = detail::tri3_size(d);
        d1_.reserve(entries_.size() * d);
        d2_.reserve(entries_.size() * t2);
        d3_.reserve(entries_.size() * t3);
        for (const auto& e : entries_) {
            for (std::size_t k = 0; k < d; ++k) d1_.push_back(differentiate(e, chart_.name(k)));
        }
        for (std::size_t idx = 0; idx < entries_.size(); ++idx) {
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t l = k; l < d; ++l)
                    d2_.push_back(differentiate(d1_[idx * d + k], chart_.name(l)));
        }
        for (std::size_t idx = 0; idx < entries_.size(); ++idx) {
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t l = k; l < d; ++l)
                    for (std::size_t m = l; m < d; ++m)
                        d3_.push_back(differentiate(
                            d2_[idx * t2 + detail::tri2(d, k, l)], chart_.name(m)));
        }
    }

    Chart chart_;
    std::map<std::string, double> params_;
    std::vector<Expression> entries_; // upper triangle, row by row
    std::vector<Expression> d1_, d2_, d3_;
};

// ---------------------------------------------------------------------------
// Vector and scalar fields
// ---------------------------------------------------------------------------

/// Contravariant vector field: one component expression per coordinate.
class VectorFieldSpec {
public:
    VectorFieldSpec(Chart chart, std::vector<Expression> components)
        : chart_(std::move(chart)), comp_(std::move(components)) {
        const std::size_t d = chart_.dimension();
        if (comp_.size() != d)
            throw ValidationError("vector field component count does not match chart dimension");
        d1_.reserve(d * d);
        for (std::size_t i = 0; i < d; ++i) {
            comp_[i] = simplify(comp_[i]);
            for (std::size_t k = 0; k < d; ++k)
                d1_.push_back(differentiate(comp_[i], chart_.name(k)));
        }
    }

    const Chart& chart() const { return chart_; }
    std::size_t dimension() const { return chart_.dimension(); }
    const Expression& component(std::size_t i) const { return comp_[i]; }

    double value(std::size_t i, const Bindings& env) const { return evaluate(comp_[i], env); }

    /// d X^i / d x_k
    double d1(std::size_t i, std::size_t k, const Bindings& env) const {
        return evaluate(d1_[i * dimension() + k], env);
    }

    bool has_antiderivative() const {
        for (const auto& c : comp_)
            if (contains_antiderivative(c)) return true;
        return false;
    }

private:
    Chart chart_;
    std::vector<Expression> comp_;
    std::vector<Expression> d1_;
};

/// Scalar field with first and second partials cached; hessians need both.
class ScalarFieldSpec {
public:
    ScalarFieldSpec(Chart chart, Expression value)
        : chart_(std::move(chart)), value_(simplify(value)) {
        const std::size_t d = chart_.dimension();
        d1_.reserve(d);
        for (std::size_t k = 0; k < d; ++k)
            d1_.push_back(differentiate(value_, chart_.name(k)));
        d2_.reserve(detail::tri2_size(d));
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = k; l < d; ++l)
                d2_.push_back(differentiate(d1_[k], chart_.name(l)));
    }

    const Chart& chart() const { return chart_; }
    std::size_t dimension() const { return chart_.dimension(); }
    const Expression& expression() const { return value_; }

    double value(const Bindings& env) const { return evaluate(value_, env); }
    double d1(std::size_t k, const Bindings& env) const { return evaluate(d1_[k], env); }
    double d2(std::size_t k, std::size_t l, const Bindings& env) const {
        return evaluate(d2_[detail::tri2(dimension(), k, l)], env);
    }

    bool has_antiderivative() const { return contains_antiderivative(value_); }

private:
    Chart chart_;
    Expression value_;
    std::vector<Expression> d1_;
    std::vector<Expression> d2_;
};

// -- field algebra, used when candidates are combined -------------------------

inline VectorFieldSpec add(const VectorFieldSpec& x, const VectorFieldSpec& y) {
    if (!(x.chart() == y.chart()))
        throw ValidationError("vector fields live on different charts");
    std::vector<Expression> comp;
    comp.reserve(x.dimension());
    for (std::size_t i = 0; i < x.dimension(); ++i)
        comp.push_back(x.component(i) + y.component(i));
    return VectorFieldSpec(x.chart(), std::move(comp));
}

inline VectorFieldSpec subtract(const VectorFieldSpec& x, const VectorFieldSpec& y) {
    if (!(x.chart() == y.chart()))
        throw ValidationError("vector fields live on different charts");
    std::vector<Expression> comp;
    comp.reserve(x.dimension());
    for (std::size_t i = 0; i < x.dimension(); ++i)
        comp.push_back(x.component(i) - y.component(i));
    return VectorFieldSpec(x.chart(), std::move(comp));
}

inline VectorFieldSpec zero_vector_field(const Chart& chart) {
    return VectorFieldSpec(chart, std::vector<Expression>(chart.dimension(), constant(0.0)));
}

} // namespace ricci
