#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ricci {

/// Errors raised while reading expression or scenario text. `position` is a
/// byte offset into the offending input.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t pos)
        : std::runtime_error(what + " (at offset " + std::to_string(pos) + ")"),
          position(pos) {}
    std::size_t position;
};

/// Errors raised during numeric evaluation: domain violations, division by
/// zero, quadrature that fails to converge, singular metrics.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Errors raised when a constructor or loader receives inconsistent data.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

} // namespace detail

/// An ordered list of coordinate names. Dimension is fixed at construction
/// and is at least 2; names are unique, nonempty identifiers.
class Chart {
public:
    explicit Chart(std::vector<std::string> names) : names_(std::move(names)) {
        if (names_.size() < 2)
            throw ValidationError("chart needs at least 2 coordinates");
        for (const auto& n : names_) {
            if (!detail::is_identifier(n))
                throw ValidationError("coordinate name '" + n + "' is not a valid identifier");
        }
        for (std::size_t i = 0; i < names_.size(); ++i)
            for (std::size_t j = i + 1; j < names_.size(); ++j)
                if (names_[i] == names_[j])
                    throw ValidationError("duplicate coordinate name '" + names_[i] + "'");
    }

    std::size_t dimension() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(std::size_t i) const { return names_.at(i); }

    std::optional<std::size_t> index(std::string_view name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return i;
        return std::nullopt;
    }

    bool contains(std::string_view name) const { return index(name).has_value(); }

    bool operator==(const Chart& o) const { return names_ == o.names_; }

private:
    std::vector<std::string> names_;
};

/// A point is a coordinate tuple in chart order.
using Point = std::vector<double>;

/// Name -> value map used during evaluation. Kept as a flat vector: the sets
/// involved are tiny (coordinates plus a few parameters) and lookups sit in
/// inner loops, so linear scan beats a tree or hash here.
class Bindings {
public:
    Bindings() = default;

    void set(std::string_view name, double value) {
        for (auto& kv : entries_)
            if (kv.first == name) {
                kv.second = value;
                return;
            }
        entries_.emplace_back(std::string(name), value);
    }

    std::optional<double> find(std::string_view name) const {
        for (const auto& kv : entries_)
            if (kv.first == name) return kv.second;
        return std::nullopt;
    }

    double at(std::string_view name) const {
        auto v = find(name);
        if (!v) throw EvalError("unbound symbol '" + std::string(name) + "'");
        return *v;
    }

private:
    std::vector<std::pair<std::string, double>> entries_;
};

/// Binds each chart coordinate to the matching entry of `p`.
inline Bindings bind_point(const Chart& chart, const Point& p) {
    if (p.size() != chart.dimension())
        throw ValidationError("point dimension does not match chart");
    Bindings b;
    for (std::size_t i = 0; i < p.size(); ++i) b.set(chart.name(i), p[i]);
    return b;
}

} // namespace ricci
