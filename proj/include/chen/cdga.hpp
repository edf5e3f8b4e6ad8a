#pragma once

// Finite graded-commutative differential algebras over Q, presented by a
// basis (with an implicit unit in degree 0), a table of structure constants
// and a differential matrix.

#include <chen/errors.hpp>
#include <chen/rational.hpp>

#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace chen {

/// Linear combination of basis elements, keyed by basis index. Never stores zeros.
using Combination = std::map<std::size_t, Rational>;

inline void accumulate(Combination& into, std::size_t index, const Rational& c)
{
    if (c == 0)
        return;
    auto [it, inserted] = into.try_emplace(index, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0)
            into.erase(it);
    }
}

struct BasisElement {
    std::string label;
    int degree = 0;
};

/// Parsed form of an algebra file, before any validation.
struct AlgebraSpec {
    int degree_cap = 0;
    std::vector<BasisElement> generators;
    struct Product {
        std::string lhs, rhs;
        std::map<std::string, Rational> value;
    };
    std::vector<Product> products;
    std::vector<std::pair<std::string, std::map<std::string, Rational>>> differentials;
};

class FiniteCdga;

namespace detail {
inline FiniteCdga build_algebra_impl(const AlgebraSpec& spec);
}

/// Immutable after construction; index 0 is always the unit "1".
class FiniteCdga {
public:
    static constexpr std::size_t unit_index = 0;

    int degree_cap() const { return degree_cap_; }

    /// Number of basis elements including the unit.
    std::size_t size() const { return basis_.size(); }

    const BasisElement& basis(std::size_t i) const { return basis_.at(i); }
    int degree(std::size_t i) const { return basis_.at(i).degree; }
    const std::string& label(std::size_t i) const { return basis_.at(i).label; }

    std::optional<std::size_t> index_of(std::string_view label) const
    {
        for (std::size_t i = 0; i < basis_.size(); ++i)
            if (basis_[i].label == label)
                return i;
        return std::nullopt;
    }

    std::size_t require_index(std::string_view label) const
    {
        auto i = index_of(label);
        if (!i)
            throw std::out_of_range("no basis element labelled '" + std::string(label) + "'");
        return *i;
    }

    const Combination& product(std::size_t i, std::size_t j) const { return table_.at(i * size() + j); }
    const Combination& differential(std::size_t i) const { return diff_.at(i); }

    /// Labels of the basis in degree d; degree 0 yields the unit.
    std::vector<std::string> basis_of_degree(int d) const
    {
        if (d < 0 || d > degree_cap_)
            throw DegreeOutOfRange("degree " + std::to_string(d) + " outside [0, " +
                                   std::to_string(degree_cap_) + "]");
        std::vector<std::string> out;
        for (const auto& b : basis_)
            if (b.degree == d)
                out.push_back(b.label);
        return out;
    }

    /// Smallest positive degree occurring in the basis (0 if there is none).
    int min_positive_degree() const
    {
        int m = 0;
        for (std::size_t i = 1; i < size(); ++i)
            if (m == 0 || degree(i) < m)
                m = degree(i);
        return m;
    }

    bool operator==(const FiniteCdga& other) const
    {
        if (degree_cap_ != other.degree_cap_ || basis_.size() != other.basis_.size())
            return false;
        for (std::size_t i = 0; i < basis_.size(); ++i)
            if (basis_[i].label != other.basis_[i].label || basis_[i].degree != other.basis_[i].degree)
                return false;
        return table_ == other.table_ && diff_ == other.diff_;
    }

private:
    friend FiniteCdga detail::build_algebra_impl(const AlgebraSpec&);
    FiniteCdga() = default;

    int degree_cap_ = 0;
    std::vector<BasisElement> basis_;
    std::vector<Combination> table_; // row-major size() x size()
    std::vector<Combination> diff_;
};

// ---------------------------------------------------------------------------
// Elements

/// Homogeneous or mixed element of a FiniteCdga. Holds a non-owning pointer.
class Element {
public:
    static constexpr int mixed = -1;

    Element(const FiniteCdga& algebra, Combination coefficients, int degree)
        : algebra_(&algebra), coeffs_(std::move(coefficients)), degree_(degree)
    {
    }

    static Element basis(const FiniteCdga& algebra, std::string_view label)
    {
        auto i = algebra.require_index(label);
        return Element(algebra, Combination{{i, Rational(1)}}, algebra.degree(i));
    }

    static Element unit(const FiniteCdga& algebra) { return basis(algebra, "1"); }

    const FiniteCdga& algebra() const { return *algebra_; }
    const Combination& coefficients() const { return coeffs_; }
    int degree() const { return degree_; }
    bool is_zero() const { return coeffs_.empty(); }

    Rational coefficient(std::string_view label) const
    {
        auto i = algebra_->index_of(label);
        if (!i)
            return 0;
        auto it = coeffs_.find(*i);
        return it == coeffs_.end() ? Rational(0) : it->second;
    }

    Element operator+(const Element& other) const
    {
        check_same(other);
        Combination out = coeffs_;
        for (const auto& [i, c] : other.coeffs_)
            accumulate(out, i, c);
        return Element(*algebra_, std::move(out), degree_ == other.degree_ ? degree_ : mixed);
    }

    Element operator*(const Rational& s) const
    {
        Combination out;
        for (const auto& [i, c] : coeffs_)
            accumulate(out, i, c * s);
        return Element(*algebra_, std::move(out), degree_);
    }

    bool operator==(const Element& other) const
    {
        return algebra_ == other.algebra_ && coeffs_ == other.coeffs_;
    }

    void check_same(const Element& other) const
    {
        if (algebra_ != other.algebra_ && !(*algebra_ == *other.algebra_))
            throw MixedAlgebras("elements belong to different algebras");
    }

    std::string str() const
    {
        if (coeffs_.empty())
            return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [i, c] : coeffs_) {
            if (!first)
                os << " + ";
            first = false;
            if (c != 1)
                os << to_string(c) << "*";
            os << algebra_->label(i);
        }
        return os.str();
    }

private:
    const FiniteCdga* algebra_;
    Combination coeffs_;
    int degree_;
};

/// Bilinear extension of the structure-constant table.
inline Element multiply(const Element& a, const Element& b)
{
    a.check_same(b);
    const auto& A = a.algebra();
    Combination out;
    for (const auto& [i, ci] : a.coefficients())
        for (const auto& [j, cj] : b.coefficients())
            for (const auto& [k, ck] : A.product(i, j))
                accumulate(out, k, ci * cj * ck);
    int deg = (a.degree() == Element::mixed || b.degree() == Element::mixed) ? Element::mixed
                                                                              : a.degree() + b.degree();
    return Element(A, std::move(out), deg);
}

inline Element differential(const Element& a)
{
    const auto& A = a.algebra();
    Combination out;
    for (const auto& [i, ci] : a.coefficients())
        for (const auto& [k, ck] : A.differential(i))
            accumulate(out, k, ci * ck);
    return Element(A, std::move(out), a.degree() == Element::mixed ? Element::mixed : a.degree() + 1);
}

// ---------------------------------------------------------------------------
// Validation and construction

namespace detail {

inline int koszul_sign(int p, int q) { return (p % 2 != 0 && q % 2 != 0) ? -1 : 1; }

inline Combination scaled(const Combination& c, const Rational& s)
{
    Combination out;
    for (const auto& [i, v] : c)
        accumulate(out, i, v * s);
    return out;
}

inline Combination mult_comb(const FiniteCdga& A, const Combination& x, const Combination& y)
{
    Combination out;
    for (const auto& [i, ci] : x)
        for (const auto& [j, cj] : y)
            for (const auto& [k, ck] : A.product(i, j))
                accumulate(out, k, ci * cj * ck);
    return out;
}

inline Combination diff_comb(const FiniteCdga& A, const Combination& x)
{
    Combination out;
    for (const auto& [i, ci] : x)
        for (const auto& [k, ck] : A.differential(i))
            accumulate(out, k, ci * ck);
    return out;
}

inline Combination add(Combination a, const Combination& b)
{
    for (const auto& [i, c] : b)
        accumulate(a, i, c);
    return a;
}

inline FiniteCdga build_algebra_impl(const AlgebraSpec& spec)
{
    if (spec.degree_cap < 1)
        throw AlgebraInvalid("degree_cap must be at least 1");

    FiniteCdga A;
    A.degree_cap_ = spec.degree_cap;
    A.basis_.push_back({"1", 0});
    for (const auto& g : spec.generators) {
        if (g.label.empty() || g.label == "1")
            throw AlgebraInvalid("invalid label '" + g.label + "'");
        for (const auto& b : A.basis_)
            if (b.label == g.label)
                throw AlgebraInvalid("duplicate label " + g.label);
        if (g.degree < 1 || g.degree > spec.degree_cap)
            throw AlgebraInvalid("degree of " + g.label + " outside [1, degree_cap]");
        A.basis_.push_back(g);
    }
    const std::size_t n = A.basis_.size();
    A.table_.assign(n * n, Combination{});
    A.diff_.assign(n, Combination{});

    auto lookup = [&](const std::string& label, const std::string& context) {
        auto i = A.index_of(label);
        if (!i)
            throw AlgebraInvalid(context + " references " + label + ", which is not in the basis");
        return *i;
    };
    auto to_comb = [&](const std::map<std::string, Rational>& value, int expected_degree,
                       const std::string& context) {
        Combination c;
        for (const auto& [label, coeff] : value) {
            auto k = lookup(label, context);
            if (coeff == 0)
                continue;
            if (A.degree(k) != expected_degree)
                throw AlgebraInvalid(context + " has term " + label + " of degree " +
                                     std::to_string(A.degree(k)) + ", expected " +
                                     std::to_string(expected_degree));
            accumulate(c, k, coeff);
        }
        return c;
    };

    for (std::size_t j = 0; j < n; ++j) {
        A.table_[0 * n + j] = Combination{{j, Rational(1)}};
        A.table_[j * n + 0] = Combination{{j, Rational(1)}};
    }

    std::vector<bool> set(n * n, false);
    for (const auto& p : spec.products) {
        std::string context = "product " + p.lhs + "*" + p.rhs;
        auto i = lookup(p.lhs, context);
        auto j = lookup(p.rhs, context);
        if (i == 0 || j == 0)
            throw AlgebraInvalid(context + " involves the unit, which is implicit");
        int deg = A.degree(i) + A.degree(j);
        Combination c;
        if (deg > spec.degree_cap) {
            for (const auto& [label, coeff] : p.value)
                if (coeff != 0)
                    throw AlgebraInvalid(context + " exceeds degree cap but is nonzero");
        } else {
            c = to_comb(p.value, deg, context);
        }
        Combination mirror = scaled(c, Rational(koszul_sign(A.degree(i), A.degree(j))));
        if ((set[i * n + j] && A.table_[i * n + j] != c) || (set[j * n + i] && A.table_[j * n + i] != mirror))
            throw AlgebraInvalid("graded commutativity fails on " + p.lhs + "*" + p.rhs);
        if (i == j && c != mirror)
            throw AlgebraInvalid("graded commutativity fails on " + p.lhs + "*" + p.rhs);
        A.table_[i * n + j] = c;
        A.table_[j * n + i] = mirror;
        set[i * n + j] = set[j * n + i] = true;
    }

    std::vector<bool> dset(n, false);
    for (const auto& [label, value] : spec.differentials) {
        std::string context = "d(" + label + ")";
        auto i = lookup(label, context);
        if (i == 0)
            throw AlgebraInvalid("the unit has zero differential");
        if (dset[i])
            throw AlgebraInvalid("differential of " + label + " given twice");
        dset[i] = true;
        if (A.degree(i) + 1 > spec.degree_cap) {
            for (const auto& [l, coeff] : value)
                if (coeff != 0)
                    throw AlgebraInvalid(context + " exceeds degree cap but is nonzero");
            continue;
        }
        A.diff_[i] = to_comb(value, A.degree(i) + 1, context);
    }

    // axioms, checked eagerly in a fixed order
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 1; j < n; ++j)
            for (std::size_t k = 1; k < n; ++k) {
                auto left = mult_comb(A, A.table_[i * n + j], Combination{{k, Rational(1)}});
                auto right = mult_comb(A, Combination{{i, Rational(1)}}, A.table_[j * n + k]);
                if (left != right)
                    throw AlgebraInvalid("associativity fails on (" + A.label(i) + "," + A.label(j) + "," +
                                         A.label(k) + ")");
            }
    for (std::size_t i = 1; i < n; ++i)
        if (!diff_comb(A, A.diff_[i]).empty())
            throw AlgebraInvalid("d²≠0 on " + A.label(i));
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 1; j < n; ++j) {
            Combination ei{{i, Rational(1)}}, ej{{j, Rational(1)}};
            auto lhs = diff_comb(A, A.table_[i * n + j]);
            auto rhs = add(mult_comb(A, A.diff_[i], ej),
                           scaled(mult_comb(A, ei, A.diff_[j]), Rational(A.degree(i) % 2 ? -1 : 1)));
            if (lhs != rhs)
                throw AlgebraInvalid("Leibniz fails on (" + A.label(i) + "," + A.label(j) + ")");
        }
    return A;
}

inline Rational json_rational(const nlohmann::json& v)
{
    if (v.is_string())
        return parse_rational(v.get<std::string>());
    if (v.is_number_integer())
        return Rational(v.get<long long>());
    throw ParseError("coefficient must be an integer or a \"p/q\" string");
}

inline std::map<std::string, Rational> json_combination(const nlohmann::json& v)
{
    if (!v.is_object())
        throw ParseError("combination must be an object label -> coefficient");
    std::map<std::string, Rational> out;
    for (auto it = v.begin(); it != v.end(); ++it)
        out[it.key()] = json_rational(it.value());
    return out;
}

inline nlohmann::json combination_json(const FiniteCdga& A, const Combination& c)
{
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, coeff] : c)
        out[A.label(k)] = to_string(coeff);
    return out;
}

} // namespace detail

/// Validates every axiom eagerly; throws AlgebraInvalid naming the first violation.
inline FiniteCdga build_algebra(const AlgebraSpec& spec) { return detail::build_algebra_impl(spec); }

/// Parses the JSON algebra format documented in docs/algebra-format.md.
inline AlgebraSpec parse_algebra_spec(std::string_view text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed algebra file: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError("algebra file must be a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (it.key() != "degree_cap" && it.key() != "generators" && it.key() != "products" &&
            it.key() != "differentials" && it.key() != "name")
            throw ParseError("unknown section '" + it.key() + "'");
    AlgebraSpec spec;
    try {
        if (!doc.contains("degree_cap") || !doc["degree_cap"].is_number_integer())
            throw ParseError("missing integer degree_cap");
        spec.degree_cap = doc["degree_cap"].get<int>();
        if (!doc.contains("generators") || !doc["generators"].is_array())
            throw ParseError("missing generators array");
        for (const auto& g : doc["generators"]) {
            if (!g.is_object() || !g.contains("label") || !g.contains("degree"))
                throw ParseError("generator entries need label and degree");
            spec.generators.push_back({g.at("label").get<std::string>(), g.at("degree").get<int>()});
        }
        if (doc.contains("products")) {
            for (const auto& p : doc["products"]) {
                if (!p.contains("lhs") || !p["lhs"].is_array() || p["lhs"].size() != 2 || !p.contains("value"))
                    throw ParseError("product entries need lhs [x, y] and value");
                spec.products.push_back({p["lhs"][0].get<std::string>(), p["lhs"][1].get<std::string>(),
                                         detail::json_combination(p["value"])});
            }
        }
        if (doc.contains("differentials")) {
            for (const auto& d : doc["differentials"]) {
                if (!d.contains("of") || !d.contains("value"))
                    throw ParseError("differential entries need of and value");
                spec.differentials.emplace_back(d["of"].get<std::string>(), detail::json_combination(d["value"]));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed algebra file: ") + e.what());
    }
    return spec;
}

inline FiniteCdga build_algebra(std::string_view text) { return build_algebra(parse_algebra_spec(text)); }

/// Canonical serialization: products listed once per unordered pair (basis order),
/// only nonzero entries. parse + build + serialize is the identity on canonical text.
inline std::string serialize_algebra(const FiniteCdga& A)
{
    nlohmann::ordered_json doc;
    doc["degree_cap"] = A.degree_cap();
    auto gens = nlohmann::ordered_json::array();
    for (std::size_t i = 1; i < A.size(); ++i)
        gens.push_back(nlohmann::ordered_json{{"label", A.label(i)}, {"degree", A.degree(i)}});
    doc["generators"] = gens;
    auto prods = nlohmann::ordered_json::array();
    for (std::size_t i = 1; i < A.size(); ++i)
        for (std::size_t j = i; j < A.size(); ++j)
            if (!A.product(i, j).empty())
                prods.push_back(nlohmann::ordered_json{{"lhs", {A.label(i), A.label(j)}},
                                                       {"value", detail::combination_json(A, A.product(i, j))}});
    doc["products"] = prods;
    auto diffs = nlohmann::ordered_json::array();
    for (std::size_t i = 1; i < A.size(); ++i)
        if (!A.differential(i).empty())
            diffs.push_back(nlohmann::ordered_json{{"of", A.label(i)},
                                                   {"value", detail::combination_json(A, A.differential(i))}});
    doc["differentials"] = diffs;
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Catalog models

/// Cohomology of S^n: one class w in degree n with w^2 = 0.
inline FiniteCdga sphere_model(int n)
{
    AlgebraSpec s;
    s.degree_cap = n;
    s.generators = {{"w", n}};
    return build_algebra(s);
}

/// Truncated polynomial algebra Q[w]/(w^{n+1}), |w| = 2, basis w, w2, ..., wn.
inline FiniteCdga cpn_model(int n)
{
    AlgebraSpec s;
    s.degree_cap = 2 * n;
    auto label = [](int k) { return k == 1 ? std::string("w") : "w" + std::to_string(k); };
    for (int k = 1; k <= n; ++k)
        s.generators.push_back({label(k), 2 * k});
    for (int i = 1; i <= n; ++i)
        for (int j = i; i + j <= n; ++j)
            s.products.push_back({label(i), label(j), {{label(i + j), Rational(1)}}});
    return build_algebra(s);
}

/// Image of the minimal model of (S^3_a v S^3_b) with two 8-cells attached along
/// [a,[a,b]] and [b,[a,b]]: a, b (3), y (5) with dy = ab, ab (6), w = ay, z = by (8).
inline FiniteCdga two_cell_nonformal_model()
{
    AlgebraSpec s;
    s.degree_cap = 8;
    s.generators = {{"a", 3}, {"b", 3}, {"y", 5}, {"ab", 6}, {"w", 8}, {"z", 8}};
    s.products = {{"a", "b", {{"ab", Rational(1)}}},
                  {"a", "y", {{"w", Rational(1)}}},
                  {"b", "y", {{"z", Rational(1)}}}};
    s.differentials = {{"y", {{"ab", Rational(1)}}}};
    return build_algebra(s);
}

} // namespace chen
