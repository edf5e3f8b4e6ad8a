#pragma once

// Exact linear algebra over Q on sparse row-major matrices.
//
// Elimination is fraction-free: rows are scaled to primitive integer vectors and
// combined as p*row - e*pivot, then divided by their content. Among the rows
// competing for a pivot position the one with the smallest-magnitude entry wins.

#include <chen/errors.hpp>
#include <chen/rational.hpp>

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace chen {

using SparseVector = std::map<std::size_t, Rational>;
using Vector = std::vector<Rational>;

inline SparseVector to_sparse(const Vector& v)
{
    SparseVector out;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0)
            out.emplace(i, v[i]);
    return out;
}

inline Vector to_dense(const SparseVector& v, std::size_t dim)
{
    Vector out(dim, Rational(0));
    for (const auto& [i, c] : v) {
        if (i >= dim)
            throw DimensionMismatch("sparse index out of range");
        out[i] = c;
    }
    return out;
}

class RationalMatrix {
public:
    RationalMatrix() = default;
    RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows) {}

    static RationalMatrix identity(std::size_t n)
    {
        RationalMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m.set(i, i, 1);
        return m;
    }

    /// Matrix whose columns are the given vectors.
    static RationalMatrix from_columns(std::span<const SparseVector> columns, std::size_t rows)
    {
        RationalMatrix m(rows, columns.size());
        for (std::size_t j = 0; j < columns.size(); ++j)
            for (const auto& [i, c] : columns[j])
                m.set(i, j, c);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    void set(std::size_t r, std::size_t c, const Rational& v)
    {
        if (r >= rows_ || c >= cols_)
            throw DimensionMismatch("matrix index out of range");
        if (v == 0)
            data_[r].erase(c);
        else
            data_[r][c] = v;
    }

    Rational get(std::size_t r, std::size_t c) const
    {
        auto it = data_.at(r).find(c);
        return it == data_[r].end() ? Rational(0) : it->second;
    }

    const SparseVector& row(std::size_t r) const { return data_.at(r); }

    std::size_t nonzeros() const
    {
        std::size_t n = 0;
        for (const auto& r : data_)
            n += r.size();
        return n;
    }

    SparseVector apply(const SparseVector& v) const
    {
        SparseVector out;
        for (std::size_t r = 0; r < rows_; ++r) {
            Rational acc = 0;
            for (const auto& [c, x] : data_[r]) {
                auto it = v.find(c);
                if (it != v.end())
                    acc += x * it->second;
            }
            if (acc != 0)
                out.emplace(r, acc);
        }
        return out;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<SparseVector> data_;
};

// ---------------------------------------------------------------------------

namespace detail {

using IntRow = std::vector<std::pair<std::size_t, Integer>>; // sorted by column

inline IntRow primitive_integer_row(const SparseVector& v)
{
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    Integer l = 1;
    for (const auto& [c, q] : v)
        l = boost::multiprecision::lcm(l, denominator(q));
    IntRow row;
    row.reserve(v.size());
    Integer g = 0;
    for (const auto& [c, q] : v) {
        Integer x = numerator(q) * (l / denominator(q));
        g = boost::multiprecision::gcd(g, x);
        row.emplace_back(c, std::move(x));
    }
    if (g > 1)
        for (auto& [c, x] : row)
            x /= g;
    return row;
}

inline void make_primitive(IntRow& row)
{
    Integer g = 0;
    for (const auto& [c, x] : row) {
        g = boost::multiprecision::gcd(g, x);
        if (g == 1)
            return;
    }
    if (g > 1)
        for (auto& [c, x] : row)
            x /= g;
}

/// p*a - e*b, merged by column.
inline IntRow combine(const IntRow& a, const Integer& p, const IntRow& b, const Integer& e)
{
    IntRow out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.emplace_back(a[i].first, p * a[i].second);
            ++i;
        } else if (i == a.size() || b[j].first < a[i].first) {
            out.emplace_back(b[j].first, -e * b[j].second);
            ++j;
        } else {
            Integer x = p * a[i].second - e * b[j].second;
            if (x != 0)
                out.emplace_back(a[i].first, std::move(x));
            ++i;
            ++j;
        }
    }
    make_primitive(out);
    return out;
}

inline const Integer* entry(const IntRow& r, std::size_t col)
{
    auto it = std::lower_bound(r.begin(), r.end(), col,
                               [](const auto& e, std::size_t c) { return e.first < c; });
    return (it != r.end() && it->first == col) ? &it->second : nullptr;
}

} // namespace detail

enum class PivotOrder {
    lowest_first,  ///< pivot = first nonzero column (classic echelon form)
    highest_first, ///< pivot = last nonzero column
};

/// Row echelon form of the span of a list of vectors.
struct Echelon {
    std::vector<SparseVector> rows; ///< independent, integral, primitive
    std::vector<std::size_t> pivots;
    std::size_t rank() const { return pivots.size(); }
};

/// Fraction-free elimination. Returned rows are sorted by pivot in the chosen order
/// and each pivot column is zero in every later row.
inline Echelon echelon(std::span<const SparseVector> vectors, PivotOrder order = PivotOrder::lowest_first)
{
    using detail::IntRow;
    std::vector<IntRow> work;
    work.reserve(vectors.size());
    for (const auto& v : vectors)
        if (!v.empty())
            work.push_back(detail::primitive_integer_row(v));

    const bool high = order == PivotOrder::highest_first;
    auto lead = [&](const IntRow& r) { return high ? r.back().first : r.front().first; };
    auto lead_value = [&](const IntRow& r) -> const Integer& { return high ? r.back().second : r.front().second; };

    Echelon out;
    while (!work.empty()) {
        std::size_t col = lead(work[0]);
        for (const auto& r : work)
            col = high ? std::max(col, lead(r)) : std::min(col, lead(r));
        // pivot: smallest magnitude leading entry, then sparsest, then earliest
        std::size_t best = work.size();
        for (std::size_t i = 0; i < work.size(); ++i) {
            if (lead(work[i]) != col)
                continue;
            if (best == work.size()) {
                best = i;
                continue;
            }
            auto a = abs(lead_value(work[i]));
            auto b = abs(lead_value(work[best]));
            if (a < b || (a == b && work[i].size() < work[best].size()))
                best = i;
        }
        IntRow pivot = std::move(work[best]);
        work.erase(work.begin() + static_cast<std::ptrdiff_t>(best));
        const Integer p = lead_value(pivot);
        std::vector<IntRow> next;
        next.reserve(work.size());
        for (auto& r : work) {
            if (lead(r) == col) {
                Integer e = lead_value(r);
                Integer g = boost::multiprecision::gcd(p, e);
                IntRow c = detail::combine(r, p / g, pivot, e / g);
                if (!c.empty())
                    next.push_back(std::move(c));
            } else {
                next.push_back(std::move(r));
            }
        }
        work = std::move(next);
        if (p < 0)
            for (auto& [c, x] : pivot)
                x = -x;
        SparseVector sv;
        for (auto& [c, x] : pivot)
            sv.emplace(c, Rational(x));
        out.rows.push_back(std::move(sv));
        out.pivots.push_back(col);
    }
    return out;
}

/// Reduced form: pivot entries 1 and every pivot column cleared in all other rows.
inline Echelon reduce(Echelon e)
{
    const std::size_t n = e.rows.size();
    for (std::size_t i = 0; i < n; ++i) {
        Rational p = e.rows[i].at(e.pivots[i]);
        for (auto& [c, x] : e.rows[i])
            x /= p;
    }
    for (std::size_t i = n; i-- > 0;) {
        const auto col = e.pivots[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            auto it = e.rows[j].find(col);
            if (it == e.rows[j].end())
                continue;
            Rational f = it->second;
            for (const auto& [c, x] : e.rows[i]) {
                auto& y = e.rows[j][c];
                y -= f * x;
                if (y == 0)
                    e.rows[j].erase(c);
            }
        }
    }
    return e;
}

inline std::size_t rank_of(std::span<const SparseVector> vectors) { return echelon(vectors).rank(); }

inline std::size_t rank(const RationalMatrix& m)
{
    std::vector<SparseVector> rows;
    rows.reserve(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        rows.push_back(m.row(r));
    return rank_of(rows);
}

/// Basis of {x : Mx = 0}; one vector per free column with a 1 in that column.
inline std::vector<SparseVector> kernel_basis_sparse(const RationalMatrix& m)
{
    std::vector<SparseVector> rows;
    for (std::size_t r = 0; r < m.rows(); ++r)
        rows.push_back(m.row(r));
    Echelon e = reduce(echelon(rows));
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto p : e.pivots)
        is_pivot[p] = true;
    std::vector<SparseVector> basis;
    for (std::size_t f = 0; f < m.cols(); ++f) {
        if (is_pivot[f])
            continue;
        SparseVector v;
        v.emplace(f, Rational(1));
        for (std::size_t i = 0; i < e.rows.size(); ++i) {
            auto it = e.rows[i].find(f);
            if (it != e.rows[i].end())
                v.emplace(e.pivots[i], -it->second);
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

inline std::vector<Vector> kernel_basis(const RationalMatrix& m)
{
    std::vector<Vector> out;
    for (const auto& v : kernel_basis_sparse(m))
        out.push_back(to_dense(v, m.cols()));
    return out;
}

struct SpanMembership {
    bool member = false;
    Vector coefficients; ///< v = sum coefficients[i] * basis[i] when member
};

/// Exact membership test with certificate coefficients.
inline SpanMembership in_span(const Vector& v, std::span<const Vector> basis)
{
    const std::size_t dim = v.size();
    for (const auto& b : basis)
        if (b.size() != dim)
            throw DimensionMismatch("basis vector of dimension " + std::to_string(b.size()) + ", expected " +
                                    std::to_string(dim));
    // rows of the augmented system [b_0 ... b_{k-1} | v]
    const std::size_t k = basis.size();
    std::vector<SparseVector> rows(dim);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < dim; ++i)
            if (basis[j][i] != 0)
                rows[i].emplace(j, basis[j][i]);
    for (std::size_t i = 0; i < dim; ++i)
        if (v[i] != 0)
            rows[i].emplace(k, v[i]);
    Echelon e = reduce(echelon(rows));
    SpanMembership out;
    for (auto p : e.pivots)
        if (p == k)
            return out;
    out.member = true;
    out.coefficients.assign(k, Rational(0));
    for (std::size_t i = 0; i < e.rows.size(); ++i) {
        auto it = e.rows[i].find(k);
        if (it != e.rows[i].end())
            out.coefficients[e.pivots[i]] = it->second;
    }
    return out;
}

/// dim(U ∩ W) = dim U + dim W - dim(U + W).
inline std::size_t intersection_dimension(std::span<const SparseVector> u, std::span<const SparseVector> w)
{
    std::vector<SparseVector> both(u.begin(), u.end());
    both.insert(both.end(), w.begin(), w.end());
    return rank_of(u) + rank_of(w) - rank_of(both);
}

} // namespace chen
