#pragma once

// Reduced bar construction B(A) of a finite CDGA: words |a1|...|ar| of positive
// degree letters, bar degree sum(deg ai) - r, with differential
//
//   d|a1|...|ar| = - sum_i (-1)^{n_i} |a1|...|d ai|...|ar|
//                  + sum_{i>=2} (-1)^{n_i} |a1|...|a_{i-1} a_i|...|ar|,
//   n_i = sum_{j<i} (deg aj - 1).
//
// A word of length r is the symbol of the iterated integral of r forms.

#include <chen/cdga.hpp>
#include <chen/errors.hpp>
#include <chen/linalg.hpp>
#include <chen/rational.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace chen {

struct BarWord {
    std::vector<std::size_t> letters; ///< basis indices, all of positive degree

    std::size_t length() const { return letters.size(); }

    int bar_degree(const FiniteCdga& A) const
    {
        int d = 0;
        for (auto l : letters)
            d += A.degree(l) - 1;
        return d;
    }

    /// Order by length, then lexicographically by basis index.
    bool operator<(const BarWord& o) const
    {
        if (letters.size() != o.letters.size())
            return letters.size() < o.letters.size();
        return letters < o.letters;
    }
    bool operator==(const BarWord& o) const = default;
};

inline std::string render_word(const FiniteCdga& A, const BarWord& w)
{
    std::string s = "|";
    for (auto l : w.letters)
        s += A.label(l) + "|";
    return s;
}

/// Iterated-integral notation, e.g. "∫ω_a ω_z"; the empty word renders as "1".
inline std::string render_integral(const FiniteCdga& A, const BarWord& w)
{
    if (w.letters.empty())
        return "1";
    std::string s = "∫";
    for (std::size_t i = 0; i < w.letters.size(); ++i)
        s += (i ? " ω_" : "ω_") + A.label(w.letters[i]);
    return s;
}

/// Parses "|a|z|", "a|z" or "" (empty word).
inline BarWord parse_word(const FiniteCdga& A, std::string_view text)
{
    BarWord w;
    std::string token;
    auto flush = [&] {
        if (token.empty())
            return;
        auto i = A.index_of(token);
        if (!i || *i == FiniteCdga::unit_index)
            throw ParseError("unknown letter '" + token + "' in bar word");
        w.letters.push_back(*i);
        token.clear();
    };
    for (char c : text) {
        if (c == '|')
            flush();
        else if (c != ' ')
            token.push_back(c);
    }
    flush();
    return w;
}

struct BarElement {
    int degree = 0;
    std::map<BarWord, Rational> terms;

    void add(const BarWord& w, const Rational& c)
    {
        if (c == 0)
            return;
        auto [it, inserted] = terms.try_emplace(w, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0)
                terms.erase(it);
        }
    }

    bool is_zero() const { return terms.empty(); }

    std::size_t max_length() const
    {
        std::size_t m = 0;
        for (const auto& [w, c] : terms)
            m = std::max(m, w.length());
        return m;
    }

    std::string str(const FiniteCdga& A) const
    {
        if (terms.empty())
            return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [w, c] : terms) {
            if (!first)
                os << (c < 0 ? " - " : " + ");
            else if (c < 0)
                os << "-";
            first = false;
            Rational a = c < 0 ? Rational(-c) : c;
            if (a != 1)
                os << to_string(a) << " ";
            os << render_integral(A, w);
        }
        return os.str();
    }
};

// ---------------------------------------------------------------------------

/// All words of the given bar degree with length <= max_length, sorted by
/// (length, letters). Without a cap the length is bounded by degree/(m-1), m the
/// smallest letter degree, which requires m >= 2.
inline std::vector<BarWord> bar_basis(const FiniteCdga& A, int degree, std::optional<int> max_length)
{
    if (degree < 0)
        return {};
    const int m = A.min_positive_degree();
    int cap;
    if (max_length) {
        cap = *max_length;
    } else {
        if (m == 1)
            throw CapTooSmall("algebra has degree-1 letters; a max_length is required");
        cap = m == 0 ? 0 : degree / (m - 1);
    }
    std::vector<BarWord> out;
    BarWord current;
    auto recurse = [&](auto&& self, int remaining) -> void {
        if (remaining == 0)
            out.push_back(current);
        if (static_cast<int>(current.length()) >= cap)
            return;
        for (std::size_t i = 1; i < A.size(); ++i) {
            int c = A.degree(i) - 1;
            if (c > remaining)
                continue;
            current.letters.push_back(i);
            self(self, remaining - c);
            current.letters.pop_back();
        }
    };
    recurse(recurse, degree);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline BarElement bar_differential(const FiniteCdga& A, const BarWord& w)
{
    BarElement out;
    out.degree = w.bar_degree(A) + 1;
    const std::size_t r = w.length();
    int n_i = 0;
    for (std::size_t i = 0; i < r; ++i) {
        const int sign = (n_i % 2 == 0) ? 1 : -1;
        // internal differential term, overall sign -(-1)^{n_i}
        for (const auto& [k, c] : A.differential(w.letters[i])) {
            BarWord t = w;
            t.letters[i] = k;
            out.add(t, Rational(-sign) * c);
        }
        // merging a_{i-1} a_i, sign (-1)^{n_i}
        if (i >= 1) {
            for (const auto& [k, c] : A.product(w.letters[i - 1], w.letters[i])) {
                BarWord t;
                t.letters.reserve(r - 1);
                t.letters.insert(t.letters.end(), w.letters.begin(), w.letters.begin() + static_cast<long>(i - 1));
                t.letters.push_back(k);
                t.letters.insert(t.letters.end(), w.letters.begin() + static_cast<long>(i + 1), w.letters.end());
                out.add(t, Rational(sign) * c);
            }
        }
        n_i += A.degree(w.letters[i]) - 1;
    }
    return out;
}

inline BarElement bar_differential(const FiniteCdga& A, const BarElement& x)
{
    BarElement out;
    out.degree = x.degree + 1;
    for (const auto& [w, c] : x.terms)
        for (const auto& [t, e] : bar_differential(A, w).terms)
            out.add(t, c * e);
    return out;
}

// ---------------------------------------------------------------------------

/// Indexed basis of one degree of the capped bar complex.
struct BarChains {
    int degree = 0;
    std::vector<BarWord> words;
    std::map<BarWord, std::size_t> index;

    BarChains() = default;
    BarChains(const FiniteCdga& A, int d, int cap) : degree(d), words(bar_basis(A, d, cap))
    {
        for (std::size_t i = 0; i < words.size(); ++i)
            index.emplace(words[i], i);
    }

    std::size_t size() const { return words.size(); }

    SparseVector coordinates(const BarElement& x) const
    {
        SparseVector v;
        for (const auto& [w, c] : x.terms) {
            auto it = index.find(w);
            if (it == index.end())
                throw DimensionMismatch("word outside the capped chain basis");
            v.emplace(it->second, c);
        }
        return v;
    }

    BarElement element(const SparseVector& v) const
    {
        BarElement x;
        x.degree = degree;
        for (const auto& [i, c] : v)
            x.add(words.at(i), c);
        return x;
    }
};

/// Images d(w) of every word of `source`, in the coordinates of `target`.
inline std::vector<SparseVector> differential_images(const FiniteCdga& A, const BarChains& source,
                                                     const BarChains& target)
{
    std::vector<SparseVector> out;
    out.reserve(source.size());
    for (const auto& w : source.words)
        out.push_back(target.coordinates(bar_differential(A, w)));
    return out;
}

struct RestrictedCounts {
    std::size_t chains = 0, cocycles = 0, coboundaries = 0;
};

struct CohomologyReport {
    int degree = 0;
    int max_length = 0;
    std::size_t dim_chains = 0, dim_cocycles = 0, dim_coboundaries = 0, rank = 0;
    std::vector<BarElement> representatives; ///< minimal length, then lexicographic
    std::vector<std::size_t> filtration_ranks; ///< [r] = rank of classes with a representative of length <= r
    bool stabilized = true;
    std::optional<RestrictedCounts> restricted;
};

namespace detail {

struct CohomologyData {
    BarChains below, here, above;
    std::vector<SparseVector> coboundaries; ///< images of `below`, spanning B
    std::vector<SparseVector> cocycles;     ///< kernel basis
    std::vector<SparseVector> images;       ///< images of `here`
};

inline CohomologyData cohomology_data(const FiniteCdga& A, int degree, int cap)
{
    CohomologyData D;
    D.below = BarChains(A, degree - 1, cap);
    D.here = BarChains(A, degree, cap);
    D.above = BarChains(A, degree + 1, cap);
    D.coboundaries = differential_images(A, D.below, D.here);
    D.images = differential_images(A, D.here, D.above);
    auto M = RationalMatrix::from_columns(D.images, D.above.size());
    D.cocycles = kernel_basis_sparse(M);
    return D;
}

/// Canonical class representatives: pivots (highest word index) of the cocycle
/// space that are not pivots of the coboundary space, fully reduced against both.
inline std::vector<SparseVector> class_representatives(const CohomologyData& D)
{
    Echelon zb = echelon(D.cocycles, PivotOrder::highest_first);
    Echelon bb = echelon(D.coboundaries, PivotOrder::highest_first);
    std::vector<bool> b_pivot(D.here.size(), false);
    for (auto p : bb.pivots)
        b_pivot[p] = true;
    Echelon combined = bb;
    std::vector<std::size_t> rep_pivots;
    for (std::size_t i = 0; i < zb.rows.size(); ++i)
        if (!b_pivot[zb.pivots[i]]) {
            combined.rows.push_back(zb.rows[i]);
            combined.pivots.push_back(zb.pivots[i]);
            rep_pivots.push_back(zb.pivots[i]);
        }
    // pivots of `combined` are distinct and each row's pivot is its highest entry,
    // so `reduce` clears every pivot column elsewhere without raising any row's pivot
    Echelon reduced = reduce(combined);
    std::vector<std::pair<std::size_t, SparseVector>> reps;
    for (std::size_t i = bb.rows.size(); i < reduced.rows.size(); ++i)
        reps.emplace_back(reduced.pivots[i], reduced.rows[i]);
    std::sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<SparseVector> out;
    for (auto& [p, v] : reps)
        out.push_back(std::move(v));
    return out;
}

inline std::size_t max_length_index(const BarChains& C, const SparseVector& v)
{
    return v.empty() ? 0 : C.words.at(v.rbegin()->first).length();
}

} // namespace detail

/// Exact cohomology of the bar complex capped at max_length in one degree.
/// `restrict_to` optionally lists words of this degree whose span is analysed separately.
inline CohomologyReport cohomology(const FiniteCdga& A, int degree, int max_length,
                                   const std::vector<BarWord>* restrict_to = nullptr)
{
    if (degree < 0 || max_length < 0)
        throw std::invalid_argument("degree and max_length must be nonnegative");
    auto D = detail::cohomology_data(A, degree, max_length);
    CohomologyReport R;
    R.degree = degree;
    R.max_length = max_length;
    R.dim_chains = D.here.size();
    R.dim_cocycles = D.cocycles.size();
    R.dim_coboundaries = rank_of(D.coboundaries);
    R.rank = R.dim_cocycles - R.dim_coboundaries;

    auto reps = detail::class_representatives(D);
    R.filtration_ranks.assign(static_cast<std::size_t>(max_length) + 1, 0);
    for (const auto& v : reps) {
        auto len = detail::max_length_index(D.here, v);
        for (std::size_t r = len; r < R.filtration_ranks.size(); ++r)
            ++R.filtration_ranks[r];
        R.representatives.push_back(D.here.element(v));
    }

    const int m = A.min_positive_degree();
    if (m >= 2) {
        R.stabilized = max_length >= (degree + 1) / (m - 1);
    } else if (m == 1) {
        R.stabilized = max_length >= 1 && cohomology(A, degree, max_length - 1).rank == R.rank;
    }

    if (restrict_to) {
        RestrictedCounts rc;
        std::vector<SparseVector> span, images;
        for (const auto& w : *restrict_to) {
            if (w.bar_degree(A) != degree)
                throw DimensionMismatch("restricted word " + render_word(A, w) + " has the wrong degree");
            BarElement x;
            x.add(w, 1);
            span.push_back(D.here.coordinates(x));
            images.push_back(D.above.coordinates(bar_differential(A, w)));
        }
        rc.chains = rank_of(span);
        rc.cocycles = kernel_basis_sparse(RationalMatrix::from_columns(images, D.above.size())).size();
        rc.coboundaries = intersection_dimension(D.coboundaries, span);
        R.restricted = rc;
    }
    return R;
}

/// Linear functional on bar chains of one degree, given by its values on words.
using BarFunctional = std::map<BarWord, Rational>;

inline Rational evaluate(const BarFunctional& phi, const BarElement& x)
{
    Rational s = 0;
    for (const auto& [w, c] : x.terms) {
        auto it = phi.find(w);
        if (it != phi.end())
            s += c * it->second;
    }
    return s;
}

struct Detection {
    int length = 0;
    BarElement representative;
};

/// Smallest r such that a cocycle built from words of length <= r is not a
/// coboundary (and pairs nontrivially with `functional` when one is given).
inline Detection min_length_detector(const FiniteCdga& A, int degree, int max_length,
                                     const BarFunctional* functional = nullptr)
{
    auto D = detail::cohomology_data(A, degree, max_length);
    if (functional) {
        for (const auto& b : D.coboundaries)
            if (evaluate(*functional, D.here.element(b)) != 0)
                throw FunctionalNotClosed("functional does not vanish on coboundaries");
    }
    for (const auto& v : detail::class_representatives(D)) {
        BarElement rep = D.here.element(v);
        if (functional && evaluate(*functional, rep) == 0)
            continue;
        return {static_cast<int>(detail::max_length_index(D.here, v)), rep};
    }
    if (functional)
        throw NoClassFound("no class in degree " + std::to_string(degree) + " pairs with the functional");
    throw NoClassFound("bar cohomology vanishes in degree " + std::to_string(degree));
}

/// Exponent of the distortion bound O(L^{n-1+r}) for a class of pi_n detected at length r.
inline int distortion_exponent(int n, int r)
{
    if (n < 2 || r < 1)
        throw std::invalid_argument("distortion_exponent needs n >= 2 and r >= 1");
    return n - 1 + r;
}

/// True iff x is cohomologous to a nonzero multiple of y in the capped complex.
inline bool cohomologous_up_to_scalar(const FiniteCdga& A, int degree, int max_length, const BarElement& x,
                                      const BarElement& y)
{
    auto D = detail::cohomology_data(A, degree, max_length);
    auto vx = D.here.coordinates(x), vy = D.here.coordinates(y);
    const auto b = rank_of(D.coboundaries);
    auto with = [&](std::initializer_list<const SparseVector*> extra) {
        std::vector<SparseVector> rows = D.coboundaries;
        for (auto e : extra)
            rows.push_back(*e);
        return rank_of(rows);
    };
    return with({&vx}) == b + 1 && with({&vy}) == b + 1 && with({&vx, &vy}) == b + 1;
}

/// Exact check of d∘d = 0 on one word.
inline bool d_squared_vanishes(const FiniteCdga& A, const BarWord& w)
{
    return bar_differential(A, bar_differential(A, w)).is_zero();
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json element_json(const FiniteCdga& A, const BarElement& x)
{
    auto terms = nlohmann::ordered_json::array();
    for (const auto& [w, c] : x.terms)
        terms.push_back(nlohmann::ordered_json{{"word", render_word(A, w)}, {"coefficient", to_string(c)}});
    return terms;
}

inline nlohmann::ordered_json report_json(const FiniteCdga& A, const CohomologyReport& R)
{
    nlohmann::ordered_json j;
    j["degree"] = R.degree;
    j["max_length"] = R.max_length;
    j["dim_chains"] = R.dim_chains;
    j["dim_cocycles"] = R.dim_cocycles;
    j["dim_coboundaries"] = R.dim_coboundaries;
    j["rank"] = R.rank;
    j["stabilized"] = R.stabilized;
    j["filtration_ranks"] = R.filtration_ranks;
    auto reps = nlohmann::ordered_json::array();
    for (const auto& r : R.representatives)
        reps.push_back(element_json(A, r));
    j["representatives"] = reps;
    if (R.restricted)
        j["restricted"] = {{"chains", R.restricted->chains},
                           {"cocycles", R.restricted->cocycles},
                           {"coboundaries", R.restricted->coboundaries}};
    return j;
}

inline std::string report_text(const FiniteCdga& A, const CohomologyReport& R)
{
    std::ostringstream os;
    os << "degree " << R.degree << " (max length " << R.max_length << ")\n";
    os << "  chains " << R.dim_chains << ", cocycles " << R.dim_cocycles << ", coboundaries "
       << R.dim_coboundaries << "\n";
    os << "  rank " << R.rank << (R.stabilized ? "" : "  [NotStabilized: raise --max-length]") << "\n";
    os << "  filtration ranks";
    for (auto r : R.filtration_ranks)
        os << " " << r;
    os << "\n";
    for (const auto& rep : R.representatives)
        os << "  representative " << rep.str(A) << "\n";
    if (R.restricted) {
        const auto& rc = *R.restricted;
        os << "  restricted basis: chains " << rc.chains << ", cocycles " << rc.cocycles << ", coboundaries "
           << rc.coboundaries;
        if (rc.chains != R.dim_chains || rc.cocycles != R.dim_cocycles || rc.coboundaries != R.dim_coboundaries)
            os << "  [differs from full enumeration]";
        os << "\n";
    }
    return os.str();
}

} // namespace chen
