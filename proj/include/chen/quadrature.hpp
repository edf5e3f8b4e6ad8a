#pragma once

// Quadrature on the ordered simplex Δ^r = {0 ≤ t₁ ≤ … ≤ t_r ≤ 1} and on the
// domain cube [0,1]^k.
//
// The composite simplex rule splits [0,1] into cells aligned to the family's
// breakpoints. A nondecreasing tuple of cells is either a product of whole
// cells, or contains runs of equal cells; a run of length g is an ordered
// g-simplex inside one cell, handled by the collapsed (Duffy) Gauss rule
// t_g = x_g, t_{m} = t_{m+1} x_m with Jacobian Π x_m^{m−1}. All weights are
// positive and sum to 1/r! exactly (up to rounding).

#include <chen/errors.hpp>

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace chen {

struct Rule1D {
    std::vector<double> nodes; ///< on [0,1]
    std::vector<double> weights;
};

namespace detail {

template <unsigned N>
Rule1D boost_gauss()
{
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < x.size(); ++i) {
        pts.emplace_back(x[i], w[i]);
        if (x[i] != 0)
            pts.emplace_back(-x[i], w[i]);
    }
    std::sort(pts.begin(), pts.end());
    Rule1D r;
    for (const auto& [xi, wi] : pts) {
        r.nodes.push_back((xi + 1) / 2);
        r.weights.push_back(wi / 2);
    }
    return r;
}

template <std::size_t... N>
Rule1D gauss_table(int order, std::index_sequence<N...>)
{
    Rule1D out;
    ((order == static_cast<int>(N) + 2 ? (out = boost_gauss<N + 2>(), true) : false) || ...);
    return out;
}

} // namespace detail

inline constexpr int kMaxGaussOrder = 20;

/// Gauss–Legendre rule on [0,1], orders 1 to kMaxGaussOrder.
inline Rule1D gauss_legendre(int order)
{
    if (order == 1)
        return {{0.5}, {1.0}};
    if (order < 1 || order > kMaxGaussOrder)
        throw std::invalid_argument("unsupported Gauss-Legendre order " + std::to_string(order));
    return detail::gauss_table(order, std::make_index_sequence<kMaxGaussOrder - 1>{});
}

/// Nodes in Δ^r stored as indices into a table of distinct time values, so that
/// the integrand's per-time data is computed once per distinct t.
struct SimplexRule {
    int r = 0;
    int order = 0;
    std::vector<double> times;
    std::vector<std::uint32_t> index; ///< r entries per node
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    const std::uint32_t* node(std::size_t i) const { return index.data() + i * static_cast<std::size_t>(r); }
    double weight_sum() const
    {
        double s = 0;
        for (double w : weights)
            s += w;
        return s;
    }
};

/// Composite rule on Δ^r over the cells obtained by splitting each piece
/// [b_i, b_{i+1}] into `cells_per_piece` equal parts.
inline SimplexRule simplex_rule(int r, const std::vector<double>& pieces, int cells_per_piece, int order)
{
    if (r < 1)
        throw std::invalid_argument("simplex rule needs r >= 1");
    if (pieces.size() < 2 || cells_per_piece < 1)
        throw std::invalid_argument("simplex rule needs at least one cell");
    std::vector<double> lo, width;
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
        for (int k = 0; k < cells_per_piece; ++k) {
            const double a = pieces[i] + (pieces[i + 1] - pieces[i]) * k / cells_per_piece;
            const double b = pieces[i] + (pieces[i + 1] - pieces[i]) * (k + 1) / cells_per_piece;
            lo.push_back(a);
            width.push_back(b - a);
        }
    const auto M = static_cast<int>(lo.size());

    // Collapsed rules on Δ^g for g = 1..r, in unit coordinates: positions
    // (as suffix products) and weights. Axis m carries the Jacobian factor x^m,
    // so it gets ⌈m/2⌉ extra Gauss points to keep the rule's polynomial degree.
    std::vector<Rule1D> axis_rule;
    for (int m = 0; m < r; ++m)
        axis_rule.push_back(gauss_legendre(std::min(order + (m + 1) / 2, kMaxGaussOrder)));
    struct Collapsed {
        std::vector<std::vector<double>> points; // g coordinates each
        std::vector<double> weights;
    };
    std::vector<Collapsed> collapsed(static_cast<std::size_t>(r) + 1);
    for (int g = 1; g <= r; ++g) {
        auto& c = collapsed[static_cast<std::size_t>(g)];
        std::vector<std::size_t> idx(static_cast<std::size_t>(g), 0);
        while (true) {
            std::vector<double> t(static_cast<std::size_t>(g));
            double w = 1, prod = 1;
            for (int m = g - 1; m >= 0; --m) {
                const auto& gl = axis_rule[static_cast<std::size_t>(m)];
                const auto i = idx[static_cast<std::size_t>(m)];
                const double x = gl.nodes[i];
                prod *= x;
                t[static_cast<std::size_t>(m)] = prod;
                w *= gl.weights[i] * std::pow(x, m);
            }
            c.points.push_back(std::move(t));
            c.weights.push_back(w);
            int m = 0;
            while (m < g && ++idx[static_cast<std::size_t>(m)] == axis_rule[static_cast<std::size_t>(m)].nodes.size())
                idx[static_cast<std::size_t>(m++)] = 0;
            if (m == g)
                break;
        }
    }

    SimplexRule rule;
    rule.r = r;
    rule.order = order;
    std::map<double, std::uint32_t> table;
    auto time_index = [&](double t) {
        auto [it, inserted] = table.emplace(t, 0);
        return &it->second;
    };
    // pending node entries reference table slots that are renumbered at the end
    std::vector<std::uint32_t*> slots;

    std::vector<int> cells(static_cast<std::size_t>(r), 0);
    while (true) {
        // runs of equal cells
        std::vector<std::pair<int, int>> runs; // (cell, length)
        for (int m = 0; m < r; ++m) {
            if (!runs.empty() && runs.back().first == cells[static_cast<std::size_t>(m)])
                ++runs.back().second;
            else
                runs.emplace_back(cells[static_cast<std::size_t>(m)], 1);
        }
        // tensor product of the collapsed rules of each run
        std::vector<std::size_t> pick(runs.size(), 0);
        while (true) {
            double w = 1;
            for (std::size_t k = 0; k < runs.size(); ++k) {
                const auto [cell, g] = runs[k];
                const auto& c = collapsed[static_cast<std::size_t>(g)];
                w *= c.weights[pick[k]] * std::pow(width[static_cast<std::size_t>(cell)], g);
                for (int m = 0; m < g; ++m)
                    slots.push_back(time_index(lo[static_cast<std::size_t>(cell)] +
                                               width[static_cast<std::size_t>(cell)] *
                                                   c.points[pick[k]][static_cast<std::size_t>(m)]));
            }
            rule.weights.push_back(w);
            std::size_t k = 0;
            while (k < runs.size() &&
                   ++pick[k] == collapsed[static_cast<std::size_t>(runs[k].second)].weights.size())
                pick[k++] = 0;
            if (k == runs.size())
                break;
        }
        // next nondecreasing tuple
        int m = r - 1;
        while (m >= 0 && cells[static_cast<std::size_t>(m)] == M - 1)
            --m;
        if (m < 0)
            break;
        ++cells[static_cast<std::size_t>(m)];
        for (int j = m + 1; j < r; ++j)
            cells[static_cast<std::size_t>(j)] = cells[static_cast<std::size_t>(m)];
    }
    std::uint32_t next = 0;
    for (auto& [t, i] : table) {
        i = next++;
        rule.times.push_back(t);
    }
    rule.index.reserve(slots.size());
    for (auto* s : slots)
        rule.index.push_back(*s);
    return rule;
}

/// Equal-weight Monte Carlo rule on Δ^r from sorted uniform samples.
inline SimplexRule monte_carlo_simplex_rule(int r, std::size_t samples, unsigned seed)
{
    if (r < 1 || samples == 0)
        throw std::invalid_argument("Monte Carlo rule needs r >= 1 and samples > 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double fact = 1;
    for (int k = 2; k <= r; ++k)
        fact *= k;
    SimplexRule rule;
    rule.r = r;
    for (std::size_t s = 0; s < samples; ++s) {
        std::vector<double> t(static_cast<std::size_t>(r));
        for (auto& x : t)
            x = uni(rng);
        std::sort(t.begin(), t.end());
        for (double x : t) {
            rule.index.push_back(static_cast<std::uint32_t>(rule.times.size()));
            rule.times.push_back(x);
        }
        rule.weights.push_back(1 / (fact * static_cast<double>(samples)));
    }
    return rule;
}

/// Tensor Gauss rule on [0,1]^k with `cells` equal cells per axis.
struct CubeRule {
    int dim = 0;
    std::vector<double> points; ///< dim coordinates per point
    std::vector<double> weights;
    std::size_t size() const { return weights.size(); }
};

inline CubeRule cube_rule(int dim, int cells, int order)
{
    const auto gl = gauss_legendre(order);
    std::vector<double> x1, w1;
    for (int c = 0; c < cells; ++c)
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            x1.push_back((c + gl.nodes[i]) / cells);
            w1.push_back(gl.weights[i] / cells);
        }
    CubeRule rule;
    rule.dim = dim;
    std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
    while (true) {
        double w = 1;
        for (int a = 0; a < dim; ++a) {
            rule.points.push_back(x1[idx[static_cast<std::size_t>(a)]]);
            w *= w1[idx[static_cast<std::size_t>(a)]];
        }
        rule.weights.push_back(w);
        int a = dim - 1;
        while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == x1.size())
            idx[static_cast<std::size_t>(a--)] = 0;
        if (a < 0)
            break;
    }
    return rule;
}

} // namespace chen
