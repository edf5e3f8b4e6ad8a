#pragma once

// Smooth families of based loops U × [0,1] → S^n.
//
// The domain U is a product of cubes [0,1]^k. A factor of kind "sphere" is a
// cube whose boundary is sent to the constant loop, so it represents S^k; a
// factor of kind "box" is a plain coordinate patch. Rules are written once over
// double or Jet coordinates so the same family gives points and derivatives.

#include <chen/errors.hpp>
#include <chen/jet.hpp>
#include <chen/maps.hpp>
#include <chen/rational.hpp>
#include <chen/sphere.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace chen {

struct DomainFactor {
    std::string kind; ///< "sphere" or "box"
    int dim = 0;
};

class LoopFamily {
public:
    using DoubleRule = std::function<Vec<double>(const Vec<double>&, double)>;
    using JetRule = std::function<Vec<Jet>(const Vec<Jet>&, const Jet&)>;

    LoopFamily() = default;

    template <class Rule>
    LoopFamily(int target, std::vector<DomainFactor> domain, std::vector<double> breakpoints,
               nlohmann::json descriptor, Rule rule)
        : target_(target), domain_(std::move(domain)), breakpoints_(std::move(breakpoints)),
          descriptor_(std::move(descriptor)), rule_d_(rule), rule_j_(rule)
    {
        std::sort(breakpoints_.begin(), breakpoints_.end());
        breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
        std::erase_if(breakpoints_, [](double t) { return t <= 0 || t >= 1; });
        if (dim() > static_cast<int>(kMaxAmbient))
            throw DimensionMismatch("family domain dimension exceeds " + std::to_string(kMaxAmbient));
    }

    int target() const { return target_; }
    const std::vector<DomainFactor>& domain() const { return domain_; }
    int dim() const
    {
        int d = 0;
        for (const auto& f : domain_)
            d += f.dim;
        return d;
    }
    /// Interior times where the slices may fail to be smooth.
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const Rational& coefficient() const { return coefficient_; }
    int orientation() const { return orientation_; }
    const nlohmann::json& descriptor() const { return descriptor_; }

    LoopFamily with_coefficient(const Rational& c) const
    {
        LoopFamily f = *this;
        f.coefficient_ = c;
        return f;
    }
    LoopFamily with_orientation(int sign) const
    {
        LoopFamily f = *this;
        f.orientation_ = sign < 0 ? -orientation_ : orientation_;
        return f;
    }

    Vec<double> at(const Vec<double>& u, double t) const { return rule_d_(u, t); }
    Vec<Jet> at(const Vec<Jet>& u, const Jet& t) const { return rule_j_(u, t); }

    /// Full serialized description: rule descriptor plus coefficient and orientation.
    nlohmann::json to_json() const
    {
        return {{"rule", descriptor_}, {"coefficient", to_string(coefficient_)}, {"orientation", orientation_}};
    }

    /// Piece boundaries 0 = b_0 < … < b_m = 1.
    std::vector<double> pieces() const
    {
        std::vector<double> out{0};
        out.insert(out.end(), breakpoints_.begin(), breakpoints_.end());
        out.push_back(1);
        return out;
    }

private:
    int target_ = 0;
    std::vector<DomainFactor> domain_;
    std::vector<double> breakpoints_;
    nlohmann::json descriptor_;
    Rational coefficient_ = 1;
    int orientation_ = 1;
    DoubleRule rule_d_;
    JetRule rule_j_;
};

namespace detail {

template <class T>
Vec<T> slice(const Vec<T>& u, std::size_t begin, std::size_t count)
{
    Vec<T> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(u[begin + i]);
    return out;
}

inline void require_based(const MapSpec& f)
{
    const auto y = f(north_pole(f.source()));
    if (sphere_distance(y, north_pole(f.target())) > 1e-12)
        throw NotBasedAtX0(f.name() + " does not send the north pole to the north pole");
}

} // namespace detail

/// The sweepout of S^n by loops, parametrized by [0,1]^{n−1} with collapsed
/// boundary. With u_j = tan(π(a_j − ½)) and s = tan(π(t − ½)), the slice at a is
/// the inverse stereographic image (from x₀) of the line s ↦ (u, s): a circle
/// through x₀, a great circle when u = 0. The induced map to S^n has degree 1.
inline LoopFamily sweepout(int n)
{
    if (n < 2)
        throw DimensionMismatch("sweepouts need n >= 2");
    // inverse stereographic projection reverses orientation when n is even
    const double flip = (n % 2 == 0) ? -1.0 : 1.0;
    auto rule = [n, flip](const auto& a, const auto& t) {
        using T = std::decay_t<decltype(t)>;
        const double pi = std::numbers::pi;
        const T phi = pi * (t - 0.5);
        const T c = cos(phi), s = sin(phi);
        const T c2 = c * c;
        Vec<T> u;
        T u2 = 0;
        for (int j = 0; j < n - 1; ++j) {
            T uj = tan(pi * (a[j] - 0.5));
            if (j == 0)
                uj = uj * flip;
            u2 += uj * uj;
            u.push_back(uj);
        }
        // (2u cos²φ, 2 sinφ cosφ, |u|²cos²φ + sin²φ − cos²φ) / (|u|²cos²φ + 1)
        const T den = u2 * c2 + 1;
        Vec<T> p;
        for (int j = 0; j < n - 1; ++j)
            p.push_back(2 * u[j] * c2 / den);
        p.push_back(2 * s * c / den);
        p.push_back((u2 * c2 + s * s - c2) / den);
        return p;
    };
    return LoopFamily(n, {{"sphere", n - 1}}, {}, {{"family", "sweepout"}, {"n", n}}, rule);
}

/// Family over a k-dimensional domain whose every slice is the constant loop.
inline LoopFamily constant_family(int n, int k = 0)
{
    std::vector<DomainFactor> dom;
    if (k > 0)
        dom.push_back({"sphere", k});
    return LoopFamily(n, dom, {}, {{"family", "constant"}, {"n", n}, {"dim", k}}, [n](const auto&, const auto& t) {
        using T = std::decay_t<decltype(t)>;
        Vec<T> p(static_cast<std::size_t>(n) + 1, T(0));
        p.back() = T(1);
        return p;
    });
}

/// x ↦ f ∘ η(x).
inline LoopFamily desuspend(const MapSpec& f, const LoopFamily& eta)
{
    if (eta.target() != f.source())
        throw DimensionMismatch("cannot push a family in S^" + std::to_string(eta.target()) + " through " +
                                f.name() + " from S^" + std::to_string(f.source()));
    detail::require_based(f);
    auto fp = std::make_shared<MapSpec>(f);
    auto ep = std::make_shared<LoopFamily>(eta);
    LoopFamily out(f.target(), eta.domain(), eta.breakpoints(),
                   {{"family", "desuspend"}, {"map", f.descriptor()}, {"of", eta.to_json()}},
                   [fp, ep](const auto& a, const auto& t) { return (*fp)(ep->at(a, t)); });
    return out.with_coefficient(eta.coefficient()).with_orientation(eta.orientation());
}

/// {L}: every slice traversed L times.
inline LoopFamily concat_power(const LoopFamily& F, int L)
{
    if (L < 1)
        throw std::invalid_argument("concatenation power must be at least 1");
    auto fp = std::make_shared<LoopFamily>(F);
    std::vector<double> bp;
    for (int j = 0; j < L; ++j) {
        if (j > 0)
            bp.push_back(static_cast<double>(j) / L);
        for (double b : F.breakpoints())
            bp.push_back((j + b) / L);
    }
    LoopFamily out(F.target(), F.domain(), bp, {{"family", "power"}, {"L", L}, {"of", F.to_json()}},
                   [fp, L](const auto& a, const auto& t) {
                       auto s = t * static_cast<double>(L);
                       s = s - std::floor(value(s));
                       return fp->at(a, s);
                   });
    return out.with_coefficient(F.coefficient()).with_orientation(F.orientation());
}

/// Slices are the F-loop followed by the G-loop; domain U_F × U_G.
inline LoopFamily pontryagin_product(const LoopFamily& F, const LoopFamily& G)
{
    if (F.target() != G.target())
        throw BasepointMismatch("Pontryagin product of families in S^" + std::to_string(F.target()) + " and S^" +
                                std::to_string(G.target()));
    const auto kF = static_cast<std::size_t>(F.dim());
    const auto kG = static_cast<std::size_t>(G.dim());
    auto dom = F.domain();
    dom.insert(dom.end(), G.domain().begin(), G.domain().end());
    std::vector<double> bp{0.5};
    for (double b : F.breakpoints())
        bp.push_back(b / 2);
    for (double b : G.breakpoints())
        bp.push_back(0.5 + b / 2);
    auto fp = std::make_shared<LoopFamily>(F);
    auto gp = std::make_shared<LoopFamily>(G);
    LoopFamily out(F.target(), dom, bp, {{"family", "product"}, {"left", F.to_json()}, {"right", G.to_json()}},
                   [fp, gp, kF, kG](const auto& a, const auto& t) {
                       if (value(t) < 0.5)
                           return fp->at(detail::slice(a, 0, kF), t * 2.0);
                       return gp->at(detail::slice(a, kF, kG), t * 2.0 - 1.0);
                   });
    return out.with_coefficient(F.coefficient() * G.coefficient())
        .with_orientation(F.orientation() * G.orientation());
}

/// Precomposition with the reflection a₁ ↦ 1 − a₁ of the domain.
inline LoopFamily reflect_domain(const LoopFamily& F)
{
    if (F.dim() < 1)
        throw DimensionMismatch("cannot reflect a zero-dimensional domain");
    auto fp = std::make_shared<LoopFamily>(F);
    LoopFamily out(F.target(), F.domain(), F.breakpoints(), {{"family", "reflect"}, {"of", F.to_json()}},
                   [fp](const auto& a, const auto& t) {
                       auto b = a;
                       b[0] = 1.0 - a[0];
                       return fp->at(b, t);
                   });
    return out.with_coefficient(F.coefficient()).with_orientation(F.orientation());
}

/// Family through a loop γ: F(a, t) = normalize(γ(t) + Σ_j (a_j − ½) β_j(t) E_j),
/// where β_j = sin² bump on the j-th of k equal time windows. F(½,…,½; ·) = γ.
inline LoopFamily bump_family(const Loop& gamma, const std::vector<Vec<double>>& directions)
{
    const auto k = directions.size();
    if (k == 0 || k > kMaxAmbient)
        throw DimensionMismatch("bump family needs between 1 and 8 directions");
    for (const auto& e : directions)
        if (e.size() != static_cast<std::size_t>(gamma.n()) + 1)
            throw DimensionMismatch("bump direction has the wrong ambient dimension");
    auto gp = std::make_shared<Loop>(gamma);
    std::vector<double> bp = gamma.breakpoints();
    for (std::size_t j = 1; j < k; ++j)
        bp.push_back(static_cast<double>(j) / k);
    nlohmann::json dirs = nlohmann::json::array();
    for (const auto& e : directions)
        dirs.push_back(std::vector<double>(e.begin(), e.end()));
    return LoopFamily(gamma.n(), {{"box", static_cast<int>(k)}}, bp,
                      {{"family", "bump"}, {"loop", gamma.to_json()}, {"directions", dirs}},
                      [gp, directions, k](const auto& a, const auto& t) {
                          using T = std::decay_t<decltype(t)>;
                          auto p = gp->at(t);
                          const double tv = value(t);
                          for (std::size_t j = 0; j < k; ++j) {
                              const double lo = static_cast<double>(j) / k, hi = static_cast<double>(j + 1) / k;
                              if (tv <= lo || tv >= hi)
                                  continue;
                              const T b = sin(std::numbers::pi * (t - lo) * static_cast<double>(k));
                              const T w = (a[j] - 0.5) * b * b;
                              for (std::size_t i = 0; i < p.size(); ++i)
                                  p[i] += w * directions[j][i];
                          }
                          return normalized(p);
                      });
}

/// Rebuilds a family from its serialized description.
inline LoopFamily family_from_json(const nlohmann::json& j)
{
    const auto& rule = j.at("rule");
    const auto kind = rule.at("family").get<std::string>();
    LoopFamily f;
    if (kind == "sweepout")
        f = sweepout(rule.at("n"));
    else if (kind == "constant")
        f = constant_family(rule.at("n"), rule.value("dim", 0));
    else if (kind == "desuspend")
        f = desuspend(maps::from_json(rule.at("map")), family_from_json(rule.at("of")));
    else if (kind == "power")
        f = concat_power(family_from_json(rule.at("of")), rule.at("L"));
    else if (kind == "product")
        f = pontryagin_product(family_from_json(rule.at("left")), family_from_json(rule.at("right")));
    else if (kind == "reflect")
        f = reflect_domain(family_from_json(rule.at("of")));
    else if (kind == "bump") {
        std::vector<Vec<double>> dirs;
        for (const auto& d : rule.at("directions")) {
            auto v = d.get<std::vector<double>>();
            dirs.emplace_back(v.begin(), v.end());
        }
        f = bump_family(Loop::from_json(rule.at("loop")), dirs);
    } else
        throw ParseError("unknown family '" + kind + "'");
    // rebuild coefficient and orientation on top of the rule's own
    LoopFamily g = f.with_coefficient(parse_rational(j.value("coefficient", std::string("1"))));
    return g.orientation() == j.value("orientation", 1) ? g : g.with_orientation(-1);
}

// ---------------------------------------------------------------------------
// Estimators on a uniform vertex grid of the domain.

/// Times on [0,1]: every piece boundary plus `per_piece` equal subdivisions.
inline std::vector<double> time_samples(const LoopFamily& F, int per_piece)
{
    const auto b = F.pieces();
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
        for (int k = 0; k < per_piece; ++k)
            out.push_back(b[i] + (b[i + 1] - b[i]) * k / per_piece);
    out.push_back(1);
    return out;
}

/// Vertices of the grid with `cells` cells per axis, in lexicographic order.
inline std::vector<Vec<double>> grid_vertices(int dim, int cells)
{
    std::vector<Vec<double>> out{Vec<double>{}};
    for (int axis = 0; axis < dim; ++axis) {
        std::vector<Vec<double>> next;
        for (const auto& v : out)
            for (int i = 0; i <= cells; ++i) {
                auto w = v;
                w.push_back(static_cast<double>(i) / cells);
                next.push_back(w);
            }
        out = std::move(next);
    }
    return out;
}

struct EstimatorOptions {
    int cells = 16;     ///< grid cells per domain axis
    int per_piece = 64; ///< time samples per smooth piece
};

/// Inscribed-polygon length of the slice at u (converges from below).
inline double slice_length(const LoopFamily& F, const Vec<double>& u, const std::vector<double>& times)
{
    double len = 0;
    auto prev = F.at(u, times.front());
    for (std::size_t i = 1; i < times.size(); ++i) {
        auto p = F.at(u, times[i]);
        len += sphere_distance(prev, p);
        prev = std::move(p);
    }
    return len;
}

/// Largest slice length over the grid vertices.
inline double suplength(const LoopFamily& F, const EstimatorOptions& opt = {})
{
    const auto times = time_samples(F, opt.per_piece);
    double best = 0;
    for (const auto& u : grid_vertices(F.dim(), opt.cells))
        best = std::max(best, slice_length(F, u, times));
    return best;
}

/// Σ over grid cells of Π over axes of the largest sup-metric distance between
/// the slices at the two ends of an edge parallel to that axis, times |coefficient|.
/// An upper-bound-flavored estimate of the volume of the image in (ΩS^n, sup metric).
inline double volume_estimate(const LoopFamily& F, const EstimatorOptions& opt = {})
{
    const int k = F.dim();
    const auto times = time_samples(F, opt.per_piece);
    const auto verts = grid_vertices(k, opt.cells);
    const int side = opt.cells + 1;
    // slices sampled at every vertex
    std::vector<std::vector<Vec<double>>> slices;
    slices.reserve(verts.size());
    for (const auto& u : verts) {
        std::vector<Vec<double>> s;
        s.reserve(times.size());
        for (double t : times)
            s.push_back(F.at(u, t));
        slices.push_back(std::move(s));
    }
    auto sup_distance = [&](std::size_t i, std::size_t j) {
        double d = 0;
        for (std::size_t m = 0; m < times.size(); ++m)
            d = std::max(d, sphere_distance(slices[i][m], slices[j][m]));
        return d;
    };
    std::vector<std::size_t> stride(static_cast<std::size_t>(k), 1);
    for (int a = k - 2; a >= 0; --a)
        stride[a] = stride[a + 1] * side;
    // edge lengths along each axis, indexed by the lower vertex
    std::vector<std::vector<double>> edge(static_cast<std::size_t>(k), std::vector<double>(verts.size(), 0));
    for (int a = 0; a < k; ++a)
        for (std::size_t v = 0; v < verts.size(); ++v)
            if ((v / stride[a]) % side + 1 < static_cast<std::size_t>(side))
                edge[a][v] = sup_distance(v, v + stride[a]);
    double total = 0;
    for (std::size_t v = 0; v < verts.size(); ++v) {
        bool lower_corner = true;
        for (int a = 0; a < k; ++a)
            if ((v / stride[a]) % side + 1 >= static_cast<std::size_t>(side))
                lower_corner = false;
        if (!lower_corner)
            continue;
        double cell = 1;
        for (int a = 0; a < k; ++a) {
            // parallel edges of the cell: lower vertex v plus any offset along other axes
            double m = 0;
            for (unsigned corner = 0; corner < (1u << k); ++corner) {
                if (corner & (1u << a))
                    continue;
                std::size_t w = v;
                for (int b = 0; b < k; ++b)
                    if (corner & (1u << b))
                        w += stride[b];
                m = std::max(m, edge[a][w]);
            }
            cell *= m;
        }
        total += cell;
    }
    return total * std::abs(to_double(F.coefficient()));
}

} // namespace chen
