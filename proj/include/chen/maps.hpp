#pragma once

// Catalog of smooth maps between spheres. Every map is written once as a generic
// rule over double or Jet coordinates; all catalog maps fix the north pole.

#include <chen/errors.hpp>
#include <chen/jet.hpp>
#include <chen/sphere.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <numbers>
#include <random>
#include <string>

namespace chen {

class MapSpec {
public:
    using DoubleRule = std::function<Vec<double>(const Vec<double>&)>;
    using JetRule = std::function<Vec<Jet>(const Vec<Jet>&)>;

    MapSpec() = default;

    template <class Rule>
    MapSpec(std::string name, int source, int target, double lipschitz, nlohmann::json descriptor, Rule rule)
        : name_(std::move(name)), source_(source), target_(target), lipschitz_(lipschitz),
          descriptor_(std::move(descriptor)), rule_d_(rule), rule_j_(rule)
    {
    }

    const std::string& name() const { return name_; }
    int source() const { return source_; }
    int target() const { return target_; }
    /// Upper bound on the Lipschitz constant (analytic for the catalog).
    double lipschitz() const { return lipschitz_; }
    const nlohmann::json& descriptor() const { return descriptor_; }

    Vec<double> operator()(const Vec<double>& x) const { return rule_d_(x); }
    Vec<Jet> operator()(const Vec<Jet>& x) const { return rule_j_(x); }

private:
    std::string name_;
    int source_ = 0, target_ = 0;
    double lipschitz_ = 0;
    nlohmann::json descriptor_;
    DoubleRule rule_d_;
    JetRule rule_j_;
};

namespace maps {

inline void require_dimension(int n, int minimum, const std::string& what)
{
    if (n < minimum)
        throw DimensionMismatch(what + " needs sphere dimension at least " + std::to_string(minimum));
}

inline MapSpec identity(int n)
{
    require_dimension(n, 1, "identity");
    return MapSpec("identity", n, n, 1, {{"map", "identity"}, {"n", n}}, [](const auto& x) { return x; });
}

/// Rotation by `angle` in the plane of coordinates i < j; fixes x₀ when j < n.
inline MapSpec rotation(int n, double angle, int i = 0, int j = 1)
{
    require_dimension(n, 1, "rotation");
    if (i < 0 || j <= i || j > n)
        throw DimensionMismatch("rotation plane out of range");
    const double c = std::cos(angle), s = std::sin(angle);
    return MapSpec("rotation", n, n, 1, {{"map", "rotation"}, {"n", n}, {"angle", angle}, {"i", i}, {"j", j}},
                   [=](const auto& x) {
                       auto y = x;
                       y[i] = c * x[i] - s * x[j];
                       y[j] = s * x[i] + c * x[j];
                       return y;
                   });
}

/// x₁ ↦ −x₁, degree −1.
inline MapSpec reflection(int n)
{
    require_dimension(n, 1, "reflection");
    return MapSpec("reflection", n, n, 1, {{"map", "reflection"}, {"n", n}}, [](const auto& x) {
        auto y = x;
        y[0] = -y[0];
        return y;
    });
}

/// Suspension of z ↦ z^k: the angle around the x₀ axis in the (x₁,x₂) plane is
/// multiplied by k. Degree k and Lipschitz constant k.
inline MapSpec suspension_power(int n, int k)
{
    require_dimension(n, 2, "suspension_power");
    if (k < 1)
        throw std::invalid_argument("suspension_power needs k >= 1");
    return MapSpec("suspension_power", n, n, k, {{"map", "suspension_power"}, {"n", n}, {"k", k}},
                   [k](const auto& x) {
                       using T = std::decay_t<decltype(x[0])>;
                       auto y = x;
                       const T r = sqrt(x[0] * x[0] + x[1] * x[1]);
                       if (value(r) == 0) // on the axis through the poles
                           return y;
                       // (x₁ + i x₂)^k / r^{k−1}
                       T re = x[0], im = x[1];
                       for (int m = 1; m < k; ++m) {
                           T nre = re * x[0] - im * x[1];
                           T nim = re * x[1] + im * x[0];
                           re = nre / r;
                           im = nim / r;
                       }
                       y[0] = re;
                       y[1] = im;
                       return y;
                   });
}

/// Conformal dilation y ↦ λy in stereographic coordinates from x₀. Fixes x₀ and
/// the south pole; Lipschitz constant max(λ, 1/λ), attained at the south pole.
inline MapSpec dilation(int n, double lambda)
{
    require_dimension(n, 1, "dilation");
    if (!(lambda > 0))
        throw std::invalid_argument("dilation factor must be positive");
    return MapSpec("dilation", n, n, std::max(lambda, 1 / lambda), {{"map", "dilation"}, {"n", n}, {"lambda", lambda}},
                   [lambda](const auto& x) {
                       using T = std::decay_t<decltype(x[0])>;
                       // y = x'/(1 − x_n), λy, back: (2λy, λ²|y|² − 1)/(λ²|y|² + 1)
                       // multiplied through by (1 − x_n)² and using |x'|² = 1 − x_n²
                       const std::size_t last = x.size() - 1;
                       const T h = 1 - x[last];
                       const T q = 1 + x[last]; // |x'|²/(1 − x_n)
                       const T den = lambda * lambda * q + h;
                       auto y = x;
                       for (std::size_t i = 0; i < last; ++i)
                           y[i] = 2 * lambda * x[i] / den;
                       y[last] = (lambda * lambda * q - h) / den;
                       return y;
                   });
}

/// Hopf map S³ → S² with z₁ = x₃ + i x₄, z₂ = x₁ + i x₂:
/// (2 z₁ z̄₂, |z₁|² − |z₂|²). Sends x₀ to x₀; Lipschitz constant 2.
inline MapSpec hopf()
{
    return MapSpec("hopf", 3, 2, 2, {{"map", "hopf"}}, [](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        const T a = x[2], b = x[3]; // z₁
        const T c = x[0], d = x[1]; // z₂
        Vec<T> y;
        y.push_back(2 * (a * c + b * d));
        y.push_back(2 * (b * c - a * d));
        y.push_back(a * a + b * b - c * c - d * d);
        return y;
    });
}

/// Self-map of S³: (z₁, z₂) ↦ (z₁, z₂^k)/|·| with z₁ = x₃ + i x₄, z₂ = x₁ + i x₂.
/// Degree k; the Lipschitz constant is a sampled estimate.
inline MapSpec join_power(int k)
{
    if (k < 1)
        throw std::invalid_argument("join_power needs k >= 1");
    auto rule = [k](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        T re = x[0], im = x[1];
        for (int m = 1; m < k; ++m) {
            T nre = re * x[0] - im * x[1];
            T nim = re * x[1] + im * x[0];
            re = nre;
            im = nim;
        }
        Vec<T> y{re, im, x[2], x[3]};
        return normalized(y);
    };
    // |z₂|^k shrinks where |z₂| < 1; the stretch is bounded by k.
    return MapSpec("join_power", 3, 3, k, {{"map", "join_power"}, {"k", k}}, rule);
}

inline MapSpec constant(int source, int target)
{
    return MapSpec("constant", source, target, 0, {{"map", "constant"}, {"source", source}, {"target", target}},
                   [target](const auto& x) {
                       using T = std::decay_t<decltype(x[0])>;
                       Vec<T> y(static_cast<std::size_t>(target) + 1, T(0));
                       y.back() = T(1);
                       return y;
                   });
}

/// g ∘ f.
inline MapSpec compose(const MapSpec& g, const MapSpec& f)
{
    if (f.target() != g.source())
        throw DimensionMismatch("cannot compose " + g.name() + " after " + f.name());
    auto gp = std::make_shared<MapSpec>(g);
    auto fp = std::make_shared<MapSpec>(f);
    return MapSpec(g.name() + "∘" + f.name(), f.source(), g.target(), g.lipschitz() * f.lipschitz(),
                   {{"map", "compose"}, {"outer", g.descriptor()}, {"inner", f.descriptor()}},
                   [gp, fp](const auto& x) { return (*gp)((*fp)(x)); });
}

/// Hopf map precomposed with the degree-2 self-map of S³ (Hopf invariant 2).
inline MapSpec hopf_degree2() { return compose(hopf(), join_power(2)); }

/// Rebuilds a catalog map from its descriptor.
inline MapSpec from_json(const nlohmann::json& j)
{
    const std::string kind = j.at("map").get<std::string>();
    if (kind == "identity")
        return identity(j.at("n"));
    if (kind == "rotation")
        return rotation(j.at("n"), j.at("angle"), j.value("i", 0), j.value("j", 1));
    if (kind == "reflection")
        return reflection(j.at("n"));
    if (kind == "suspension_power")
        return suspension_power(j.at("n"), j.at("k"));
    if (kind == "dilation")
        return dilation(j.at("n"), j.at("lambda"));
    if (kind == "hopf")
        return hopf();
    if (kind == "join_power")
        return join_power(j.at("k"));
    if (kind == "constant")
        return constant(j.at("source"), j.at("target"));
    if (kind == "compose")
        return compose(from_json(j.at("outer")), from_json(j.at("inner")));
    throw ParseError("unknown map '" + kind + "'");
}

/// Command-line names: identity, reflection, rotation, hopf, hopf-deg2,
/// constant, suspension-k, dilation-λ.
inline MapSpec by_name(const std::string& name, int n)
{
    if (name == "identity")
        return identity(n);
    if (name == "reflection")
        return reflection(n);
    if (name == "rotation")
        return rotation(n, 0.7);
    if (name == "hopf")
        return hopf();
    if (name == "hopf-deg2")
        return hopf_degree2();
    if (name == "constant")
        return constant(n, n);
    auto suffix = [&](const std::string& prefix) -> std::optional<std::string> {
        if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size())
            return name.substr(prefix.size());
        return std::nullopt;
    };
    try {
        if (auto k = suffix("suspension-"))
            return suspension_power(n, std::stoi(*k));
        if (auto l = suffix("dilation-"))
            return dilation(n, std::stod(*l));
    } catch (const std::logic_error&) {
        throw ParseError("bad parameter in map name '" + name + "'");
    }
    throw ParseError("unknown map '" + name + "'");
}

} // namespace maps

/// Largest stretch |df(v)| over sampled points and unit tangent vectors.
inline double sample_lipschitz(const MapSpec& f, int samples, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const std::size_t dim = static_cast<std::size_t>(f.source()) + 1;
    double best = 0;
    for (int s = 0; s < samples; ++s) {
        Vec<double> x, v;
        for (std::size_t i = 0; i < dim; ++i) {
            x.push_back(gauss(rng));
            v.push_back(gauss(rng));
        }
        x = normalized(x);
        const double c = dot(v, x);
        for (std::size_t i = 0; i < dim; ++i)
            v[i] -= c * x[i];
        v = normalized(v);
        Vec<Jet> xj;
        for (std::size_t i = 0; i < dim; ++i) {
            Jet j(x[i]);
            j.d[0] = v[i];
            xj.push_back(j);
        }
        best = std::max(best, norm(derivative(f(xj), 0)));
    }
    return best;
}

} // namespace chen
