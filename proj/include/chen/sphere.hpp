#pragma once

// Points of the unit sphere S^n ⊂ R^{n+1} and based piecewise-geodesic loops.
// The basepoint x₀ is the north pole, i.e. the last coordinate equals 1.

#include <chen/errors.hpp>
#include <chen/jet.hpp>

#include <boost/container/static_vector.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace chen {

inline constexpr std::size_t kMaxAmbient = 8;
inline constexpr double kSphereTolerance = 1e-12;

template <class T>
using Vec = boost::container::static_vector<T, kMaxAmbient>;

template <class T>
T dot(const Vec<T>& a, const Vec<T>& b)
{
    T s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

template <class T>
T norm(const Vec<T>& a)
{
    return sqrt(dot(a, a));
}

template <class T>
Vec<T> normalized(Vec<T> a)
{
    T r = norm(a);
    for (auto& x : a)
        x /= r;
    return a;
}

inline Vec<double> values(const Vec<Jet>& p)
{
    Vec<double> out;
    for (const auto& x : p)
        out.push_back(x.v);
    return out;
}

/// Derivative of a jet point along one seeded direction.
inline Vec<double> derivative(const Vec<Jet>& p, std::size_t direction)
{
    Vec<double> out;
    for (const auto& x : p)
        out.push_back(x.d[direction]);
    return out;
}

inline Vec<double> north_pole(int n)
{
    if (n < 1 || n >= static_cast<int>(kMaxAmbient))
        throw DimensionMismatch("sphere dimension " + std::to_string(n) + " outside [1, 7]");
    Vec<double> p(static_cast<std::size_t>(n), 0.0);
    p.push_back(1.0);
    return p;
}

/// Great-circle distance between unit vectors, accurate for nearby points.
inline double sphere_distance(const Vec<double>& p, const Vec<double>& q)
{
    double c = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        c += (p[i] - q[i]) * (p[i] - q[i]);
    const double chord = std::sqrt(c);
    return 2 * std::asin(std::min(1.0, chord / 2));
}

class SpherePoint {
public:
    SpherePoint(int n, Vec<double> coords) : n_(n), coords_(std::move(coords))
    {
        if (n < 1 || coords_.size() != static_cast<std::size_t>(n) + 1)
            throw DimensionMismatch("a point of S^" + std::to_string(n) + " needs " + std::to_string(n + 1) +
                                    " coordinates");
        if (std::abs(norm(coords_) - 1) > kSphereTolerance)
            throw NotOnSphere("point has norm " + std::to_string(norm(coords_)));
    }

    static SpherePoint basepoint(int n) { return SpherePoint(n, north_pole(n)); }

    int n() const { return n_; }
    const Vec<double>& coords() const { return coords_; }
    bool is_basepoint() const { return sphere_distance(coords_, north_pole(n_)) <= 1e-12; }

private:
    int n_;
    Vec<double> coords_;
};

/// Based loop made of geodesic arcs, traversed at constant speed on [0,1].
class Loop {
public:
    explicit Loop(std::vector<SpherePoint> points) : points_(std::move(points))
    {
        if (points_.size() < 2)
            throw NotBasedAtX0("a loop needs at least its start and end point");
        n_ = points_.front().n();
        for (const auto& p : points_)
            if (p.n() != n_)
                throw DimensionMismatch("loop points live on spheres of different dimension");
        if (!points_.front().is_basepoint() || !points_.back().is_basepoint())
            throw NotBasedAtX0("loop must start and end at the north pole");
        cumulative_.push_back(0);
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
            const auto& a = points_[i].coords();
            const auto& b = points_[i + 1].coords();
            if (dot(a, b) < -1 + 1e-12)
                throw AntipodalSegment("points " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                       " are antipodal");
            cumulative_.push_back(cumulative_.back() + sphere_distance(a, b));
        }
    }

    int n() const { return n_; }
    const std::vector<SpherePoint>& points() const { return points_; }
    double length() const { return cumulative_.back(); }

    /// Parameter values of the control points.
    std::vector<double> breakpoints() const
    {
        std::vector<double> out;
        if (length() == 0)
            return out;
        for (std::size_t i = 1; i + 1 < cumulative_.size(); ++i)
            out.push_back(cumulative_[i] / length());
        return out;
    }

    template <class T>
    Vec<T> at(const T& t) const
    {
        const double total = length();
        Vec<T> out;
        if (total == 0) {
            for (double x : points_.front().coords())
                out.push_back(T(x));
            return out;
        }
        const double tv = std::clamp(value(t), 0.0, 1.0);
        // last segment whose start is at or before the requested arclength
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end() - 1, tv * total);
        const auto seg = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
        const double theta = cumulative_[seg + 1] - cumulative_[seg];
        const auto& a = points_[seg].coords();
        const auto& b = points_[seg + 1].coords();
        if (theta == 0) {
            for (double x : a)
                out.push_back(T(x));
            return out;
        }
        // unit tangent at a towards b
        Vec<double> w;
        const double c = dot(a, b);
        for (std::size_t i = 0; i < a.size(); ++i)
            w.push_back(b[i] - c * a[i]);
        w = normalized(w);
        const T s = t * total - cumulative_[seg];
        const T cs = cos(s), sn = sin(s);
        for (std::size_t i = 0; i < a.size(); ++i)
            out.push_back(cs * a[i] + sn * w[i]);
        return out;
    }

    nlohmann::json to_json() const
    {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : points_)
            pts.push_back(std::vector<double>(p.coords().begin(), p.coords().end()));
        return {{"n", n_}, {"points", pts}};
    }

    static Loop from_json(const nlohmann::json& j)
    {
        const int n = j.at("n").get<int>();
        std::vector<SpherePoint> pts;
        for (const auto& p : j.at("points")) {
            auto v = p.get<std::vector<double>>();
            pts.emplace_back(n, Vec<double>(v.begin(), v.end()));
        }
        return Loop(std::move(pts));
    }

private:
    int n_ = 0;
    std::vector<SpherePoint> points_;
    std::vector<double> cumulative_;
};

inline Loop geodesic_loop(std::vector<SpherePoint> points) { return Loop(std::move(points)); }

inline Loop constant_loop(int n) { return Loop({SpherePoint::basepoint(n), SpherePoint::basepoint(n)}); }

/// The great circle through x₀ in the plane of the first and last coordinate,
/// through `samples` equispaced control points (x₀ counted once at each end).
inline Loop great_circle_loop(int n, int samples = 4)
{
    std::vector<SpherePoint> pts;
    for (int i = 0; i <= samples; ++i) {
        const double a = 2 * std::numbers::pi * i / samples;
        Vec<double> p(static_cast<std::size_t>(n) + 1, 0.0);
        p.front() = std::sin(a);
        p.back() = std::cos(a);
        if (i == samples)
            p = north_pole(n);
        pts.emplace_back(n, p);
    }
    return Loop(std::move(pts));
}

/// γ traversed L times.
inline Loop concat_power(const Loop& gamma, int L)
{
    if (L < 1)
        throw std::invalid_argument("concatenation power must be at least 1");
    std::vector<SpherePoint> pts{gamma.points().front()};
    for (int k = 0; k < L; ++k)
        pts.insert(pts.end(), gamma.points().begin() + 1, gamma.points().end());
    return Loop(std::move(pts));
}

/// Sup metric sup_t d(γ₁(t), γ₂(t)), maximized over control-point times of both
/// loops refined by `per_segment` samples.
inline double loop_space_distance(const Loop& a, const Loop& b, int per_segment = 16)
{
    if (a.n() != b.n())
        throw DimensionMismatch("loops on spheres of different dimension");
    std::vector<double> times{0, 1};
    for (const auto* l : {&a, &b}) {
        auto bp = l->breakpoints();
        times.insert(times.end(), bp.begin(), bp.end());
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    double best = 0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        for (int k = 0; k <= per_segment; ++k) {
            const double t = times[i] + (times[i + 1] - times[i]) * k / per_segment;
            best = std::max(best, sphere_distance(a.at(t), b.at(t)));
        }
    return best;
}

} // namespace chen
