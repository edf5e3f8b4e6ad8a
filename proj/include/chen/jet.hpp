#pragma once

// Forward-mode automatic differentiation with a fixed number of directions.
//
// A Jet carries a value and its derivatives along up to kJetDirections seeded
// directions. The numeric code is written once as templates over T = double or
// T = Jet, so the same rule yields points and tangent vectors.

#include <array>
#include <cmath>
#include <cstddef>

namespace chen {

inline constexpr std::size_t kJetDirections = 8;

struct Jet {
    double v = 0;
    std::array<double, kJetDirections> d{};

    Jet() = default;
    Jet(double value) : v(value) {} // NOLINT: implicit lift of constants is intended

    static Jet variable(double value, std::size_t direction)
    {
        Jet j(value);
        j.d[direction] = 1;
        return j;
    }

    Jet& operator+=(const Jet& o)
    {
        v += o.v;
        for (std::size_t i = 0; i < kJetDirections; ++i)
            d[i] += o.d[i];
        return *this;
    }
    Jet& operator-=(const Jet& o)
    {
        v -= o.v;
        for (std::size_t i = 0; i < kJetDirections; ++i)
            d[i] -= o.d[i];
        return *this;
    }
    Jet& operator*=(const Jet& o)
    {
        for (std::size_t i = 0; i < kJetDirections; ++i)
            d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Jet& operator/=(const Jet& o)
    {
        const double inv = 1.0 / o.v;
        const double q = v * inv;
        for (std::size_t i = 0; i < kJetDirections; ++i)
            d[i] = (d[i] - q * o.d[i]) * inv;
        v = q;
        return *this;
    }
};

inline Jet operator-(Jet a)
{
    a.v = -a.v;
    for (auto& x : a.d)
        x = -x;
    return a;
}
inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }
inline Jet operator+(Jet a, double b) { a.v += b; return a; }
inline Jet operator+(double b, Jet a) { a.v += b; return a; }
inline Jet operator-(Jet a, double b) { a.v -= b; return a; }
inline Jet operator-(double b, const Jet& a) { return -a + b; }
inline Jet operator*(Jet a, double b)
{
    a.v *= b;
    for (auto& x : a.d)
        x *= b;
    return a;
}
inline Jet operator*(double b, Jet a) { return a * b; }
inline Jet operator/(Jet a, double b) { return a * (1.0 / b); }

namespace detail {
inline Jet chain(const Jet& a, double fv, double dfv)
{
    Jet r(fv);
    for (std::size_t i = 0; i < kJetDirections; ++i)
        r.d[i] = dfv * a.d[i];
    return r;
}
} // namespace detail

inline Jet sqrt(const Jet& a)
{
    const double s = std::sqrt(a.v);
    return detail::chain(a, s, 0.5 / s);
}
inline Jet sin(const Jet& a) { return detail::chain(a, std::sin(a.v), std::cos(a.v)); }
inline Jet cos(const Jet& a) { return detail::chain(a, std::cos(a.v), -std::sin(a.v)); }
inline Jet tan(const Jet& a)
{
    const double t = std::tan(a.v);
    return detail::chain(a, t, 1 + t * t);
}
inline Jet atan(const Jet& a) { return detail::chain(a, std::atan(a.v), 1 / (1 + a.v * a.v)); }
inline Jet exp(const Jet& a)
{
    const double e = std::exp(a.v);
    return detail::chain(a, e, e);
}

// double overloads so templates can call sin(x) etc. unqualified inside chen
inline double sqrt(double x) { return std::sqrt(x); }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double tan(double x) { return std::tan(x); }
inline double atan(double x) { return std::atan(x); }
inline double exp(double x) { return std::exp(x); }

inline double value(double x) { return x; }
inline double value(const Jet& x) { return x.v; }

} // namespace chen
