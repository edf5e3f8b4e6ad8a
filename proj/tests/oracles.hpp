#pragma once

// Independent reference computations. None of these use the bar complex or the
// iterated-integral engine; they only evaluate maps pointwise.

#include <chen/maps.hpp>
#include <chen/sphere.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

using chen::MapSpec;
using chen::Vec;
using V3 = std::array<double, 3>;

// ---------------------------------------------------------------------------
// Poincaré series of rational loop-space cohomology.

/// Coefficients of a power series quotient num/den up to t^max (den[0] = 1).
inline std::vector<long> series_quotient(std::vector<long> num, const std::vector<long>& den, int max)
{
    num.resize(static_cast<std::size_t>(max) + 1, 0);
    std::vector<long> out(static_cast<std::size_t>(max) + 1, 0);
    for (int d = 0; d <= max; ++d) {
        long c = num[static_cast<std::size_t>(d)];
        for (int j = 1; j <= d && j < static_cast<int>(den.size()); ++j)
            c -= den[static_cast<std::size_t>(j)] * out[static_cast<std::size_t>(d - j)];
        out[static_cast<std::size_t>(d)] = c;
    }
    return out;
}

/// ΩS^n ≃_Q K(Q, n−1)-tower with Poincaré series 1/(1 − t^{n−1}).
inline std::vector<long> sphere_loop_betti(int n, int max)
{
    std::vector<long> den(static_cast<std::size_t>(n), 0);
    den[0] = 1;
    den[static_cast<std::size_t>(n - 1)] -= 1;
    return series_quotient({1}, den, max);
}

/// ΩCP^n ≃_Q S¹ × ΩS^{2n+1}: Poincaré series (1 + t)/(1 − t^{2n}).
inline std::vector<long> cpn_loop_betti(int n, int max)
{
    std::vector<long> den(static_cast<std::size_t>(2 * n) + 1, 0);
    den[0] = 1;
    den[static_cast<std::size_t>(2 * n)] = -1;
    return series_quotient({1, 1}, den, max);
}

// ---------------------------------------------------------------------------
// Small vector helpers.

inline V3 sub(const V3& a, const V3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline V3 cross(const V3& a, const V3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double dot3(const V3& a, const V3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double det3(const V3& a, const V3& b, const V3& c) { return dot3(a, cross(b, c)); }
inline V3 unit(V3 a)
{
    const double r = std::sqrt(dot3(a, a));
    return {a[0] / r, a[1] / r, a[2] / r};
}
inline V3 to3(const Vec<double>& v) { return {v[0], v[1], v[2]}; }

// ---------------------------------------------------------------------------
// Degree of f: S² → S² by signed preimage count of a regular value on a
// triangulation of the source (cube-sphere, N×N squares per face).

inline int degree_by_preimages(const MapSpec& f, const V3& y, int N)
{
    const V3 yv = unit(y);
    int count = 0;
    for (int face = 0; face < 6; ++face) {
        const int axis = face / 2;
        const double s = face % 2 ? 1.0 : -1.0;
        auto vertex = [&](int i, int j) {
            const double a = -1 + 2.0 * i / N, b = -1 + 2.0 * j / N;
            V3 p{};
            p[static_cast<std::size_t>(axis)] = s;
            p[static_cast<std::size_t>((axis + 1) % 3)] = a;
            p[static_cast<std::size_t>((axis + 2) % 3)] = b;
            return unit(p);
        };
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                const V3 q[4] = {vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1), vertex(i, j + 1)};
                for (const auto& tri : {std::array<int, 3>{0, 1, 2}, std::array<int, 3>{0, 2, 3}}) {
                    V3 a = q[tri[0]], b = q[tri[1]], c = q[tri[2]];
                    if (det3(a, b, c) < 0)
                        std::swap(b, c); // orient outward
                    auto img = [&](const V3& p) {
                        return to3(f(Vec<double>{p[0], p[1], p[2]}));
                    };
                    const V3 A = img(a), B = img(b), C = img(c);
                    if (dot3(A, yv) <= 0 || dot3(B, yv) <= 0 || dot3(C, yv) <= 0)
                        continue;
                    const double s1 = det3(A, B, yv), s2 = det3(B, C, yv), s3 = det3(C, A, yv);
                    if (s1 > 0 && s2 > 0 && s3 > 0)
                        ++count;
                    else if (s1 < 0 && s2 < 0 && s3 < 0)
                        --count;
                }
            }
    }
    return count;
}

// ---------------------------------------------------------------------------
// Hopf invariant of f: S³ → S² as the linking number of two preimage curves.
// S³ is charted by stereographic projection from x₀ (orientation preserving in
// dimension 3); a box in R³ is cut into tetrahedra, f is linearized on each
// tetrahedron in a gnomonic chart around the regular value, and the preimage
// segments are oriented so that (tangent, pulled-back chart frame) is positive.
// The linking number is the Gauss integral, summed exactly over segment pairs.

struct Segment {
    V3 a, b;
};

inline V3 stereo_inverse_to_s3_point(const V3& y, Vec<double>& out)
{
    const double r2 = dot3(y, y);
    out = Vec<double>{2 * y[0] / (r2 + 1), 2 * y[1] / (r2 + 1), 2 * y[2] / (r2 + 1), (r2 - 1) / (r2 + 1)};
    return y;
}

inline std::vector<Segment> preimage_segments(const MapSpec& f, const V3& p, double box, int N)
{
    const V3 pv = unit(p);
    // chart basis (e1, e2) with det[p, e1, e2] > 0
    V3 helper = std::abs(pv[0]) < 0.9 ? V3{1, 0, 0} : V3{0, 1, 0};
    V3 e1 = unit(cross(helper, pv));
    V3 e2 = cross(pv, e1);
    if (det3(pv, e1, e2) < 0)
        std::swap(e1, e2);

    const int M = N + 1;
    std::vector<V3> pos(static_cast<std::size_t>(M * M * M));
    std::vector<std::array<double, 2>> chart(pos.size());
    std::vector<char> near(pos.size());
    auto id = [&](int i, int j, int k) { return static_cast<std::size_t>((i * M + j) * M + k); };
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            for (int k = 0; k < M; ++k) {
                const V3 y{-box + 2 * box * i / N, -box + 2 * box * j / N, -box + 2 * box * k / N};
                Vec<double> x;
                stereo_inverse_to_s3_point(y, x);
                const V3 z = to3(f(x));
                const auto n = id(i, j, k);
                pos[n] = y;
                const double h = dot3(z, pv);
                near[n] = h > 0.3;
                chart[n] = {dot3(z, e1) / h, dot3(z, e2) / h};
            }

    // Freudenthal split of each cube into 6 tetrahedra along the main diagonal
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    std::vector<Segment> segs;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k)
                for (const auto& perm : perms) {
                    std::array<int, 3> c{i, j, k};
                    std::array<std::size_t, 4> v{};
                    v[0] = id(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; ++s) {
                        ++c[static_cast<std::size_t>(perm[s])];
                        v[static_cast<std::size_t>(s) + 1] = id(c[0], c[1], c[2]);
                    }
                    if (!near[v[0]] || !near[v[1]] || !near[v[2]] || !near[v[3]])
                        continue;
                    // affine map g(x) = g0 + G (x − x0)
                    const V3 d1 = sub(pos[v[1]], pos[v[0]]), d2 = sub(pos[v[2]], pos[v[0]]),
                             d3 = sub(pos[v[3]], pos[v[0]]);
                    const double vol = det3(d1, d2, d3);
                    // rows of G from g(v_m) − g(v_0) = G d_m
                    std::array<V3, 2> G{};
                    for (int comp = 0; comp < 2; ++comp) {
                        const double c1 = chart[v[1]][comp] - chart[v[0]][comp];
                        const double c2 = chart[v[2]][comp] - chart[v[0]][comp];
                        const double c3 = chart[v[3]][comp] - chart[v[0]][comp];
                        // G_row = (c1 (d2×d3) + c2 (d3×d1) + c3 (d1×d2)) / vol
                        const V3 x1 = cross(d2, d3), x2 = cross(d3, d1), x3 = cross(d1, d2);
                        for (int a = 0; a < 3; ++a)
                            G[comp][a] = (c1 * x1[a] + c2 * x2[a] + c3 * x3[a]) / vol;
                    }
                    const V3 tangent = cross(G[0], G[1]);
                    // faces crossed by the zero set
                    std::vector<V3> hits;
                    static const int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
                    for (const auto& fc : faces) {
                        const auto& A = chart[v[fc[0]]];
                        const auto& B = chart[v[fc[1]]];
                        const auto& C = chart[v[fc[2]]];
                        // barycentric coordinates of the origin in triangle ABC
                        const double den = (B[0] - A[0]) * (C[1] - A[1]) - (C[0] - A[0]) * (B[1] - A[1]);
                        if (den == 0)
                            continue;
                        const double l1 = ((0 - A[0]) * (C[1] - A[1]) - (C[0] - A[0]) * (0 - A[1])) / den;
                        const double l2 = ((B[0] - A[0]) * (0 - A[1]) - (0 - A[0]) * (B[1] - A[1])) / den;
                        const double l0 = 1 - l1 - l2;
                        if (l0 < 0 || l1 < 0 || l2 < 0)
                            continue;
                        const V3 &P = pos[v[fc[0]]], &Q = pos[v[fc[1]]], &R = pos[v[fc[2]]];
                        hits.push_back({l0 * P[0] + l1 * Q[0] + l2 * R[0], l0 * P[1] + l1 * Q[1] + l2 * R[1],
                                        l0 * P[2] + l1 * Q[2] + l2 * R[2]});
                    }
                    if (hits.size() != 2)
                        continue;
                    Segment s{hits[0], hits[1]};
                    if (dot3(sub(s.b, s.a), tangent) < 0)
                        std::swap(s.a, s.b);
                    segs.push_back(s);
                }
    return segs;
}

/// Exact Gauss linking contribution of two straight segments (solid angle / 4π).
inline double segment_linking(const Segment& s, const Segment& t)
{
    const V3 r13 = sub(t.a, s.a), r14 = sub(t.b, s.a), r23 = sub(t.a, s.b), r24 = sub(t.b, s.b);
    auto nrm = [](const V3& a, const V3& b) {
        const V3 c = cross(a, b);
        const double l = std::sqrt(dot3(c, c));
        return l > 0 ? V3{c[0] / l, c[1] / l, c[2] / l} : V3{0, 0, 0};
    };
    const V3 n1 = nrm(r13, r14), n2 = nrm(r14, r24), n3 = nrm(r24, r23), n4 = nrm(r23, r13);
    auto as = [](double x) { return std::asin(std::clamp(x, -1.0, 1.0)); };
    const double omega = as(dot3(n1, n2)) + as(dot3(n2, n3)) + as(dot3(n3, n4)) + as(dot3(n4, n1));
    const V3 r34 = sub(t.b, t.a), r12 = sub(s.b, s.a);
    const double sgn = dot3(cross(r34, r12), r13);
    return (sgn > 0 ? omega : (sgn < 0 ? -omega : 0)) / (4 * std::numbers::pi);
}

inline double linking_number(const std::vector<Segment>& A, const std::vector<Segment>& B)
{
    double lk = 0;
    for (const auto& s : A)
        for (const auto& t : B)
            lk += segment_linking(s, t);
    return lk;
}

inline double hopf_by_linking(const MapSpec& f, const V3& p, const V3& q, double box, int N)
{
    return linking_number(preimage_segments(f, p, box, N), preimage_segments(f, q, box, N));
}

// ---------------------------------------------------------------------------
// Central finite-difference differential of a map at x along v.

inline Vec<double> finite_difference(const MapSpec& f, const Vec<double>& x, const Vec<double>& v, double h = 1e-6)
{
    Vec<double> xp, xm;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp.push_back(x[i] + h * v[i]);
        xm.push_back(x[i] - h * v[i]);
    }
    xp = chen::normalized(xp);
    xm = chen::normalized(xm);
    const auto a = f(xp), b = f(xm);
    Vec<double> out;
    for (std::size_t i = 0; i < a.size(); ++i)
        out.push_back((a[i] - b[i]) / (2 * h));
    return out;
}

} // namespace oracle
