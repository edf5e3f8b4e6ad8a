#pragma once

// Numerical iterated integrals ∫ω₁…ω_r on loop families.
//
// For a family F: U × [0,1] → S^n, a point u ∈ U and domain vectors v₁…v_k with
// k = Σ deg ω_i − r, the value is
//
//   ∫_{Δ^r} (ω₁ × … × ω_r)(ṽ₁,…,ṽ_k, ∂t̃₁,…,∂t̃_r) dt₁…dt_r,
//
// where ṽ_j = (∂_{v_j}F(t₁),…,∂_{v_j}F(t_r)) and ∂t̃_i has Ḟ(t_i) in slot i.
// Expanding the product form, block i receives a set S_i of the v's followed by
// ∂t̃_i, with the sign of the permutation that sorts [S₁,T₁,S₂,T₂,…] back into
// [v₁,…,v_k,T₁,…,T_r].

#include <chen/errors.hpp>
#include <chen/family.hpp>
#include <chen/forms.hpp>
#include <chen/jet.hpp>
#include <chen/quadrature.hpp>
#include <chen/sphere.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace chen {

struct QuadratureOptions {
    int cells = 16;          ///< domain cells per axis
    int order = 4;           ///< Gauss order in the domain and in time
    int time_cells = 16;     ///< time cells per smooth piece
    int mc_samples = 20000;  ///< Monte Carlo nodes for r ≥ 4
    unsigned seed = 12345;   ///< Monte Carlo seed
};

inline SimplexRule time_rule(int r, const LoopFamily& F, const QuadratureOptions& opt)
{
    if (r >= 4)
        return monte_carlo_simplex_rule(r, static_cast<std::size_t>(opt.mc_samples), opt.seed);
    return simplex_rule(r, F.pieces(), opt.time_cells, opt.order);
}

/// Number of worker threads: CHEN_THREADS if set, else the hardware concurrency.
inline unsigned worker_threads()
{
    if (const char* env = std::getenv("CHEN_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1)
            return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

inline double factorial(int r)
{
    double f = 1;
    for (int k = 2; k <= r; ++k)
        f *= k;
    return f;
}

/// One way of distributing the k domain vectors over the r forms.
struct Distribution {
    std::vector<std::vector<int>> sets; // S_i, ascending
    std::vector<std::size_t> subset_id; // index of S_i among subsets of its size
    double sign = 1;
};

inline std::vector<std::vector<int>> subsets(int k, int size)
{
    std::vector<std::vector<int>> out;
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
        if (std::popcount(mask) != size)
            continue;
        std::vector<int> s;
        for (int j = 0; j < k; ++j)
            if (mask & (1u << j))
                s.push_back(j);
        out.push_back(std::move(s));
    }
    return out;
}

inline std::vector<Distribution> distributions(int k, const std::vector<int>& sizes)
{
    const int r = static_cast<int>(sizes.size());
    std::vector<Distribution> out;
    std::vector<std::vector<int>> current;
    std::vector<std::size_t> ids;
    std::function<void(int, unsigned)> rec = [&](int i, unsigned used) {
        if (i == r) {
            std::vector<int> seq;
            for (int m = 0; m < r; ++m) {
                seq.insert(seq.end(), current[m].begin(), current[m].end());
                seq.push_back(k + m);
            }
            int inv = 0;
            for (std::size_t a = 0; a < seq.size(); ++a)
                for (std::size_t b = a + 1; b < seq.size(); ++b)
                    inv += seq[a] > seq[b];
            out.push_back({current, ids, inv % 2 ? -1.0 : 1.0});
            return;
        }
        const auto all = subsets(k, sizes[i]);
        for (std::size_t id = 0; id < all.size(); ++id) {
            unsigned mask = 0;
            for (int j : all[id])
                mask |= 1u << j;
            if (mask & used)
                continue;
            current.push_back(all[id]);
            ids.push_back(id);
            rec(i + 1, used | mask);
            current.pop_back();
            ids.pop_back();
        }
    };
    rec(0, 0);
    return out;
}

inline void check_forms(const std::vector<FormSpec>& forms, const LoopFamily& F, std::size_t k)
{
    if (forms.empty())
        throw ArityMismatch("an iterated integral needs at least one form");
    int total = 0;
    for (const auto& w : forms) {
        if (w.n() != F.target())
            throw TargetMismatch("form on S^" + std::to_string(w.n()) + " integrated over loops in S^" +
                                 std::to_string(F.target()));
        if (w.degree() < 1)
            throw ArityMismatch("forms in an iterated integral need degree at least 1");
        total += w.degree();
    }
    if (static_cast<std::size_t>(total - static_cast<int>(forms.size())) != k)
        throw ArityMismatch("forms of total degree " + std::to_string(total) + " and length " +
                            std::to_string(forms.size()) + " need " +
                            std::to_string(total - static_cast<int>(forms.size())) + " vectors, got " +
                            std::to_string(k));
    if (k + 1 > kJetDirections)
        throw ArityMismatch("too many domain vectors");
}

/// Point, directional derivatives and velocity of the slice at u for every time.
struct SliceJets {
    std::vector<Vec<double>> point;
    std::vector<std::vector<Vec<double>>> dv; // [time][j]
    std::vector<Vec<double>> velocity;
};

inline SliceJets slice_jets(const LoopFamily& F, const Vec<double>& u, const std::vector<Vec<double>>& v,
                            const std::vector<double>& times)
{
    const std::size_t k = v.size();
    Vec<Jet> uj;
    for (std::size_t a = 0; a < u.size(); ++a) {
        Jet x(u[a]);
        for (std::size_t j = 0; j < k; ++j)
            x.d[j] = v[j][a];
        uj.push_back(x);
    }
    SliceJets s;
    s.point.reserve(times.size());
    s.dv.reserve(times.size());
    s.velocity.reserve(times.size());
    for (double t : times) {
        const auto y = F.at(uj, Jet::variable(t, k));
        s.point.push_back(values(y));
        std::vector<Vec<double>> d;
        for (std::size_t j = 0; j < k; ++j)
            d.push_back(derivative(y, j));
        s.dv.push_back(std::move(d));
        s.velocity.push_back(derivative(y, k));
    }
    return s;
}

inline double integrate_slice(const std::vector<FormSpec>& forms, const SliceJets& s, std::size_t k,
                              const SimplexRule& rule)
{
    const int r = static_cast<int>(forms.size());
    std::vector<int> sizes;
    for (const auto& w : forms)
        sizes.push_back(w.degree() - 1);
    const auto dist = distributions(static_cast<int>(k), sizes);
    // vals[i][subset][time] = ω_i(F(t))(∂_{S}F(t), Ḟ(t))
    std::vector<std::vector<std::vector<double>>> vals(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        const auto subs = subsets(static_cast<int>(k), sizes[static_cast<std::size_t>(i)]);
        auto& vi = vals[static_cast<std::size_t>(i)];
        vi.assign(subs.size(), std::vector<double>(rule.times.size(), 0.0));
        for (std::size_t id = 0; id < subs.size(); ++id) {
            bool used = false;
            for (const auto& d : dist)
                used = used || d.subset_id[static_cast<std::size_t>(i)] == id;
            if (!used)
                continue;
            std::vector<Vec<double>> args;
            for (std::size_t m = 0; m < rule.times.size(); ++m) {
                args.clear();
                for (int j : subs[id])
                    args.push_back(s.dv[m][static_cast<std::size_t>(j)]);
                args.push_back(s.velocity[m]);
                vi[id][m] = forms[static_cast<std::size_t>(i)].evaluate(s.point[m], args);
            }
        }
    }
    double total = 0;
    for (std::size_t node = 0; node < rule.size(); ++node) {
        const auto* idx = rule.node(node);
        double sum = 0;
        for (const auto& d : dist) {
            double p = d.sign;
            for (int i = 0; i < r; ++i)
                p *= vals[static_cast<std::size_t>(i)][d.subset_id[static_cast<std::size_t>(i)]][idx[i]];
            sum += p;
        }
        total += rule.weights[node] * sum;
    }
    return total;
}

} // namespace detail

/// Value of ∫ω₁…ω_r on the plot F at u against the domain vectors v.
inline double eval_iterated_integral(const std::vector<FormSpec>& forms, const LoopFamily& F, const Vec<double>& u,
                                     const std::vector<Vec<double>>& v, const SimplexRule& rule)
{
    detail::check_forms(forms, F, v.size());
    if (u.size() != static_cast<std::size_t>(F.dim()))
        throw DimensionMismatch("domain point has the wrong dimension");
    for (const auto& x : v)
        if (x.size() != u.size())
            throw DimensionMismatch("domain vector has the wrong dimension");
    if (rule.r != static_cast<int>(forms.size()))
        throw ArityMismatch("quadrature rule dimension differs from the number of forms");
    return detail::integrate_slice(forms, detail::slice_jets(F, u, v, rule.times), v.size(), rule);
}

inline double eval_iterated_integral(const std::vector<FormSpec>& forms, const LoopFamily& F, const Vec<double>& u,
                                     const std::vector<Vec<double>>& v, const QuadratureOptions& opt = {})
{
    return eval_iterated_integral(forms, F, u, v, time_rule(static_cast<int>(forms.size()), F, opt));
}

/// c · ∫ω₁…ω_r
struct PairTerm {
    double coefficient = 1;
    std::vector<FormSpec> forms;
};

struct PairingResult {
    double value = 0;
    double error_estimate = 0;
    int cells = 0;
    int time_cells = 0;
    int order = 0;
};

namespace detail {

inline double pair_once(const std::vector<PairTerm>& terms, const LoopFamily& F, const QuadratureOptions& opt)
{
    const int k = F.dim();
    std::vector<SimplexRule> rules;
    for (const auto& t : terms)
        rules.push_back(time_rule(static_cast<int>(t.forms.size()), F, opt));
    const CubeRule dom = cube_rule(k, opt.cells, opt.order);
    std::vector<Vec<double>> frame;
    for (int a = 0; a < k; ++a) {
        Vec<double> e(static_cast<std::size_t>(k), 0.0);
        e[static_cast<std::size_t>(a)] = 1;
        frame.push_back(e);
    }
    // fixed chunking so the summation order does not depend on the thread count
    constexpr std::size_t chunk = 16;
    const std::size_t n = dom.size();
    const std::size_t chunks = (n + chunk - 1) / chunk;
    std::vector<double> partial(chunks, 0.0);
    auto work = [&](std::size_t c) {
        double s = 0;
        for (std::size_t p = c * chunk; p < std::min(n, (c + 1) * chunk); ++p) {
            Vec<double> u;
            for (int a = 0; a < k; ++a)
                u.push_back(dom.points[p * static_cast<std::size_t>(k) + static_cast<std::size_t>(a)]);
            double v = 0;
            for (std::size_t i = 0; i < terms.size(); ++i) {
                const auto jets = slice_jets(F, u, frame, rules[i].times);
                v += terms[i].coefficient * integrate_slice(terms[i].forms, jets, frame.size(), rules[i]);
            }
            s += dom.weights[p] * v;
        }
        partial[c] = s;
    };
    const unsigned threads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(std::max<std::size_t>(1, chunks)));
    if (threads <= 1) {
        for (std::size_t c = 0; c < chunks; ++c)
            work(c);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t c = w; c < chunks; c += threads)
                    work(c);
            });
        for (auto& t : pool)
            t.join();
    }
    double total = 0;
    for (double p : partial)
        total += p;
    return total * F.orientation() * to_double(F.coefficient());
}

} // namespace detail

/// ⟨Σ c ∫ω…ω, F⟩: integral over the domain cube of the iterated integrals
/// evaluated on the coordinate frame. The error estimate is the change from the
/// same computation at half the domain and time resolution.
inline PairingResult pair(const std::vector<PairTerm>& terms, const LoopFamily& F, const QuadratureOptions& opt = {})
{
    if (terms.empty())
        throw ArityMismatch("nothing to pair");
    for (const auto& t : terms) {
        int total = 0;
        for (const auto& w : t.forms)
            total += w.degree();
        const int k = total - static_cast<int>(t.forms.size());
        if (k != F.dim())
            throw DegreeMismatch("iterated integral of degree " + std::to_string(k) + " paired with a " +
                                 std::to_string(F.dim()) + "-dimensional family");
        detail::check_forms(t.forms, F, static_cast<std::size_t>(k));
    }
    PairingResult res;
    res.cells = opt.cells;
    res.time_cells = opt.time_cells;
    res.order = opt.order;
    res.value = detail::pair_once(terms, F, opt);
    QuadratureOptions coarse = opt;
    coarse.cells = std::max(1, opt.cells / 2);
    coarse.time_cells = std::max(1, opt.time_cells / 2);
    coarse.mc_samples = std::max(1, opt.mc_samples / 2);
    res.error_estimate = std::abs(res.value - detail::pair_once(terms, F, coarse));
    return res;
}

inline std::vector<PairTerm> single_term(std::vector<FormSpec> forms) { return {PairTerm{1.0, std::move(forms)}}; }

/// deg f = ⟨∫ω, f ∘ η⟩ for f: S^n → S^n.
inline PairingResult degree_via_loops(const MapSpec& f, const QuadratureOptions& opt = {})
{
    if (f.source() != f.target())
        throw DimensionMismatch("degree needs a self-map of a sphere");
    if (f.source() < 2)
        throw DimensionMismatch("degree via loops needs n >= 2");
    return pair(single_term({FormSpec::volume(f.target())}), desuspend(f, sweepout(f.source())), opt);
}

/// Hopf(f) = ⟨∫ωω, f ∘ η⟩ for f: S^{2n−1} → S^n, n even.
inline PairingResult hopf_via_loops(const MapSpec& f, const QuadratureOptions& opt = {})
{
    const int n = f.target();
    if (n < 2 || n % 2 != 0)
        throw DimensionMismatch("the Hopf invariant needs an even target dimension");
    if (f.source() != 2 * n - 1)
        throw DimensionMismatch("the Hopf invariant needs a map S^" + std::to_string(2 * n - 1) + " → S^" +
                                std::to_string(n));
    const auto w = FormSpec::volume(n);
    return pair(single_term({w, w}), desuspend(f, sweepout(f.source())), opt);
}

// ---------------------------------------------------------------------------
// Length bound for iterated integrals on a single loop.

struct BoundReport {
    int r = 0;
    int samples = 0;
    double length = 0;
    double max_ratio = 0;
    double max_lhs = 0;
    double rhs_at_max = 0;
    /// 1/r! · Length^r · Π‖ω_i‖ (without the plot dilation factor)
    double length_factor = 0;
};

/// Random orthonormal frame of `count` vectors in R^dim.
inline std::vector<Vec<double>> random_frame(std::mt19937_64& rng, std::size_t dim, std::size_t count)
{
    std::normal_distribution<double> gauss;
    std::vector<Vec<double>> frame;
    while (frame.size() < count) {
        Vec<double> v;
        for (std::size_t i = 0; i < dim; ++i)
            v.push_back(gauss(rng));
        for (const auto& e : frame) {
            const double c = dot(v, e);
            for (std::size_t i = 0; i < dim; ++i)
                v[i] -= c * e[i];
        }
        if (norm(v) > 1e-6)
            frame.push_back(normalized(v));
    }
    return frame;
}

/// Checks |∫ω₁…ω_r(γ)(v)| ≤ (1/r!) Length(γ)^r Π‖ω_i‖ · Dil for random orthonormal
/// frames v at the center u = (½,…,½) of F, whose slice there must be γ.
/// Dil = Π_j √r · max_t |∂_{v_j}F(u,t)| bounds the k-dilation of the r-point
/// evaluation of the plot (Euclidean product metric on (S^n)^r).
inline BoundReport check_length_bound(const std::vector<FormSpec>& forms, const Loop& gamma, const LoopFamily& F,
                                      int samples, unsigned seed, double slack = 1e-9,
                                      const QuadratureOptions& opt = {})
{
    const int r = static_cast<int>(forms.size());
    const auto k = static_cast<std::size_t>(F.dim());
    detail::check_forms(forms, F, k);
    Vec<double> u(k, 0.5);
    for (double t : time_samples(F, 8))
        if (sphere_distance(F.at(u, t), gamma.at(t)) > 1e-9)
            throw std::invalid_argument("the loop is not the center slice of the family");
    const SimplexRule rule = time_rule(r, F, opt);
    double prod_norm = 1;
    for (const auto& w : forms)
        prod_norm *= w.comass();
    BoundReport rep;
    rep.r = r;
    rep.samples = samples;
    rep.length = gamma.length();
    rep.length_factor = std::pow(gamma.length(), r) / detail::factorial(r) * prod_norm;
    std::mt19937_64 rng(seed);
    for (int s = 0; s < samples; ++s) {
        const auto frame = random_frame(rng, k, k);
        const auto jets = detail::slice_jets(F, u, frame, rule.times);
        const double lhs = std::abs(detail::integrate_slice(forms, jets, k, rule));
        double dil = 1;
        for (std::size_t j = 0; j < k; ++j) {
            double m = 0;
            for (const auto& d : jets.dv)
                m = std::max(m, norm(d[j]));
            dil *= std::sqrt(static_cast<double>(r)) * m;
        }
        const double rhs = rep.length_factor * dil;
        const double ratio = rhs > 0 ? lhs / rhs : (lhs > 0 ? INFINITY : 0);
        if (ratio > 1 + slack) {
            std::ostringstream os;
            os << "bound violated: ratio " << ratio << " for frame";
            for (const auto& v : frame) {
                os << " (";
                for (std::size_t i = 0; i < v.size(); ++i)
                    os << (i ? "," : "") << v[i];
                os << ")";
            }
            throw BoundViolated(os.str());
        }
        if (ratio >= rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.rhs_at_max = rhs;
        }
        rep.max_lhs = std::max(rep.max_lhs, lhs);
    }
    return rep;
}

/// Standard bound-check setup: γ = L-fold great circle in S^n, forms r copies of
/// the normalized volume form, and a bump family through γ whose k = r(n−1)
/// directions all point along the normal e₂ of the circle's plane.
inline LoopFamily bound_check_family(const Loop& gamma, int r)
{
    const int n = gamma.n();
    const int k = r * (n - 1);
    Vec<double> e(static_cast<std::size_t>(n) + 1, 0.0);
    e[1] = 1;
    return bump_family(gamma, std::vector<Vec<double>>(static_cast<std::size_t>(k), e));
}

// ---------------------------------------------------------------------------
// Pullback norms: ‖f*α(x)‖ ≤ L^d ‖α(f(x))‖.

struct PullbackReport {
    int samples = 0;
    double max_ratio = 0;
};

/// |f*α(x)(v)| / (L^d ‖α‖) for one point and orthonormal tangent frame.
inline double pullback_ratio(const MapSpec& f, const FormSpec& alpha, const Vec<double>& x,
                             const std::vector<Vec<double>>& frame)
{
    const double lhs = std::abs(FormSpec::pullback(f, alpha).evaluate(x, frame));
    const double rhs = std::pow(f.lipschitz(), alpha.degree()) * alpha.comass();
    return rhs > 0 ? lhs / rhs : (lhs > 0 ? INFINITY : 0);
}

/// Random orthonormal tangent frame of `count` vectors at x ∈ S^n.
inline std::vector<Vec<double>> random_tangent_frame(std::mt19937_64& rng, const Vec<double>& x, std::size_t count)
{
    std::normal_distribution<double> gauss;
    std::vector<Vec<double>> frame;
    while (frame.size() < count) {
        Vec<double> v;
        for (std::size_t i = 0; i < x.size(); ++i)
            v.push_back(gauss(rng));
        const double c = dot(v, x);
        for (std::size_t i = 0; i < x.size(); ++i)
            v[i] -= c * x[i];
        for (const auto& e : frame) {
            const double d = dot(v, e);
            for (std::size_t i = 0; i < x.size(); ++i)
                v[i] -= d * e[i];
        }
        if (norm(v) > 1e-6)
            frame.push_back(normalized(v));
    }
    return frame;
}

inline Vec<double> random_sphere_point(std::mt19937_64& rng, int n)
{
    std::normal_distribution<double> gauss;
    Vec<double> x;
    for (int i = 0; i <= n; ++i)
        x.push_back(gauss(rng));
    return normalized(x);
}

inline PullbackReport lipschitz_pullback_check(const MapSpec& f, const FormSpec& alpha, int samples, unsigned seed,
                                               double slack = 1e-9)
{
    if (alpha.n() != f.target())
        throw TargetMismatch("form does not live on the target of " + f.name());
    if (alpha.degree() > f.source())
        throw DimensionMismatch("form degree exceeds the source dimension");
    std::mt19937_64 rng(seed);
    PullbackReport rep;
    rep.samples = samples;
    for (int s = 0; s < samples; ++s) {
        const auto x = random_sphere_point(rng, f.source());
        const auto frame = random_tangent_frame(rng, x, static_cast<std::size_t>(alpha.degree()));
        const double ratio = pullback_ratio(f, alpha, x, frame);
        if (ratio > 1 + slack)
            throw BoundViolated("pullback bound violated by " + f.name() + ": ratio " + std::to_string(ratio));
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Volume bound |⟨β, F⟩| ≤ Vol(F) · sup over slices ‖β(γ)‖, with the slice norm
// bounded by the length bound Σ |c| (1/r!) Suplength^r Π‖ω_i‖.

struct VolumeBound {
    double pairing = 0;
    double volume = 0;
    double suplength = 0;
    double norm_bound = 0;
    double bound = 0;
    bool holds = false;
};

inline VolumeBound volume_bound(const std::vector<PairTerm>& terms, const LoopFamily& F, double pairing,
                                const EstimatorOptions& est = {})
{
    VolumeBound b;
    b.pairing = pairing;
    b.volume = volume_estimate(F, est);
    b.suplength = suplength(F, est);
    for (const auto& t : terms) {
        double p = std::abs(t.coefficient) / detail::factorial(static_cast<int>(t.forms.size()));
        p *= std::pow(b.suplength, static_cast<double>(t.forms.size()));
        for (const auto& w : t.forms)
            p *= w.comass();
        b.norm_bound += p;
    }
    b.bound = b.volume * b.norm_bound;
    b.holds = std::abs(pairing) <= b.bound;
    return b;
}

// ---------------------------------------------------------------------------
// Sharpness scans.

enum class ScanMode { degree, hopf };

struct ScanRow {
    std::string experiment;
    int L = 0;
    double value = 0;
    double error_estimate = 0;
    double suplength = 0;
    double volume_estimate = 0;
};

/// Degree mode: ⟨∫ω, {L}η⟩ on S². Hopf mode: ⟨∫ωω, {L}η · {L}η⟩ on S².
inline LoopFamily scan_family(ScanMode mode, int L)
{
    const auto xi = concat_power(sweepout(2), L);
    return mode == ScanMode::degree ? xi : pontryagin_product(xi, xi);
}

inline std::vector<PairTerm> scan_terms(ScanMode mode)
{
    const auto w = FormSpec::volume(2);
    return mode == ScanMode::degree ? single_term({w}) : single_term({w, w});
}

inline std::vector<ScanRow> sharpness_scan(const std::vector<int>& Ls, ScanMode mode, const QuadratureOptions& opt = {},
                                           const EstimatorOptions& est = {})
{
    std::vector<ScanRow> rows;
    for (int L : Ls) {
        if (L < 1)
            throw std::invalid_argument("L must be at least 1");
        const auto F = scan_family(mode, L);
        const auto p = pair(scan_terms(mode), F, opt);
        rows.push_back({mode == ScanMode::degree ? "sharpness-degree" : "sharpness-hopf", L, p.value,
                        p.error_estimate, suplength(F, est), volume_estimate(F, est)});
    }
    return rows;
}

} // namespace chen
