#include <chen/quadrature.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace chen;

namespace {

double factorial(int r) { return std::tgamma(r + 1.0); }

/// Σ w f(t) over a simplex rule.
template <class F>
double integrate(const SimplexRule& rule, F f)
{
    double s = 0;
    std::vector<double> t(static_cast<std::size_t>(rule.r));
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const auto* idx = rule.node(i);
        for (int m = 0; m < rule.r; ++m)
            t[static_cast<std::size_t>(m)] = rule.times[idx[m]];
        s += rule.weights[i] * f(t);
    }
    return s;
}

} // namespace

TEST(Quadrature, GaussLegendreOnUnitInterval)
{
    for (int order = 1; order <= kMaxGaussOrder; ++order) {
        const auto g = gauss_legendre(order);
        ASSERT_EQ(g.nodes.size(), static_cast<std::size_t>(order));
        // exact for polynomials of degree 2·order − 1
        for (int p = 0; p < 2 * order; ++p) {
            double s = 0;
            for (std::size_t i = 0; i < g.nodes.size(); ++i)
                s += g.weights[i] * std::pow(g.nodes[i], p);
            EXPECT_NEAR(s, 1.0 / (p + 1), 1e-14) << "order " << order << " p " << p;
        }
    }
    EXPECT_THROW(gauss_legendre(kMaxGaussOrder + 1), std::invalid_argument);
    EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
}

TEST(Quadrature, SimplexWeightsSumToVolume)
{
    for (int r = 1; r <= 4; ++r)
        for (int order : {1, 3, 4}) {
            const auto rule = simplex_rule(r, {0, 0.3, 1}, 3, order);
            EXPECT_NEAR(rule.weight_sum(), 1 / factorial(r), 1e-12) << "r " << r;
            for (double w : rule.weights)
                EXPECT_GT(w, 0);
        }
    for (int r = 1; r <= 5; ++r)
        EXPECT_NEAR(monte_carlo_simplex_rule(r, 1000, 1).weight_sum(), 1 / factorial(r), 1e-12);
}

TEST(Quadrature, NodesAreOrdered)
{
    const auto rule = simplex_rule(3, {0, 0.5, 1}, 2, 3);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const auto* idx = rule.node(i);
        for (int m = 0; m + 1 < rule.r; ++m)
            EXPECT_LE(rule.times[idx[m]], rule.times[idx[m + 1]]);
    }
    EXPECT_TRUE(std::is_sorted(rule.times.begin(), rule.times.end()));
}

TEST(Quadrature, ExactOnMonomials)
{
    // ∫_{Δ^r} t_1^{a_1}…t_r^{a_r}: Dirichlet integral computed by iterated exact integration
    // for r = 2: ∫_0^1 ∫_0^{t2} t1^a t2^b = 1/((a+1)(a+b+2))
    const auto rule = simplex_rule(2, {0, 1}, 4, 4);
    for (int a = 0; a <= 3; ++a)
        for (int b = 0; b <= 3; ++b) {
            const double exact = 1.0 / ((a + 1) * (a + b + 2));
            const double q = integrate(rule, [&](const std::vector<double>& t) {
                return std::pow(t[0], a) * std::pow(t[1], b);
            });
            EXPECT_NEAR(q, exact, 1e-14);
        }
    // r = 3: ∫ t1 t2 t3 = 1/48
    const auto r3 = simplex_rule(3, {0, 0.25, 1}, 2, 4);
    EXPECT_NEAR(integrate(r3, [](const std::vector<double>& t) { return t[0] * t[1] * t[2]; }), 1.0 / 48, 1e-14);
}

TEST(Quadrature, ConvergesOnSmoothIntegrand)
{
    // ∫_{Δ^2} sin(t1) cos(t2) = ∫_0^1 cos(t2)(1 − cos t2) dt2
    const double exact = std::sin(1.0) - (0.5 + std::sin(2.0) / 4);
    auto f = [](const std::vector<double>& t) { return std::sin(t[0]) * std::cos(t[1]); };
    const double coarse = std::abs(integrate(simplex_rule(2, {0, 1}, 1, 2), f) - exact);
    const double fine = std::abs(integrate(simplex_rule(2, {0, 1}, 4, 4), f) - exact);
    EXPECT_LT(fine, 1e-12);
    EXPECT_LT(fine, coarse);
}

TEST(Quadrature, MonteCarloIsDeterministicPerSeed)
{
    const auto a = monte_carlo_simplex_rule(4, 500, 42), b = monte_carlo_simplex_rule(4, 500, 42);
    EXPECT_EQ(a.times, b.times);
    auto f = [](const std::vector<double>& t) { return t[0] + t[3]; };
    // ∫_{Δ^4} (t1 + t4) = (1/5 + 4/5)/4! = 1/24
    EXPECT_NEAR(integrate(monte_carlo_simplex_rule(4, 200000, 7), f), 1.0 / 24, 2e-4);
}

TEST(Quadrature, CubeRule)
{
    const auto c = cube_rule(2, 3, 2);
    EXPECT_EQ(c.size(), 36u);
    double s = 0, m = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        s += c.weights[i];
        m += c.weights[i] * c.points[2 * i] * c.points[2 * i] * c.points[2 * i + 1];
    }
    EXPECT_NEAR(s, 1.0, 1e-14);
    EXPECT_NEAR(m, 1.0 / 6, 1e-14);
}
