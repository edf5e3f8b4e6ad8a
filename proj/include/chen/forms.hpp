#pragma once

// Symbolic differential forms on spheres: normalized volume forms, scalar
// multiples, wedges and pullbacks along catalog maps. A form is evaluated at a
// point of S^n ⊂ R^{n+1} on ambient tangent vectors.

#include <chen/errors.hpp>
#include <chen/jet.hpp>
#include <chen/maps.hpp>
#include <chen/sphere.hpp>

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace chen {

/// Vol(S^n) = 2π^{(n+1)/2} / Γ((n+1)/2).
inline double sphere_volume(int n)
{
    return 2 * std::pow(std::numbers::pi, (n + 1) / 2.0) / std::tgamma((n + 1) / 2.0);
}

/// Determinant of a small dense matrix given by columns (partial pivoting).
inline double determinant(std::vector<Vec<double>> cols)
{
    const std::size_t m = cols.size();
    double det = 1;
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < m; ++r)
            if (std::abs(cols[c][r]) > std::abs(cols[c][p]))
                p = r;
        if (cols[c][p] == 0)
            return 0;
        if (p != c) {
            for (auto& col : cols)
                std::swap(col[p], col[c]);
            det = -det;
        }
        const double piv = cols[c][c];
        det *= piv;
        for (std::size_t r = c + 1; r < m; ++r) {
            const double f = cols[c][r] / piv;
            if (f == 0)
                continue;
            for (std::size_t k = c; k < m; ++k)
                cols[k][r] -= f * cols[k][c];
        }
    }
    return det;
}

class FormSpec {
public:
    enum class Kind { volume, scaled, wedge, pullback };

    /// Volume form of S^n normalized to total integral 1.
    static FormSpec volume(int n)
    {
        if (n < 1)
            throw DimensionMismatch("volume form needs n >= 1");
        FormSpec f;
        f.kind_ = Kind::volume;
        f.n_ = n;
        f.degree_ = n;
        f.scale_ = 1 / sphere_volume(n);
        return f;
    }

    static FormSpec scaled(double c, const FormSpec& a)
    {
        FormSpec f;
        f.kind_ = Kind::scaled;
        f.n_ = a.n_;
        f.degree_ = a.degree_;
        f.scale_ = c;
        f.left_ = std::make_shared<FormSpec>(a);
        return f;
    }

    static FormSpec wedge(const FormSpec& a, const FormSpec& b)
    {
        if (a.n_ != b.n_)
            throw TargetMismatch("wedge of forms on different spheres");
        FormSpec f;
        f.kind_ = Kind::wedge;
        f.n_ = a.n_;
        f.degree_ = a.degree_ + b.degree_;
        f.left_ = std::make_shared<FormSpec>(a);
        f.right_ = std::make_shared<FormSpec>(b);
        return f;
    }

    static FormSpec pullback(const MapSpec& map, const FormSpec& a)
    {
        if (map.target() != a.n_)
            throw TargetMismatch("pullback along " + map.name() + " of a form on S^" + std::to_string(a.n_));
        FormSpec f;
        f.kind_ = Kind::pullback;
        f.n_ = map.source();
        f.degree_ = a.degree_;
        f.left_ = std::make_shared<FormSpec>(a);
        f.map_ = std::make_shared<MapSpec>(map);
        return f;
    }

    Kind kind() const { return kind_; }
    /// The form lives on S^n.
    int n() const { return n_; }
    int degree() const { return degree_; }

    /// Upper bound on the comass sup_x sup_{|v_i|=1} |α(x)(v_1,…,v_d)|; exact for
    /// volume forms and their multiples.
    double comass() const
    {
        switch (kind_) {
        case Kind::volume:
            return scale_;
        case Kind::scaled:
            return std::abs(scale_) * left_->comass();
        case Kind::wedge: {
            const int p = left_->degree_, q = right_->degree_;
            return std::tgamma(p + q + 1) / (std::tgamma(p + 1) * std::tgamma(q + 1)) * left_->comass() *
                   right_->comass();
        }
        case Kind::pullback:
            return std::pow(map_->lipschitz(), degree_) * left_->comass();
        }
        return 0;
    }

    /// α(x)(v_1,…,v_d) for ambient vectors tangent at x.
    double evaluate(const Vec<double>& x, std::span<const Vec<double>> v) const
    {
        if (static_cast<int>(v.size()) != degree_)
            throw ArityMismatch("form of degree " + std::to_string(degree_) + " evaluated on " +
                                std::to_string(v.size()) + " vectors");
        switch (kind_) {
        case Kind::volume: {
            std::vector<Vec<double>> cols{x};
            cols.insert(cols.end(), v.begin(), v.end());
            return scale_ * determinant(std::move(cols));
        }
        case Kind::scaled:
            return scale_ * left_->evaluate(x, v);
        case Kind::wedge:
            return evaluate_wedge(x, v);
        case Kind::pullback:
            return evaluate_pullback(x, v);
        }
        return 0;
    }

    nlohmann::json to_json() const
    {
        switch (kind_) {
        case Kind::volume:
            return {{"form", "volume"}, {"n", n_}};
        case Kind::scaled:
            return {{"form", "scaled"}, {"c", scale_}, {"of", left_->to_json()}};
        case Kind::wedge:
            return {{"form", "wedge"}, {"left", left_->to_json()}, {"right", right_->to_json()}};
        case Kind::pullback:
            return {{"form", "pullback"}, {"map", map_->descriptor()}, {"of", left_->to_json()}};
        }
        return {};
    }

    static FormSpec from_json(const nlohmann::json& j)
    {
        const auto kind = j.at("form").get<std::string>();
        if (kind == "volume")
            return volume(j.at("n"));
        if (kind == "scaled")
            return scaled(j.at("c"), from_json(j.at("of")));
        if (kind == "wedge")
            return wedge(from_json(j.at("left")), from_json(j.at("right")));
        if (kind == "pullback")
            return pullback(maps::from_json(j.at("map")), from_json(j.at("of")));
        throw ParseError("unknown form '" + kind + "'");
    }

private:
    double evaluate_wedge(const Vec<double>& x, std::span<const Vec<double>> v) const
    {
        // (α∧β)(v) = Σ over (p,q)-shuffles sgn(σ) α(v_σ(1..p)) β(v_σ(p+1..p+q))
        const int p = left_->degree_, total = degree_;
        double sum = 0;
        for (unsigned mask = 0; mask < (1u << total); ++mask) {
            if (std::popcount(mask) != p)
                continue;
            std::vector<Vec<double>> a, b;
            int inversions = 0, seen_b = 0;
            for (int i = 0; i < total; ++i) {
                if (mask & (1u << i)) {
                    a.push_back(v[i]);
                    inversions += seen_b;
                } else {
                    b.push_back(v[i]);
                    ++seen_b;
                }
            }
            const double s = (inversions % 2) ? -1.0 : 1.0;
            sum += s * left_->evaluate(x, a) * right_->evaluate(x, b);
        }
        return sum;
    }

    double evaluate_pullback(const Vec<double>& x, std::span<const Vec<double>> v) const
    {
        if (v.size() > kJetDirections)
            throw ArityMismatch("too many vectors for the pullback differential");
        Vec<Jet> xj;
        for (std::size_t i = 0; i < x.size(); ++i) {
            Jet j(x[i]);
            for (std::size_t k = 0; k < v.size(); ++k)
                j.d[k] = v[k][i];
            xj.push_back(j);
        }
        const auto y = (*map_)(xj);
        std::vector<Vec<double>> pushed;
        for (std::size_t k = 0; k < v.size(); ++k)
            pushed.push_back(derivative(y, k));
        return left_->evaluate(values(y), pushed);
    }

    Kind kind_ = Kind::volume;
    int n_ = 0;
    int degree_ = 0;
    double scale_ = 1;
    std::shared_ptr<const FormSpec> left_, right_;
    std::shared_ptr<const MapSpec> map_;
};

} // namespace chen
