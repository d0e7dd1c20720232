#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "critlab/spectral_field.hpp"

namespace critlab {

/// A Fourier multiplier. Scalar kinds act component-wise; the Leray kinds
/// act on vector fields with one component per axis.
class Symbol {
public:
    enum class Kind { Derivative, AbsSquared, AbsPower, LerayQ, LerayP, Radial };

    static Symbol derivative(int axis) { return Symbol(Kind::Derivative, axis, 0.0); }
    static Symbol abs_squared() { return Symbol(Kind::AbsSquared, 0, 2.0); }
    static Symbol abs_power(double alpha) { return Symbol(Kind::AbsPower, 0, alpha); }
    static Symbol leray_q() { return Symbol(Kind::LerayQ, 0, 0.0); }
    static Symbol leray_p() { return Symbol(Kind::LerayP, 0, 0.0); }
    static Symbol radial(std::function<double(double)> fn) {
        Symbol s(Kind::Radial, 0, 0.0);
        s.radial_ = std::move(fn);
        return s;
    }

    Kind kind() const { return kind_; }
    int axis() const { return axis_; }
    double exponent() const { return alpha_; }
    bool is_projector() const { return kind_ == Kind::LerayQ || kind_ == Kind::LerayP; }

    /// Multiplier value for scalar kinds at `mode`; singular points map to 0.
    complex scalar_value(const Grid& g, std::size_t mode) const {
        switch (kind_) {
            case Kind::Derivative: return {0.0, g.xi(mode, axis_)};
            case Kind::AbsSquared: return g.abs2(mode);
            case Kind::AbsPower:
                if (g.abs2(mode) == 0.0) return alpha_ > 0.0 ? 0.0 : (alpha_ == 0.0 ? 1.0 : 0.0);
                return std::pow(g.abs(mode), alpha_);
            case Kind::Radial: return radial_(g.abs(mode));
            default: throw InvalidArgument("symbol: projector has no scalar value");
        }
    }

private:
    Symbol(Kind k, int axis, double alpha) : kind_(k), axis_(axis), alpha_(alpha) {}
    Kind kind_;
    int axis_;
    double alpha_;
    std::function<double(double)> radial_;
};

namespace detail {

inline void leray_q_inplace(SpectralField& u) {
    const Grid& g = u.grid();
    const int d = g.dim();
    for (std::size_t m = 0; m < g.size(); ++m) {
        double k2 = g.abs2(m);
        if (k2 == 0.0) {
            for (int a = 0; a < d; ++a) u.at(a, m) = 0.0;
            continue;
        }
        complex dot = 0.0;
        for (int a = 0; a < d; ++a) dot += g.xi(m, a) * u.at(a, m);
        for (int a = 0; a < d; ++a) u.at(a, m) = g.xi(m, a) * dot / k2;
    }
}

}  // namespace detail

inline SpectralField apply_symbol(SpectralField f, const Symbol& s) {
    const Grid& g = f.grid();
    if (s.is_projector()) {
        if (f.components() != g.dim()) throw InvalidArgument("leray symbol needs a vector field");
        if (s.kind() == Symbol::Kind::LerayQ) {
            detail::leray_q_inplace(f);
            return f;
        }
        SpectralField q = f;
        detail::leray_q_inplace(q);
        return f -= q;
    }
    std::vector<complex> mult(g.size());
    for (std::size_t m = 0; m < g.size(); ++m) mult[m] = s.scalar_value(g, m);
    for (int c = 0; c < f.components(); ++c) {
        auto comp = f.component(c);
        for (std::size_t m = 0; m < g.size(); ++m) comp[m] *= mult[m];
    }
    return f;
}

/// Component-wise partial derivative along `axis`.
inline SpectralField partial(const SpectralField& f, int axis) {
    SpectralField out = f;
    const Grid& g = f.grid();
    for (int c = 0; c < f.components(); ++c) {
        auto comp = out.component(c);
        for (std::size_t m = 0; m < g.size(); ++m) comp[m] *= complex(0.0, g.xi(m, axis));
    }
    return out;
}

/// Gradient of a scalar field, one component per axis.
inline SpectralField gradient(const SpectralField& f) {
    if (f.components() != 1) throw InvalidArgument("gradient: scalar field expected");
    const Grid& g = f.grid();
    SpectralField out(g, g.dim());
    auto src = f.component(0);
    for (int a = 0; a < g.dim(); ++a) {
        auto dst = out.component(a);
        for (std::size_t m = 0; m < g.size(); ++m) dst[m] = complex(0.0, g.xi(m, a)) * src[m];
    }
    return out;
}

inline SpectralField divergence(const SpectralField& u) {
    const Grid& g = u.grid();
    if (u.components() != g.dim()) throw InvalidArgument("divergence: vector field expected");
    SpectralField out(g, 1);
    auto dst = out.component(0);
    for (int a = 0; a < g.dim(); ++a) {
        auto src = u.component(a);
        for (std::size_t m = 0; m < g.size(); ++m) dst[m] += complex(0.0, g.xi(m, a)) * src[m];
    }
    return out;
}

inline SpectralField laplacian(const SpectralField& f) {
    SpectralField out = f;
    const Grid& g = f.grid();
    for (int c = 0; c < f.components(); ++c) {
        auto comp = out.component(c);
        for (std::size_t m = 0; m < g.size(); ++m) comp[m] *= -g.abs2(m);
    }
    return out;
}

/// Leray decomposition u = Pu + Qu with Q = grad lap^{-1} div.
inline std::pair<SpectralField, SpectralField> leray_decompose(const SpectralField& u) {
    if (u.components() != u.grid().dim()) throw InvalidArgument("leray_decompose: need m == dim");
    SpectralField q = u;
    detail::leray_q_inplace(q);
    SpectralField p = u;
    p -= q;
    return {std::move(p), std::move(q)};
}

inline SpectralField leray_p(const SpectralField& u) { return leray_decompose(u).first; }
inline SpectralField leray_q(const SpectralField& u) { return apply_symbol(u, Symbol::leray_q()); }

/// Pointwise Euclidean magnitude across components raised to p, summed.
inline double lp_norm(const PhysicalField& f, double p) {
    if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p must be >= 1");
    const Grid& g = f.grid();
    const int mc = f.components();
    if (std::isinf(p)) {
        double mx = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            double s = 0.0;
            for (int c = 0; c < mc; ++c) s += f.at(c, i) * f.at(c, i);
            mx = std::max(mx, std::sqrt(s));
        }
        return mx;
    }
    // Even integer p avoids pow: |f|^p = (|f|^2)^(p/2).
    const double half = 0.5 * p;
    const int ihalf = half == std::floor(half) && half <= 8.0 ? static_cast<int>(half) : 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double s = 0.0;
        for (int c = 0; c < mc; ++c) s += f.at(c, i) * f.at(c, i);
        if (ihalf > 0) {
            double v = s;
            for (int k = 1; k < ihalf; ++k) v *= s;
            acc += v;
        } else {
            acc += std::pow(s, half);
        }
    }
    return std::pow(acc * g.cell_volume(), 1.0 / p);
}

/// L^2 norm from coefficients (Parseval).
inline double l2_norm_parseval(const SpectralField& f) {
    double acc = 0.0;
    for (const auto& c : f.data()) acc += std::norm(c);
    return std::sqrt(acc * f.grid().volume());
}

/// L^p norm of a vector field's Euclidean magnitude. p = 2 uses Parseval,
/// other p use collocation quadrature at the working resolution.
inline double lp_norm(const SpectralField& f, double p) {
    if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p must be >= 1");
    if (p == 2.0) return l2_norm_parseval(f);
    return lp_norm(to_physical(f), p);
}

namespace detail {

inline void accumulate_product(PhysicalField& acc, const PhysicalField& a, const PhysicalField& b) {
    const int ca = a.components(), cb = b.components();
    for (int c = 0; c < acc.components(); ++c) {
        auto dst = acc.component(c);
        auto sa = a.component(ca == 1 ? 0 : c);
        auto sb = b.component(cb == 1 ? 0 : c);
        for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += sa[p] * sb[p];
    }
}

inline int product_components(const SpectralField& f, const SpectralField& g) {
    if (!(f.grid() == g.grid())) throw InvalidArgument("product: grid mismatch");
    if (f.components() != g.components() && f.components() != 1 && g.components() != 1)
        throw InvalidArgument("product: component mismatch");
    return std::max(f.components(), g.components());
}

}  // namespace detail

/// Pointwise product, dealiased.
inline SpectralField product(const SpectralField& f, const SpectralField& g) {
    const int mc = detail::product_components(f, g);
    PhysicalField acc(f.grid(), mc);
    detail::accumulate_product(acc, to_physical(f), to_physical(g));
    return to_spectral_dealiased(acc);
}

}  // namespace critlab
