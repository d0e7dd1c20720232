#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "critlab/besov.hpp"
#include "critlab/model.hpp"
#include "critlab/operators.hpp"

namespace critlab {

inline constexpr double kDensityFloor = 0.1;

namespace detail {

inline void check_finite(const PhysicalField& f, const char* what) {
    for (double v : f.data())
        if (!std::isfinite(v)) throw GuardViolation(std::string("non-finite value in ") + what);
}

/// J[a].at(c, p) = d_a v_c at collocation point p.
inline std::vector<PhysicalField> jacobian(const SpectralField& v) {
    std::vector<PhysicalField> out;
    out.reserve(static_cast<std::size_t>(v.grid().dim()));
    for (int a = 0; a < v.grid().dim(); ++a) out.push_back(to_physical(partial(v, a)));
    return out;
}

/// 1 + eps b in physical space, guarded from below.
inline PhysicalField guarded_density(const PhysicalField& b, double eps) {
    PhysicalField rho(b.grid(), 1);
    double lo = INFINITY;
    for (std::size_t p = 0; p < b.points(); ++p) {
        rho.at(0, p) = 1.0 + eps * b.at(0, p);
        lo = std::min(lo, rho.at(0, p));
    }
    if (!std::isfinite(lo)) throw GuardViolation("non-finite density");
    if (lo < kDensityFloor)
        throw GuardViolation("density positivity guard: min(1 + eps b) = " + std::to_string(lo) + " < " +
                             std::to_string(kDensityFloor));
    return rho;
}

/// K(x) = 1 - P'(1+x)/(1+x) in cancellation-free form.
inline double k_of(const PressureLaw& law, double x) {
    if (law.kind == PressureLaw::Kind::Linear) return x / (1.0 + x);
    if (law.gamma == 2.0) return 0.0;
    return -std::expm1((law.gamma - 2.0) * std::log1p(x));
}

/// K(eps b)/eps, finite as eps -> 0.
inline double k_eps_of(const PressureLaw& law, double b, double eps) {
    if (law.kind == PressureLaw::Kind::Linear) return b / (1.0 + eps * b);
    if (law.gamma == 2.0) return 0.0;
    const double x = eps * b;
    if (x == 0.0) return -(law.gamma - 2.0) * b;
    return -std::expm1((law.gamma - 2.0) * std::log1p(x)) / eps;
}

/// Elastic stress div(grad d (.) grad d - |grad d|^2 I / 2) in physical space.
inline PhysicalField elastic_divergence(const std::vector<PhysicalField>& jd, const Grid& g, bool with_trace) {
    const int n = g.dim();
    const std::size_t np = g.size();
    // S_ij = sum_k d_i d_k d_j d_k
    PhysicalField s(g, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (std::size_t p = 0; p < np; ++p) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k) acc += jd[static_cast<std::size_t>(i)].at(k, p) * jd[static_cast<std::size_t>(j)].at(k, p);
                s.at(i * n + j, p) = acc;
                s.at(j * n + i, p) = acc;
            }
    if (with_trace) {
        for (std::size_t p = 0; p < np; ++p) {
            double tr = 0.0;
            for (int i = 0; i < n; ++i) tr += s.at(i * n + i, p);
            for (int i = 0; i < n; ++i) s.at(i * n + i, p) -= 0.5 * tr;
        }
    }
    SpectralField sh = to_spectral_dealiased(s);
    SpectralField div(g, n);
    for (int i = 0; i < n; ++i) {
        auto dst = div.component(i);
        for (int j = 0; j < n; ++j) {
            auto src = sh.component(i * n + j);
            for (std::size_t m = 0; m < g.size(); ++m) dst[m] += complex(0.0, g.xi(m, j)) * src[m];
        }
    }
    return to_physical(div);
}

inline void subtract_advection(PhysicalField& out, const PhysicalField& u, const std::vector<PhysicalField>& jv) {
    const int n = u.components();
    for (int c = 0; c < out.components(); ++c)
        for (std::size_t p = 0; p < out.points(); ++p) {
            double acc = 0.0;
            for (int a = 0; a < n; ++a) acc += u.at(a, p) * jv[static_cast<std::size_t>(a)].at(c, p);
            out.at(c, p) -= acc;
        }
}

/// theta |grad d|^2 d
inline void add_director_tension(PhysicalField& out, const PhysicalField& d, const std::vector<PhysicalField>& jd,
                                 double theta) {
    const int n = d.components();
    for (std::size_t p = 0; p < out.points(); ++p) {
        double g2 = 0.0;
        for (const auto& ja : jd)
            for (int k = 0; k < n; ++k) g2 += ja.at(k, p) * ja.at(k, p);
        for (int c = 0; c < n; ++c) out.at(c, p) += theta * g2 * d.at(c, p);
    }
}

}  // namespace detail

/// Pressure-law coefficients evaluated at eps b.
struct PressureCoefficients {
    SpectralField K;      // K(eps b)
    SpectralField I;      // I(eps b) = eps b / (1 + eps b)
    SpectralField k_eps;  // K(eps b) / eps
};

inline PressureCoefficients pressure_coeffs(const SpectralField& b, const ModelParams& prm) {
    PhysicalField bp = to_physical(b);
    PhysicalField rho = detail::guarded_density(bp, prm.eps);
    PhysicalField K(b.grid(), 1), I(b.grid(), 1), ke(b.grid(), 1);
    for (std::size_t p = 0; p < bp.points(); ++p) {
        const double x = prm.eps * bp.at(0, p);
        K.at(0, p) = detail::k_of(prm.pressure, x);
        I.at(0, p) = x / rho.at(0, p);
        ke.at(0, p) = detail::k_eps_of(prm.pressure, bp.at(0, p), prm.eps);
    }
    return {to_spectral_dealiased(K), to_spectral_dealiased(I), to_spectral_dealiased(ke)};
}

/// Constant-coefficient Lame operator mu lap u + (mu + lambda) grad div u.
inline SpectralField lame(const SpectralField& u, const ModelParams& prm) {
    SpectralField out = laplacian(u);
    out *= prm.mu;
    out.axpy(prm.mu + prm.lambda, gradient(divergence(u)));
    return out;
}

/// Nonlinear tendencies of the eps-scaled compressible system. The linear
/// part (acoustic coupling, viscosity, director diffusion) is left to the
/// exact propagator.
inline FlowState rhs_compressible(const FlowState& s, const ModelParams& prm) {
    const Grid& g = s.grid();
    const int n = g.dim();
    PhysicalField bp = to_physical(s.b);
    PhysicalField up = to_physical(s.u);
    PhysicalField dp = to_physical(s.d);
    detail::check_finite(bp, "b");
    detail::check_finite(up, "u");
    detail::check_finite(dp, "d");
    PhysicalField rho = detail::guarded_density(bp, prm.eps);

    // b: -div(b u)
    PhysicalField bu(g, n);
    for (int a = 0; a < n; ++a)
        for (std::size_t p = 0; p < g.size(); ++p) bu.at(a, p) = bp.at(0, p) * up.at(a, p);
    SpectralField db = divergence(to_spectral_dealiased(bu));
    db *= -1.0;

    // u: -u.grad u - I(eps b) A u + k_eps(b) grad b - xi/(1 + eps b) div(stress)
    auto ju = detail::jacobian(s.u);
    auto jd = detail::jacobian(s.d);
    PhysicalField au = to_physical(lame(s.u, prm));
    PhysicalField gb = to_physical(gradient(s.b));
    PhysicalField el = detail::elastic_divergence(jd, g, true);
    PhysicalField du(g, n);
    detail::subtract_advection(du, up, ju);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double r = rho.at(0, p);
        const double iv = prm.eps * bp.at(0, p) / r;
        const double kv = detail::k_eps_of(prm.pressure, bp.at(0, p), prm.eps);
        for (int a = 0; a < n; ++a)
            du.at(a, p) += -iv * au.at(a, p) + kv * gb.at(a, p) - prm.xi / r * el.at(a, p);
    }

    // d: -u.grad d + theta |grad d|^2 d
    PhysicalField dd(g, n);
    detail::subtract_advection(dd, up, jd);
    detail::add_director_tension(dd, dp, jd, prm.theta);

    return {std::move(db), to_spectral_dealiased(du), to_spectral_dealiased(dd), s.d_hat, s.t};
}

/// Nonlinear tendencies of the incompressible limit system; db is zero.
/// `divergence_norm`, when given, receives ||div u||_{L2} of the input.
inline FlowState rhs_incompressible(const FlowState& s, const ModelParams& prm, double* divergence_norm = nullptr) {
    const Grid& g = s.grid();
    const int n = g.dim();
    if (divergence_norm) *divergence_norm = l2_norm_parseval(divergence(s.u));
    PhysicalField up = to_physical(s.u);
    PhysicalField dp = to_physical(s.d);
    detail::check_finite(up, "u");
    detail::check_finite(dp, "d");
    auto ju = detail::jacobian(s.u);
    auto jd = detail::jacobian(s.d);
    PhysicalField el = detail::elastic_divergence(jd, g, false);
    PhysicalField du(g, n);
    detail::subtract_advection(du, up, ju);
    for (std::size_t i = 0; i < du.data().size(); ++i) du.data()[i] -= prm.xi * el.data()[i];
    PhysicalField dd(g, n);
    detail::subtract_advection(dd, up, jd);
    detail::add_director_tension(dd, dp, jd, prm.theta);
    return {SpectralField(g, 1), leray_p(to_spectral_dealiased(du)), to_spectral_dealiased(dd), s.d_hat, s.t};
}

/// exp(t A) for A = [[0, -a], [a, -c]], a = k/eps, c = nu k^2, row-major.
inline std::array<double, 4> acoustic_block(double k, double eps, double nu, double t) {
    const double a = k / eps;
    const double c = nu * k * k;
    if (a == 0.0 && c == 0.0) return {1.0, 0.0, 0.0, 1.0};
    // B = A + c/2 I satisfies B^2 = delta2 I.
    const double h = 0.5 * c;
    const double delta2 = h * h - a * a;
    const double damp = std::exp(-h * t);
    const std::array<double, 4> B = {h, -a, a, -h};
    if (std::abs(delta2) < 1e-10 * c * c) {
        return {damp * (1.0 + t * B[0]), damp * t * B[1], damp * t * B[2], damp * (1.0 + t * B[3])};
    }
    if (delta2 < 0.0) {
        const double w = std::sqrt(-delta2);
        const double cs = std::cos(w * t), sn = std::sin(w * t) / w;
        return {damp * (cs + sn * B[0]), damp * sn * B[1], damp * sn * B[2], damp * (cs + sn * B[3])};
    }
    const double d = std::sqrt(delta2);
    if (d * t < 1.0) {
        const double ch = std::cosh(d * t), sh = std::sinh(d * t) / d;
        return {damp * (ch + sh * B[0]), damp * sh * B[1], damp * sh * B[2], damp * (ch + sh * B[3])};
    }
    // Overdamped and well separated: Sylvester's formula with the slow
    // eigenvalue computed without cancellation.
    const double lm = -h - d;
    const double lp = -(a * a) / (h + d);
    const double ep = std::exp(lp * t), em = std::exp(lm * t);
    const double inv = 1.0 / (lp - lm);
    const std::array<double, 4> A = {0.0, -a, a, -c};
    std::array<double, 4> out{};
    for (int i = 0; i < 4; ++i) {
        const double id = (i == 0 || i == 3) ? 1.0 : 0.0;
        out[static_cast<std::size_t>(i)] = ((A[static_cast<std::size_t>(i)] - lm * id) * ep -
                                            (A[static_cast<std::size_t>(i)] - lp * id) * em) * inv;
    }
    return out;
}

/// Forcing (F, G) of the acoustic pair at time tau.
using AcousticForcing = std::function<std::pair<SpectralField, SpectralField>(double)>;

/// Solves d_t b + Lambda v / eps = F, d_t v - Lambda b / eps = nu lap v + G
/// mode by mode with the exact propagator; the Duhamel integral of the
/// forcing uses the trapezoidal rule on `quad_steps` intervals.
inline std::pair<SpectralField, SpectralField> acoustic_propagate(const SpectralField& b0, const SpectralField& v0,
                                                                  double eps, double nu, double t,
                                                                  const AcousticForcing& forcing = {},
                                                                  int quad_steps = 64) {
    b0.check_compatible(v0);
    if (b0.components() != 1) throw InvalidArgument("acoustic_propagate: scalar fields expected");
    const Grid& g = b0.grid();
    auto apply = [&](const SpectralField& b, const SpectralField& v, double tau, SpectralField& ob,
                     SpectralField& ov, double weight) {
        for (std::size_t m = 0; m < g.size(); ++m) {
            auto E = acoustic_block(g.abs(m), eps, nu, tau);
            const complex bm = b.at(0, m), vm = v.at(0, m);
            ob.at(0, m) += weight * (E[0] * bm + E[1] * vm);
            ov.at(0, m) += weight * (E[2] * bm + E[3] * vm);
        }
    };
    SpectralField b(g, 1), v(g, 1);
    apply(b0, v0, t, b, v, 1.0);
    if (forcing && t > 0.0) {
        if (quad_steps < 1) throw InvalidArgument("acoustic_propagate: quad_steps must be >= 1");
        const double h = t / quad_steps;
        for (int i = 0; i <= quad_steps; ++i) {
            const double tau = i * h;
            const double w = (i == 0 || i == quad_steps) ? 0.5 * h : h;
            auto [F, G] = forcing(tau);
            apply(F, G, t - tau, b, v, w);
        }
    }
    return {std::move(b), std::move(v)};
}

/// v = Lambda^{-1} div u, the scalar companion of Q u.
inline SpectralField acoustic_potential(const SpectralField& u) {
    return apply_symbol(divergence(u), Symbol::abs_power(-1.0));
}

/// Q u recovered from its scalar potential: Q u = -i (xi / |xi|) v in
/// Fourier variables.
inline SpectralField velocity_from_potential(const SpectralField& v) {
    const Grid& g = v.grid();
    SpectralField u(g, g.dim());
    for (std::size_t m = 0; m < g.size(); ++m) {
        const double k = g.abs(m);
        if (k == 0.0) continue;
        for (int a = 0; a < g.dim(); ++a) u.at(a, m) = complex(0.0, -g.xi(m, a) / k) * v.at(0, m);
    }
    return u;
}

/// Pointwise d / |d| followed by dealiasing.
inline SpectralField renormalize_director(const SpectralField& d) {
    PhysicalField dp = to_physical(d);
    for (std::size_t p = 0; p < dp.points(); ++p) {
        double n2 = 0.0;
        for (int c = 0; c < dp.components(); ++c) n2 += dp.at(c, p) * dp.at(c, p);
        const double nrm = std::sqrt(n2);
        if (!(nrm >= 0.5)) throw GuardViolation("director magnitude below 0.5: " + std::to_string(nrm));
        for (int c = 0; c < dp.components(); ++c) dp.at(c, p) /= nrm;
    }
    return to_spectral_dealiased(dp);
}

struct LimitDiagnostics {
    SpectralField w;     // P u_eps - u
    SpectralField dbar;  // d_eps - d
    SpectralField qu;    // Q u_eps
    SpectralField b;     // b_eps
};

inline LimitDiagnostics compute_limit_diagnostics(const FlowState& comp, const FlowState& incomp, double dt) {
    if (std::abs(comp.t - incomp.t) > 0.5 * dt)
        throw InvalidArgument("limit diagnostics: states are at different times");
    if (!(comp.grid() == incomp.grid())) throw InvalidArgument("limit diagnostics: grid mismatch");
    auto [p, q] = leray_decompose(comp.u);
    p -= incomp.u;
    return {std::move(p), comp.d - incomp.d, std::move(q), comp.b};
}

/// True when eps = 2^-k for an integer k >= 0.
inline bool is_dyadic(double eps) {
    int e = 0;
    double m = std::frexp(eps, &e);
    return m == 0.5 && eps <= 1.0;
}

/// Grid whose box is L / eps with identical integer index tables.
inline Grid dilated_grid(const Grid& g, double eps) {
    return grid_make(g.dim(), g.n(), g.box_length() / eps, g.dealias_fraction());
}

/// Re-read the coefficients of f on the dilated grid, times `amplitude`:
/// the result is x -> amplitude * f(eps x) on the box of side L / eps.
inline SpectralField dilate(const SpectralField& f, double eps, double amplitude = 1.0) {
    SpectralField out(dilated_grid(f.grid(), eps), f.components());
    for (std::size_t i = 0; i < f.data().size(); ++i) out.data()[i] = amplitude * f.data()[i];
    return out;
}

/// (c, v, h)(t, x) = (eps b, eps u, d)(eps^2 t, eps x); dyadic eps only.
inline FlowState rescale_state(const FlowState& s, double eps) {
    if (!(eps > 0.0) || !is_dyadic(eps)) throw InvalidArgument("rescale: eps must be 2^-k");
    return {dilate(s.b, eps, eps), dilate(s.u, eps, eps), dilate(s.d, eps, 1.0), s.d_hat, s.t / (eps * eps)};
}

}  // namespace critlab
