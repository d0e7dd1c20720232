#include <gtest/gtest.h>

#include <cmath>

#include "critlab/flow_models.hpp"
#include "critlab/random_fields.hpp"
#include "oracles.hpp"

using namespace critlab;

namespace {

ModelParams linear_params(double eps) {
    ModelParams p;
    p.mu = 0.7;
    p.lambda = 0.4;
    p.xi = 1.3;
    p.theta = 0.6;
    p.eps = eps;
    p.pressure = PressureLaw::linear();
    return p;
}

// Analytic test state on [0, 2pi)^2:
//   b = 0.3 cos x cos y, u = (sin y + 0.3 cos x, 0.5 sin x cos y),
//   d = (sin psi, cos psi), psi = 0.2 sin x sin y.
struct Analytic {
    static double psi(double x, double y) { return 0.2 * std::sin(x) * std::sin(y); }
    static double b(double x, double y) { return 0.3 * std::cos(x) * std::cos(y); }
    static double u(int c, double x, double y) {
        return c == 0 ? std::sin(y) + 0.3 * std::cos(x) : 0.5 * std::sin(x) * std::cos(y);
    }
    static double d(int c, double x, double y) { return c == 0 ? std::sin(psi(x, y)) : std::cos(psi(x, y)); }
};

FlowState analytic_state(const Grid& g) {
    FlowState s = rest_state(g);
    s.b = to_spectral(sample(g, 1, [](auto& x, int) { return Analytic::b(x[0], x[1]); }));
    s.u = to_spectral(sample(g, 2, [](auto& x, int c) { return Analytic::u(c, x[0], x[1]); }));
    s.d = to_spectral(sample(g, 2, [](auto& x, int c) { return Analytic::d(c, x[0], x[1]); }));
    return s;
}

double max_diff(const PhysicalField& a, const PhysicalField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace

TEST(Pressure, LinearLawKEqualsI) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    FieldSampler rng(1);
    SpectralField b = normalized_l2(rng.band_limited(g, 1, 0, 6), 0.5);
    auto pc = pressure_coeffs(b, linear_params(1.0));
    EXPECT_LT(max_abs_coeff(pc.K - pc.I), 1e-15);
    auto zero = pressure_coeffs(SpectralField(g, 1), linear_params(0.5));
    EXPECT_EQ(max_abs_coeff(zero.K), 0.0);
    EXPECT_EQ(max_abs_coeff(zero.I), 0.0);
    EXPECT_EQ(max_abs_coeff(zero.k_eps), 0.0);
}

TEST(Pressure, GammaTwoVanishes) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    FieldSampler rng(2);
    ModelParams p = linear_params(0.25);
    p.pressure = PressureLaw::gamma_law(2.0);
    auto pc = pressure_coeffs(normalized_l2(rng.band_limited(g, 1, 0, 6), 1.0), p);
    EXPECT_EQ(max_abs_coeff(pc.K), 0.0);
    EXPECT_EQ(max_abs_coeff(pc.k_eps), 0.0);
}

TEST(Pressure, GammaLawAgainstDirectFormula) {
    PressureLaw law = PressureLaw::gamma_law(1.4);
    for (double b : {-0.5, -0.1, 0.2, 1.0})
        for (double eps : {1.0, 0.25, 1.0 / 64}) {
            double x = eps * b;
            double direct = (1.0 - law.derivative(1.0 + x) / (1.0 + x)) / eps;
            EXPECT_NEAR(detail::k_eps_of(law, b, eps), direct, 1e-12 * (1 + std::abs(direct)));
        }
    // eps -> 0 limit: K'(0) = 2 - gamma
    EXPECT_NEAR(detail::k_eps_of(law, 0.3, 1e-12), -(1.4 - 2.0) * 0.3, 1e-9);
}

TEST(Pressure, PositivityGuard) {
    Grid g = grid_make(1, 16, 2 * oracle::pi, 1.0);
    SpectralField b(g, 1);
    b.at(0, 0) = -0.95;
    EXPECT_THROW(pressure_coeffs(b, linear_params(1.0)), GuardViolation);
    FlowState s = rest_state(g);
    s.b = b;
    EXPECT_THROW(rhs_compressible(s, linear_params(1.0)), GuardViolation);
    EXPECT_NO_THROW(pressure_coeffs(b, linear_params(0.5)));
}

TEST(Compressible, ZeroStateZeroTendency) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    FlowState t = rhs_compressible(rest_state(g), linear_params(0.5));
    EXPECT_EQ(max_abs_coeff(t.b), 0.0);
    EXPECT_EQ(max_abs_coeff(t.u), 0.0);
    EXPECT_EQ(max_abs_coeff(t.d), 0.0);
}

TEST(Compressible, ConstantDirectorHasNoElasticForcing) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    FieldSampler rng(3);
    FlowState s = rest_state(g);
    s.u = normalized_l2(rng.band_limited(g, 2, 0, 6), 0.5);
    s.b = normalized_l2(rng.band_limited(g, 1, 0, 6), 0.5);
    ModelParams p = linear_params(0.5);
    FlowState with = rhs_compressible(s, p);
    p.xi = 7.0;
    FlowState other = rhs_compressible(s, p);
    EXPECT_LT(max_abs_coeff(with.u - other.u), 1e-15);
    EXPECT_LT(max_abs_coeff(with.d), 1e-15);
}

TEST(Compressible, MatchesAnalyticTendencies) {
    Grid g = grid_make(2, 64, 2 * oracle::pi, 1.0);
    FlowState s = analytic_state(g);
    ModelParams p = linear_params(0.5);
    FlowState t = rhs_compressible(s, p);

    const double mu = p.mu, ml = p.mu + p.lambda, eps = p.eps;
    PhysicalField eb(g, 1), eu(g, 2), ed(g, 2);
    for (std::size_t q = 0; q < g.size(); ++q) {
        const double x = g.coordinate(q, 0), y = g.coordinate(q, 1);
        const double sx = std::sin(x), cx = std::cos(x), sy = std::sin(y), cy = std::cos(y);
        const double b = 0.3 * cx * cy, bx = -0.3 * sx * cy, by = -0.3 * cx * sy;
        const double u1 = sy + 0.3 * cx, u2 = 0.5 * sx * cy;
        const double u1x = -0.3 * sx, u1y = cy, u2x = 0.5 * cx * cy, u2y = -0.5 * sx * sy;
        const double div = u1x + u2y;
        const double lap1 = -sy - 0.3 * cx, lap2 = -sx * cy;
        const double gd1 = -0.3 * cx - 0.5 * cx * sy, gd2 = -0.5 * sx * cy;
        const double A1 = mu * lap1 + ml * gd1, A2 = mu * lap2 + ml * gd2;
        const double psi = 0.2 * sx * sy, px = 0.2 * cx * sy, py = 0.2 * sx * cy, lpsi = -2.0 * psi;
        const double rho = 1.0 + eps * b;
        const double I = eps * b / rho, ke = b / rho;
        eb.at(0, q) = -(bx * u1 + by * u2 + b * div);
        eu.at(0, q) = -(u1 * u1x + u2 * u1y) - I * A1 + ke * bx - p.xi / rho * px * lpsi;
        eu.at(1, q) = -(u1 * u2x + u2 * u2y) - I * A2 + ke * by - p.xi / rho * py * lpsi;
        const double adv = u1 * px + u2 * py, g2 = px * px + py * py;
        ed.at(0, q) = -adv * std::cos(psi) + p.theta * g2 * std::sin(psi);
        ed.at(1, q) = adv * std::sin(psi) + p.theta * g2 * std::cos(psi);
    }
    EXPECT_LT(max_diff(to_physical(t.b), eb), 1e-12);
    EXPECT_LT(max_diff(to_physical(t.u), eu), 1e-10);
    EXPECT_LT(max_diff(to_physical(t.d), ed), 1e-12);
}

TEST(Compressible, ReducesToIncompressibleOnSolenoidalData) {
    Grid g = grid_make(2, 64, 2 * oracle::pi, 2.0 / 3.0);
    FieldSampler rng(8);
    FlowState s = rest_state(g);
    s.u = leray_p(normalized_l2(rng.band_limited(g, 2, 0, 5), 0.3));
    SpectralField dp = normalized_l2(rng.band_limited(g, 2, 0, 4), 0.1);
    s.d += dp;
    s.d = renormalize_director(s.d);
    ModelParams p = linear_params(0.25);
    FlowState c = rhs_compressible(s, p);
    FlowState i = rhs_incompressible(s, p);
    EXPECT_LT(max_abs_coeff(leray_p(c.u) - i.u), 1e-13);
    EXPECT_LT(max_abs_coeff(c.d - i.d), 1e-14);
    EXPECT_LT(max_abs_coeff(c.b), 1e-15);
}

TEST(Incompressible, ProjectedAndElasticOnly) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    FieldSampler rng(5);
    FlowState s = rest_state(g);
    s.d += normalized_l2(rng.band_limited(g, 2, 0, 4), 0.2);
    s.d = renormalize_director(s.d);
    ModelParams p = linear_params(1.0);
    double div = -1.0;
    FlowState t = rhs_incompressible(s, p, &div);
    EXPECT_EQ(div, 0.0);
    EXPECT_LT(max_abs_coeff(divergence(t.u)), 1e-12);
    // -xi P div(grad d (.) grad d) assembled independently through the Bony-free product path
    SpectralField stress(g, 4);
    auto jd = detail::jacobian(s.d);
    PhysicalField sp(g, 4);
    for (std::size_t q = 0; q < g.size(); ++q)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                sp.at(i * 2 + j, q) = jd[i].at(0, q) * jd[j].at(0, q) + jd[i].at(1, q) * jd[j].at(1, q);
    stress = to_spectral_dealiased(sp);
    SpectralField divs(g, 2);
    for (int i = 0; i < 2; ++i) {
        SpectralField row(g, 2);
        std::ranges::copy(stress.component(2 * i), row.component(0).begin());
        std::ranges::copy(stress.component(2 * i + 1), row.component(1).begin());
        std::ranges::copy(divergence(row).component(0), divs.component(i).begin());
    }
    divs *= -p.xi;
    EXPECT_LT(max_abs_coeff(leray_p(divs) - t.u), 1e-13);
}

TEST(Incompressible, TaylorGreenAdvection) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    FlowState s = rest_state(g);
    s.u = to_spectral(sample(g, 2, [](auto& x, int c) {
        return c == 0 ? std::sin(x[0]) * std::cos(x[1]) : -std::cos(x[0]) * std::sin(x[1]);
    }));
    FlowState t = rhs_incompressible(s, linear_params(1.0));
    // u.grad u = -grad (cos 2x + cos 2y)/4 for Taylor-Green, so P(-u.grad u) = 0.
    EXPECT_LT(max_abs_coeff(t.u), 1e-14);
    EXPECT_LT(max_abs_coeff(t.d), 1e-15);
}

TEST(AcousticBlock, InviscidRotation) {
    for (double k : {1.0, 3.0})
        for (double eps : {1.0, 0.25}) {
            const double t = 0.37;
            auto E = acoustic_block(k, eps, 0.0, t);
            const double w = k / eps * t;
            EXPECT_NEAR(E[0], std::cos(w), 1e-14);
            EXPECT_NEAR(E[1], -std::sin(w), 1e-14);
            EXPECT_NEAR(E[2], std::sin(w), 1e-14);
            EXPECT_NEAR(E[3], std::cos(w), 1e-14);
        }
}

TEST(AcousticBlock, IdentityAtTinyTime) {
    for (double k : {0.5, 3.0, 10.0}) {
        auto E = acoustic_block(k, 0.5, 0.5, 1e-14);
        EXPECT_NEAR(E[0], 1.0, 1e-12);
        EXPECT_NEAR(E[3], 1.0, 1e-12);
        EXPECT_NEAR(E[1], 0.0, 1e-12);
        EXPECT_NEAR(E[2], 0.0, 1e-12);
    }
}

TEST(AcousticBlock, MatchesRk4Oracle) {
    struct Case {
        double k, eps, nu, t;
        long steps;
    };
    // underdamped, overdamped with d t < 1, overdamped Sylvester, critical
    const Case cases[] = {{1.0, 1.0, 3.0, 1.0, 1000000}, {2.0, 0.5, 0.3, 0.7, 200000},
                          {1.0, 1.0, 3.0, 0.2, 200000},  {4.0, 1.0, 5.0, 0.5, 400000},
                          {1.0, 1.0, 2.0, 1.3, 200000}};
    for (const auto& c : cases) {
        const double a = c.k / c.eps, cc = c.nu * c.k * c.k;
        auto E = acoustic_block(c.k, c.eps, c.nu, c.t);
        for (int col = 0; col < 2; ++col) {
            oracle::Mode2 y0{col == 0 ? 1.0 : 0.0, col == 1 ? 1.0 : 0.0};
            auto y = oracle::rk4_mode({0.0, -a, a, -cc}, y0, c.t, c.steps);
            EXPECT_NEAR(E[0 + col], y[0].real(), 1e-9) << c.k << " " << c.nu;
            EXPECT_NEAR(E[2 + col], y[1].real(), 1e-9) << c.k << " " << c.nu;
        }
    }
}

TEST(AcousticBlock, Eigenvalues) {
    // Viscous decay of b0 = 0, v0 = e: energy decreases monotonically and the
    // trace of the block equals the sum of exp(t lambda_pm).
    const double k = 2.0, eps = 0.5, nu = 0.3, t = 0.4;
    const double h = 0.5 * nu * k * k, disc = h * h - (k / eps) * (k / eps);
    std::complex<double> lp = -h + std::sqrt(std::complex<double>(disc)), lm = -h - std::sqrt(std::complex<double>(disc));
    auto E = acoustic_block(k, eps, nu, t);
    EXPECT_NEAR(E[0] + E[3], (std::exp(lp * t) + std::exp(lm * t)).real(), 1e-14);
    EXPECT_NEAR(E[0] * E[3] - E[1] * E[2], std::exp(-nu * k * k * t), 1e-14);
    double prev = 1.0;
    for (int i = 1; i <= 20; ++i) {
        auto F = acoustic_block(k, eps, nu, 0.05 * i);
        double e = F[1] * F[1] + F[3] * F[3];
        EXPECT_LE(e, prev + 1e-15);
        prev = e;
    }
}

TEST(AcousticPropagate, EnergyAndPhase) {
    Grid g = grid_make(1, 32, 2 * oracle::pi, 1.0);
    SpectralField b0(g, 1), v0(g, 1);
    b0.at(0, g.mode_of({3})) = 0.5;
    b0.at(0, g.mode_of({-3})) = 0.5;
    auto [b, v] = acoustic_propagate(b0, v0, 1.0, 0.0, 0.2);
    double e0 = std::pow(l2_norm_parseval(b0), 2), e1 = std::pow(l2_norm_parseval(b), 2) + std::pow(l2_norm_parseval(v), 2);
    EXPECT_NEAR(e1, e0, 1e-13);
    EXPECT_NEAR(b.at(0, g.mode_of({3})).real(), 0.5 * std::cos(0.6), 1e-15);
    auto [b2, v2] = acoustic_propagate(b0, v0, 0.5, 0.0, 0.2);
    EXPECT_NEAR(b2.at(0, g.mode_of({3})).real(), 0.5 * std::cos(1.2), 1e-15);
}

TEST(AcousticPropagate, DuhamelConstantForcing) {
    // Constant forcing F on a single mode: b(t) = int_0^t E(t - s) F ds,
    // computed in closed form through A^{-1}(E(t) - I) F.
    Grid g = grid_make(1, 16, 2 * oracle::pi, 1.0);
    SpectralField F(g, 1), G(g, 1), zero(g, 1);
    F.at(0, g.mode_of({1})) = 1.0;
    F.at(0, g.mode_of({-1})) = 1.0;
    const double eps = 1.0, nu = 0.5, t = 0.8;
    auto [b, v] = acoustic_propagate(zero, zero, eps, nu, t,
                                     [&](double) { return std::make_pair(F, G); }, 4000);
    const double a = 1.0, c = nu;
    auto E = acoustic_block(1.0, eps, nu, t);
    // A^{-1} = [[-c, a], [-a, 0]] / a^2
    const double m0 = E[0] - 1.0, m2 = E[2];
    const double rb = (-c * m0 + a * m2) / (a * a), rv = (-a * m0) / (a * a);
    EXPECT_NEAR(b.at(0, g.mode_of({1})).real(), rb, 1e-7);
    EXPECT_NEAR(v.at(0, g.mode_of({1})).real(), rv, 1e-7);
}

TEST(Director, Renormalization) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    FlowState s = rest_state(g);
    EXPECT_LT(max_abs_coeff(renormalize_director(s.d) - s.d), 1e-14);
    SpectralField big = 1.1 * s.d;
    EXPECT_LT(max_abs_coeff(renormalize_director(big) - s.d), 1e-14);
    SpectralField small = 0.3 * s.d;
    EXPECT_THROW(renormalize_director(small), GuardViolation);
}

TEST(LimitDiagnostics, GradientsAreInvisibleToW) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    FieldSampler rng(10);
    FlowState a = rest_state(g), b = rest_state(g);
    a.u = rng.band_limited(g, 2, 0, 8);
    b.u = a.u;
    auto same = compute_limit_diagnostics(a, a, 0.1);
    EXPECT_EQ(max_abs_coeff(same.dbar), 0.0);
    EXPECT_LT(max_abs_coeff(same.w - leray_p(a.u) + a.u), 1e-15);
    SpectralField f = rng.band_limited(g, 1, 0, 8);
    FlowState c = b;
    c.u = leray_p(b.u);
    FlowState shifted = a;
    shifted.u = c.u + gradient(f);
    auto diag = compute_limit_diagnostics(shifted, c, 0.1);
    EXPECT_LT(max_abs_coeff(diag.w), 1e-14);
    EXPECT_LT(max_abs_coeff(diag.qu - gradient(f)), 1e-13);
    shifted.t = 1.0;
    EXPECT_THROW(compute_limit_diagnostics(shifted, c, 0.1), InvalidArgument);
}

TEST(Rescale, IdentityAndBesovScaling) {
    Grid g = grid_make(2, 64, 2 * oracle::pi, 2.0 / 3.0);
    FieldSampler rng(14);
    FlowState s = rest_state(g);
    s.b = rng.band_limited(g, 1, 1, 12);
    s.u = rng.band_limited(g, 2, 1, 12);
    s.t = 0.5;
    FlowState same = rescale_state(s, 1.0);
    EXPECT_EQ(max_abs_coeff(same.b - s.b), 0.0);
    EXPECT_EQ(same.t, 0.5);
    EXPECT_THROW(rescale_state(s, 0.3), InvalidArgument);

    DyadicPartition lp(g);
    for (int k : {1, 2, 3}) {
        const double eps = std::ldexp(1.0, -k);
        FlowState r = rescale_state(s, eps);
        EXPECT_NEAR(r.t, 0.5 / (eps * eps), 1e-12);
        DyadicPartition lr(r.grid());
        for (double sreg : {0.0, 0.5, 1.0})
            for (double pp : {2.0, 4.0}) {
                // c(x) = eps b(eps x): the norm picks up eps * eps^{s - N/p}.
                double n0 = besov_norm(lp, s.b, {sreg, pp, 1.0});
                double n1 = besov_norm(lr, r.b, {sreg, pp, 1.0});
                double expect = eps * std::pow(eps, sreg - 2.0 / pp);
                EXPECT_NEAR(n1 / n0 / expect, 1.0, 0.05);
            }
    }
}
