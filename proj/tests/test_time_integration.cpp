#include <gtest/gtest.h>

#include <cmath>

#include "critlab/random_fields.hpp"
#include "critlab/time_integration.hpp"
#include "oracles.hpp"

using namespace critlab;

namespace {

ModelParams params(double eps) {
    ModelParams p;
    p.mu = 0.5;
    p.lambda = 0.1;
    p.xi = 1.0;
    p.theta = 0.4;
    p.eps = eps;
    return p;
}

double diff(const FlowState& a, const FlowState& b) {
    return std::max({max_abs_coeff(a.b - b.b), max_abs_coeff(a.u - b.u), max_abs_coeff(a.d - b.d)});
}

FlowState smooth_state(const Grid& g, std::uint64_t seed, double amp) {
    FieldSampler rng(seed);
    FlowState s = rest_state(g);
    s.b = normalized_l2(rng.band_limited(g, 1, 0, 4), amp);
    s.u = normalized_l2(rng.band_limited(g, 2, 0, 4), amp);
    s.d += normalized_l2(rng.band_limited(g, 2, 0, 3), 0.5 * amp);
    s.d = renormalize_director(s.d);
    return s;
}

}  // namespace

TEST(Propagator, IdentityAtTinyStep) {
    Grid g = grid_make(2, 16, 2 * oracle::pi, 2.0 / 3.0);
    LinearPropagator E(g, params(0.5), 1e-14);
    for (std::size_t m = 0; m < g.size(); ++m) {
        if (!g.retained(m)) continue;
        auto B = E.block(m);
        EXPECT_NEAR(B[0], 1.0, 1e-12);
        EXPECT_NEAR(B[1], 0.0, 1e-12);
        EXPECT_NEAR(B[2], 0.0, 1e-12);
        EXPECT_NEAR(B[3], 1.0, 1e-12);
        EXPECT_NEAR(E.heat_p(m), 1.0, 1e-12);
    }
}

TEST(Propagator, SpectralRadiusAtMostOne) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    for (double eps : {1.0, 0.25, 1.0 / 16, 1.0 / 64})
        for (double dt : {1e-3, 0.05, 1.0}) {
            LinearPropagator E(g, params(eps), dt);
            for (std::size_t m = 0; m < g.size(); ++m) {
                auto B = E.block(m);
                const double tr = B[0] + B[3], det = B[0] * B[3] - B[1] * B[2];
                std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4 - det));
                double rho = std::max(std::abs(tr / 2 + disc), std::abs(tr / 2 - disc));
                EXPECT_LE(rho, 1.0 + 1e-14);
            }
        }
}

TEST(Propagator, HeatDecayPerStep) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    FlowState s = rest_state(g);
    const std::size_t m = g.mode_of({2, 1}), mc = g.mode_of({-2, -1});
    s.d.at(0, m) = 1e-3;
    s.d.at(0, mc) = 1e-3;
    ModelParams p = params(1.0);
    const double dt = 0.01;
    LinearPropagator E(g, p, dt);
    StepOptions opt;
    opt.nonlinear = false;
    FlowState y = s;
    for (int i = 1; i <= 50; ++i) {
        y = step(y, E, p, opt);
        EXPECT_NEAR(y.d.at(0, m).real(), 1e-3 * std::exp(-p.theta * 5.0 * dt * i), 1e-17);
    }
    EXPECT_EQ(y.d.at(1, 0).real(), 1.0);
}

TEST(Propagator, InviscidAcousticEnergyOverManySteps) {
    Grid g = grid_make(2, 16, 2 * oracle::pi, 2.0 / 3.0);
    ModelParams p = params(0.25);
    p.mu = 0.0;
    p.lambda = 0.0;
    FieldSampler rng(3);
    FlowState s = rest_state(g);
    s.b = rng.band_limited(g, 1, 0, 5);
    s.u = leray_q(rng.band_limited(g, 2, 0, 5));
    LinearPropagator E(g, p, 0.01);
    auto energy = [](const FlowState& y) {
        return std::pow(l2_norm_parseval(y.b), 2) + std::pow(l2_norm_parseval(y.u), 2);
    };
    const double e0 = energy(s);
    for (int i = 0; i < 10000; ++i) E.apply(s);
    EXPECT_NEAR(energy(s) / e0, 1.0, 1e-10);
}

TEST(Propagator, Semigroup) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    ModelParams p = params(0.125);
    FlowState s = smooth_state(g, 4, 0.3);
    FlowState a = s, b = s;
    LinearPropagator E1(g, p, 0.003), E50(g, p, 0.15);
    for (int i = 0; i < 50; ++i) E1.apply(a);
    E50.apply(b);
    EXPECT_LT(diff(a, b), 1e-11);
}

TEST(Integrate, SnapshotCountAndZeroState) {
    Grid g = grid_make(2, 16, 2 * oracle::pi, 2.0 / 3.0);
    ModelParams p = params(0.5);
    auto r = integrate(rest_state(g), 0.1, 0.01, 1, p);
    EXPECT_EQ(r.trajectory.size(), 11u);
    EXPECT_FALSE(r.aborted);
    EXPECT_NEAR(r.trajectory.times.back(), 0.1, 1e-15);
    FlowState z = rest_state(g);
    EXPECT_EQ(diff(r.final_state, z), 0.0);

    auto r3 = integrate(rest_state(g), 0.1, 0.01, 3, p);
    EXPECT_EQ(r3.trajectory.size(), 5u);  // 0, 3, 6, 9, 10
}

TEST(Integrate, ShortLastStep) {
    Grid g = grid_make(2, 16, 2 * oracle::pi, 2.0 / 3.0);
    ModelParams p = params(0.5);
    FlowState s = rest_state(g);
    s.d.at(0, g.mode_of({1, 0})) = 1e-3;
    s.d.at(0, g.mode_of({-1, 0})) = 1e-3;
    StepOptions opt;
    opt.nonlinear = false;
    auto r = integrate(s, 0.105, 0.01, 100, p, opt);
    EXPECT_EQ(r.steps, 11);
    EXPECT_NEAR(r.final_state.t, 0.105, 1e-15);
    EXPECT_NEAR(r.final_state.d.at(0, g.mode_of({1, 0})).real(), 1e-3 * std::exp(-p.theta * 0.105), 1e-17);
}

TEST(Integrate, RestartConsistency) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    ModelParams p = params(0.25);
    FlowState s = smooth_state(g, 7, 0.2);
    auto full = integrate(s, 0.2, 0.01, 100, p);
    auto half = integrate(s, 0.1, 0.01, 100, p);
    auto rest = integrate(half.final_state, 0.1, 0.01, 100, p);
    EXPECT_LT(diff(full.final_state, rest.final_state), 1e-12);
    EXPECT_NEAR(rest.final_state.t, 0.2, 1e-15);
}

TEST(Integrate, Deterministic) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    ModelParams p = params(0.25);
    FlowState s = smooth_state(g, 9, 0.2);
    auto a = integrate(s, 0.05, 0.01, 1, p);
    auto b = integrate(s, 0.05, 0.01, 1, p);
    EXPECT_EQ(diff(a.final_state, b.final_state), 0.0);
}

TEST(Integrate, SecondOrderInTime) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    ModelParams p = params(0.5);
    FlowState s = smooth_state(g, 12, 0.4);
    const double T = 0.4;
    auto ref = integrate(s, T, 0.4 / 512, 1000, p).final_state;
    std::vector<double> lx, ly;
    for (int n : {8, 16, 32, 64}) {
        auto y = integrate(s, T, T / n, 1000, p).final_state;
        lx.push_back(std::log(T / n));
        ly.push_back(std::log(diff(y, ref)));
    }
    EXPECT_NEAR(oracle::ols_slope(lx, ly), 2.0, 0.2);
}

TEST(Integrate, StableAcrossEpsAtFixedStep) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    for (double eps : {1.0, 0.25, 1.0 / 16}) {
        ModelParams p = params(eps);
        FlowState s = smooth_state(g, 2, 0.3);
        StepOptions opt;
        opt.nonlinear = false;
        auto r = integrate(s, 1.0, 0.05, 100, p, opt);
        EXPECT_LE(l2_norm_parseval(r.final_state.b) + l2_norm_parseval(r.final_state.u),
                  l2_norm_parseval(s.b) + l2_norm_parseval(s.u) + 1e-12);
    }
}

TEST(Integrate, IncompressibleKeepsDivergenceFree) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    ModelParams p = params(1.0);
    FlowState s = smooth_state(g, 5, 0.3);
    s.b = SpectralField(g, 1);
    s.u = leray_p(s.u);
    StepOptions opt;
    opt.model = ModelKind::Incompressible;
    auto r = integrate(s, 0.2, 0.01, 5, p, opt);
    for (const auto& st : r.trajectory.states) EXPECT_LT(l2_norm_parseval(divergence(st.u)), 1e-12);
    EXPECT_TRUE(r.warnings.empty());
    FlowState bad = s;
    bad.u = s.u + gradient(normalized_l2(FieldSampler(1).band_limited(g, 1, 1, 3), 0.1));
    auto rb = integrate(bad, 0.02, 0.01, 5, p, opt);
    EXPECT_FALSE(rb.warnings.empty());
}

TEST(Integrate, MassConservation) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    ModelParams p = params(0.5);
    FlowState s = smooth_state(g, 6, 0.3);
    s.b.at(0, 0) = 0.05;
    FlowState y = s;
    LinearPropagator E(g, p, 0.01);
    for (int i = 0; i < 20; ++i) {
        FlowState next = step(y, E, p);
        EXPECT_LE(std::abs(mean(next.b) - mean(y.b)), 1e-12);
        y = next;
    }
}

TEST(Integrate, GuardAbortKeepsPartialTrajectory) {
    Grid g = grid_make(2, 32, 2 * oracle::pi, 2.0 / 3.0);
    ModelParams p = params(1.0);
    FlowState s = rest_state(g);
    s.b = to_spectral(sample(g, 1, [](auto& x, int) { return 0.85 * std::cos(x[0]); }));
    s.u = to_spectral(sample(g, 2, [](auto& x, int c) { return c == 0 ? -3.0 * std::sin(x[0]) : 0.0; }));
    auto r = integrate(s, 2.0, 0.01, 1, p);
    EXPECT_TRUE(r.aborted);
    EXPECT_NE(r.reason.find("positivity"), std::string::npos);
    EXPECT_GE(r.trajectory.size(), 1u);
    EXPECT_LT(r.trajectory.times.back(), 2.0);
}

TEST(Integrate, RejectsBadArguments) {
    Grid g = grid_make(2, 16, 2 * oracle::pi, 2.0 / 3.0);
    ModelParams p = params(1.0);
    EXPECT_THROW(integrate(rest_state(g), 0.1, 0.2, 1, p), InvalidArgument);
    EXPECT_THROW(integrate(rest_state(g), 0.1, 0.01, 0, p), InvalidArgument);
    EXPECT_THROW(integrate(rest_state(g), -1.0, 0.01, 1, p), InvalidArgument);
}
