#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "critlab/flow_models.hpp"

namespace critlab {

enum class ModelKind { Compressible, Incompressible };

/// Exact exponential of the constant-coefficient part, tabulated per mode:
/// the viscous acoustic block on (b, Lambda^{-1} div u), heat factors for
/// P u (viscosity mu) and d (diffusion theta).
class LinearPropagator {
public:
    LinearPropagator() = default;

    LinearPropagator(const Grid& g, const ModelParams& prm, double dt, ModelKind model = ModelKind::Compressible)
        : grid_(g), dt_(dt), model_(model) {
        if (!(dt > 0.0)) throw InvalidArgument("propagator: dt must be positive");
        block_.resize(g.size());
        heat_p_.resize(g.size());
        heat_d_.resize(g.size());
        for (std::size_t m = 0; m < g.size(); ++m) {
            const double k2 = g.abs2(m);
            block_[m] = acoustic_block(g.abs(m), prm.eps, prm.nu(), dt);
            heat_p_[m] = std::exp(-prm.mu * k2 * dt);
            heat_d_[m] = std::exp(-prm.theta * k2 * dt);
        }
    }

    double dt() const { return dt_; }
    ModelKind model() const { return model_; }
    const Grid& grid() const { return grid_; }
    const std::array<double, 4>& block(std::size_t mode) const { return block_[mode]; }
    double heat_p(std::size_t mode) const { return heat_p_[mode]; }
    double heat_d(std::size_t mode) const { return heat_d_[mode]; }

    /// In-place application to (b, u, d). Time is not touched.
    void apply(FlowState& s) const {
        const Grid& g = s.grid();
        if (!(g == grid_)) throw InvalidArgument("propagator: grid mismatch");
        const int n = g.dim();
        for (std::size_t m = 0; m < g.size(); ++m) {
            const double k = g.abs(m);
            for (int a = 0; a < n; ++a) s.d.at(a, m) *= heat_d_[m];
            if (k == 0.0) continue;
            complex dot = 0.0;
            for (int a = 0; a < n; ++a) dot += g.xi(m, a) * s.u.at(a, m);
            if (model_ == ModelKind::Incompressible) {
                for (int a = 0; a < n; ++a) s.u.at(a, m) *= heat_p_[m];
                continue;
            }
            // l = i xi.u / |xi|; Q u = -i xi l / |xi|
            const complex l = complex(0.0, 1.0) * dot / k;
            const auto& E = block_[m];
            const complex b = s.b.at(0, m);
            const complex b1 = E[0] * b + E[1] * l;
            const complex l1 = E[2] * b + E[3] * l;
            s.b.at(0, m) = b1;
            for (int a = 0; a < n; ++a) {
                const double ua = g.xi(m, a) / k;
                const complex p = s.u.at(a, m) - ua * dot / k;
                s.u.at(a, m) = heat_p_[m] * p + complex(0.0, -ua) * l1;
            }
        }
    }

private:
    Grid grid_;
    double dt_ = 0.0;
    ModelKind model_ = ModelKind::Compressible;
    std::vector<std::array<double, 4>> block_;
    std::vector<double> heat_p_;
    std::vector<double> heat_d_;
};

inline LinearPropagator build_propagator(const Grid& g, const ModelParams& prm, double dt,
                                         ModelKind model = ModelKind::Compressible) {
    return LinearPropagator(g, prm, dt, model);
}

/// Extra source term S(t) added to the nonlinear tendency.
using Forcing = std::function<FlowState(double)>;

struct StepOptions {
    ModelKind model = ModelKind::Compressible;
    bool nonlinear = true;
    bool renormalize_director = false;
    Forcing forcing;
};

/// Per-step diagnostics collected by `step`.
struct StepReport {
    double divergence = 0.0;  // ||div u||_{L2} seen by the incompressible RHS
};

inline FlowState nonlinear_tendency(const FlowState& s, const ModelParams& prm, const StepOptions& opt,
                                    StepReport* rep) {
    FlowState out;
    if (opt.model == ModelKind::Compressible) {
        out = rhs_compressible(s, prm);
    } else {
        double div = 0.0;
        out = rhs_incompressible(s, prm, &div);
        if (rep) rep->divergence = std::max(rep->divergence, div);
    }
    if (opt.forcing) out += opt.forcing(s.t);
    return out;
}

/// Generator of the linear part applied to s:
///   b: -div u / eps,  u: mu lap u + (mu + lambda) grad div u - grad b / eps,
///   d: theta lap d.
/// The incompressible model keeps only mu lap u and theta lap d.
inline FlowState linear_tendency(const FlowState& s, const ModelParams& prm,
                                 ModelKind model = ModelKind::Compressible) {
    FlowState out = zeros_like(s);
    out.u = laplacian(s.u);
    out.u *= prm.mu;
    out.d = laplacian(s.d);
    out.d *= prm.theta;
    if (model == ModelKind::Compressible) {
        out.u.axpy(prm.mu + prm.lambda, gradient(divergence(s.u)));
        out.u.axpy(-1.0 / prm.eps, gradient(s.b));
        out.b = divergence(s.u);
        out.b *= -1.0 / prm.eps;
    }
    return out;
}

/// One Lawson (integrating-factor Heun) step:
///   k1 = N(y), y* = E(y + dt k1), k2 = N(y*),
///   y' = E(y + dt/2 k1) + dt/2 k2.
inline FlowState step(const FlowState& y, const LinearPropagator& E, const ModelParams& prm,
                      const StepOptions& opt = {}, StepReport* rep = nullptr) {
    if (opt.model != E.model()) throw InvalidArgument("step: propagator built for a different model");
    const double dt = E.dt();
    FlowState out = y;
    if (!opt.nonlinear) {
        E.apply(out);
    } else {
        FlowState k1 = nonlinear_tendency(y, prm, opt, rep);
        FlowState ys = y;
        ys.axpy(dt, k1);
        E.apply(ys);
        ys.t = y.t + dt;
        FlowState k2 = nonlinear_tendency(ys, prm, opt, rep);
        out.axpy(0.5 * dt, k1);
        E.apply(out);
        out.axpy(0.5 * dt, k2);
    }
    if (opt.renormalize_director) out.d = renormalize_director(out.d);
    out.t = y.t + dt;
    return out;
}

struct IntegrationResult {
    Trajectory<FlowState> trajectory;  // empty when snapshots went to a callback
    FlowState final_state;
    long steps = 0;
    bool aborted = false;
    std::string reason;
    std::vector<std::string> warnings;
    double max_divergence = 0.0;
};

using SnapshotSink = std::function<void(const FlowState&)>;

/// Integrate to time T with step dt (the last step is shortened when dt does
/// not divide T). Snapshots are taken at t = 0, every `snapshot_every`
/// steps, and at T; they go to `sink` when given, otherwise into the
/// returned trajectory. A guard violation ends the run with `aborted` set
/// and the snapshots recorded so far.
inline IntegrationResult integrate(const FlowState& s0, double T, double dt, int snapshot_every,
                                   const ModelParams& prm, const StepOptions& opt = {},
                                   const SnapshotSink& sink = {}) {
    if (!(T > 0.0) || !(dt > 0.0) || dt > T * (1.0 + 1e-12))
        throw InvalidArgument("integrate: need T > 0 and 0 < dt <= T");
    if (snapshot_every < 1) throw InvalidArgument("integrate: snapshot_every must be >= 1");
    prm.validate();

    IntegrationResult res;
    auto record = [&](const FlowState& s) {
        if (sink)
            sink(s);
        else
            res.trajectory.push(s.t, s);
    };

    long nsteps = static_cast<long>(std::ceil(T / dt - 1e-9));
    if (nsteps < 1) nsteps = 1;
    const double last_dt = T - (nsteps - 1) * dt;
    LinearPropagator E(s0.grid(), prm, dt, opt.model);
    LinearPropagator E_last;
    const bool short_last = std::abs(last_dt - dt) > 1e-12 * dt;
    if (short_last) E_last = LinearPropagator(s0.grid(), prm, last_dt, opt.model);

    FlowState y = s0;
    record(y);
    StepReport rep;
    try {
        for (long i = 1; i <= nsteps; ++i) {
            const bool last = i == nsteps;
            y = step(y, last && short_last ? E_last : E, prm, opt, &rep);
            if (last) y.t = s0.t + T;
            else y.t = s0.t + i * dt;
            ++res.steps;
            if (last || i % snapshot_every == 0) record(y);
        }
    } catch (const GuardViolation& e) {
        res.aborted = true;
        res.reason = e.what();
    }
    res.max_divergence = rep.divergence;
    if (opt.model == ModelKind::Incompressible && rep.divergence > 1e-10)
        res.warnings.push_back("incompressible run: ||div u|| reached " + std::to_string(rep.divergence));
    res.final_state = std::move(y);
    return res;
}

}  // namespace critlab
