#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "critlab/spectral_field.hpp"

namespace critlab {

/// Raised when a run leaves the admissible regime (density positivity,
/// non-finite values, degenerate director).
class GuardViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PressureLaw {
    enum class Kind { Linear, Gamma };
    Kind kind = Kind::Gamma;
    double gamma = 2.0;

    static PressureLaw linear() { return {Kind::Linear, 1.0}; }
    static PressureLaw gamma_law(double g) { return {Kind::Gamma, g}; }

    /// P'(rho); both laws satisfy P'(1) = 1.
    double derivative(double rho) const {
        return kind == Kind::Linear ? 1.0 : std::pow(rho, gamma - 1.0);
    }
};

struct ModelParams {
    double mu = 0.5;
    double lambda = 0.0;
    double xi = 1.0;
    double theta = 0.5;
    double eps = 1.0;
    PressureLaw pressure;

    double nu() const { return lambda + 2.0 * mu; }
    double nu_lower() const { return std::min(mu, lambda + 2.0 * mu); }

    void validate() const {
        if (!(mu > 0.0)) throw InvalidArgument("params: mu must be positive");
        if (!(nu() > 0.0)) throw InvalidArgument("params: lambda + 2 mu must be positive");
        if (!(xi > 0.0)) throw InvalidArgument("params: xi must be positive");
        if (!(theta > 0.0)) throw InvalidArgument("params: theta must be positive");
        if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("params: eps must lie in (0, 1]");
        if (pressure.kind == PressureLaw::Kind::Gamma && !(pressure.gamma > 1.0))
            throw InvalidArgument("params: gamma must exceed 1");
    }
};

/// (b, u, d) at time t. d is the full director (unit length pointwise);
/// its constant equilibrium d_hat sits in the zero mode.
struct FlowState {
    SpectralField b;
    SpectralField u;
    SpectralField d;
    std::vector<double> d_hat;
    double t = 0.0;

    const Grid& grid() const { return b.grid(); }

    FlowState& operator+=(const FlowState& o) {
        b += o.b;
        u += o.u;
        d += o.d;
        return *this;
    }
    FlowState& axpy(double a, const FlowState& o) {
        b.axpy(a, o.b);
        u.axpy(a, o.u);
        d.axpy(a, o.d);
        return *this;
    }
};

/// Default equilibrium: the last coordinate axis.
inline std::vector<double> default_director(int dim) {
    std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
    e.back() = 1.0;
    return e;
}

/// Zero perturbation: b = 0, u = 0, d = d_hat.
inline FlowState rest_state(const Grid& g, std::vector<double> d_hat = {}) {
    if (d_hat.empty()) d_hat = default_director(g.dim());
    if (static_cast<int>(d_hat.size()) != g.dim()) throw InvalidArgument("state: d_hat has wrong dimension");
    FlowState s{SpectralField(g, 1), SpectralField(g, g.dim()), SpectralField(g, g.dim()), d_hat, 0.0};
    for (int a = 0; a < g.dim(); ++a) s.d.at(a, 0) = d_hat[static_cast<std::size_t>(a)];
    return s;
}

/// d - d_hat.
inline SpectralField director_perturbation(const FlowState& s) {
    SpectralField out = s.d;
    for (int a = 0; a < s.grid().dim(); ++a) out.at(a, 0) -= s.d_hat[static_cast<std::size_t>(a)];
    return out;
}

/// max | |d|^2 - 1 | over collocation points.
inline double director_drift(const FlowState& s) {
    PhysicalField d = to_physical(s.d);
    double worst = 0.0;
    for (std::size_t p = 0; p < d.points(); ++p) {
        double n2 = 0.0;
        for (int c = 0; c < d.components(); ++c) n2 += d.at(c, p) * d.at(c, p);
        worst = std::max(worst, std::abs(n2 - 1.0));
    }
    return worst;
}

inline FlowState zeros_like(const FlowState& s) {
    return {zeros_like(s.b), zeros_like(s.u), zeros_like(s.d), s.d_hat, s.t};
}

/// Strichartz exponents for the acoustic estimate.
struct StrichartzExponents {
    double s = 0.0;
    double p = 2.0;
    double r = 2.0;
    double p_bar = 2.0;
    double r_bar = 2.0;

    static double gamma_of(double q, int dim) { return (dim - 1) * (0.5 - (std::isinf(q) ? 0.0 : 1.0 / q)); }

    /// p >= 2, 2/r <= min(1, gamma(p)), excluding (r, p, N) = (2, inf, 3).
    bool admissible(int dim) const {
        if (!(p >= 2.0) || !(r >= 1.0)) return false;
        double lhs = std::isinf(r) ? 0.0 : 2.0 / r;
        if (lhs > std::min(1.0, gamma_of(p, dim)) + 1e-14) return false;
        if (r == 2.0 && std::isinf(p) && dim == 3) return false;
        return true;
    }

    /// Regularity index of the space-time norm: s + N (1/p - 1/2) + 1/r.
    double norm_regularity(int dim) const {
        return s + dim * ((std::isinf(p) ? 0.0 : 1.0 / p) - 0.5) + (std::isinf(r) ? 0.0 : 1.0 / r);
    }

    static double dual(double q) { return std::isinf(q) ? 1.0 : (q == 1.0 ? INFINITY : q / (q - 1.0)); }
};

}  // namespace critlab
