#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "critlab/operators.hpp"

namespace critlab {

/// Seeded generator of real band-limited fields. Modes with
/// kmin <= |xi| <= kmax (physical wavenumber, zero mode excluded) receive
/// Gaussian coefficients which are then symmetrized so the field is real.
class FieldSampler {
public:
    explicit FieldSampler(std::uint64_t seed) : rng_(seed) {}

    SpectralField band_limited(const Grid& g, int components, double kmin, double kmax,
                               double spectral_slope = 0.0) {
        SpectralField f(g, components);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int c = 0; c < components; ++c)
            for (std::size_t m = 0; m < g.size(); ++m) {
                double k = g.abs(m);
                double re = normal(rng_), im = normal(rng_);
                if (k == 0.0 || k < kmin || k > kmax || !g.retained(m)) continue;
                double w = spectral_slope == 0.0 ? 1.0 : std::pow(k, spectral_slope);
                f.at(c, m) = w * complex(re, im);
            }
        symmetrize(f);
        return f;
    }

    /// Field supported in the dyadic shell 2^j [3/4, 8/3] (strictly inside).
    SpectralField in_shell(const Grid& g, int components, int j) {
        double lo = std::ldexp(0.75, j), hi = std::ldexp(8.0 / 3.0, j);
        return band_limited(g, components, lo * 1.0001, hi * 0.9999);
    }

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    std::mt19937_64& engine() { return rng_; }

    /// Impose c(-xi) = conj(c(xi)) by averaging each conjugate pair.
    static void symmetrize(SpectralField& f) {
        const Grid& g = f.grid();
        std::vector<int> k(g.dim());
        for (int c = 0; c < f.components(); ++c)
            for (std::size_t m = 0; m < g.size(); ++m) {
                for (int a = 0; a < g.dim(); ++a) k[a] = -g.index(m, a);
                std::size_t mc = g.mode_of(k);
                if (mc < m) continue;
                if (mc == m) {
                    f.at(c, m) = f.at(c, m).real();
                    continue;
                }
                complex avg = 0.5 * (f.at(c, m) + std::conj(f.at(c, mc)));
                f.at(c, m) = avg;
                f.at(c, mc) = std::conj(avg);
            }
    }

private:
    std::mt19937_64 rng_;
};

/// Rescale so that the L^2 norm equals `target` (no-op on the zero field).
inline SpectralField normalized_l2(SpectralField f, double target) {
    double n = l2_norm_parseval(f);
    if (n > 0.0) f *= target / n;
    return f;
}

/// Isotropic Gaussian bump exp(-|x - c|^2 / sigma^2) centred in the box.
inline SpectralField gaussian_bump(const Grid& g, double sigma) {
    const double c = 0.5 * g.box_length();
    PhysicalField p = sample(g, 1, [&](const std::vector<double>& x, int) {
        double r2 = 0.0;
        for (double xa : x) r2 += (xa - c) * (xa - c);
        return std::exp(-r2 / (sigma * sigma));
    });
    return dealias(to_spectral(p));
}

}  // namespace critlab
