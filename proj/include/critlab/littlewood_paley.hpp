#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "critlab/operators.hpp"

namespace critlab {

/// Smooth radial cutoff: 1 on [0, 3/4], 0 on [4/3, inf), exp(-1/t) glue.
inline double lp_chi(double r) {
    constexpr double lo = 0.75, hi = 4.0 / 3.0;
    if (r <= lo) return 1.0;
    if (r >= hi) return 0.0;
    const double t = (r - lo) / (hi - lo);
    const double a = std::exp(-1.0 / (1.0 - t));
    const double b = std::exp(-1.0 / t);
    return a / (a + b);
}

/// phi(r) = chi(r/2) - chi(r); supported in [3/4, 8/3].
inline double lp_phi(double r) { return lp_chi(0.5 * r) - lp_chi(r); }

/// Homogeneous dyadic partition of unity tabulated on a grid.
///
/// Shells j_min..j_max cover every nonzero non-Nyquist mode of the grid
/// (padded by one empty shell on each side), so that the blocks telescope:
/// sum_j Delta_j = Id - (projection on the zero mode).
class DyadicPartition {
public:
    DyadicPartition() = default;

    explicit DyadicPartition(const Grid& g) : grid_(g) {
        double kmin = std::numeric_limits<double>::infinity(), kmax = 0.0;
        double rmin = kmin, rmax = 0.0;
        for (std::size_t m = 0; m < g.size(); ++m) {
            double k = g.abs(m);
            if (k == 0.0 || !non_nyquist(m)) continue;
            kmin = std::min(kmin, k);
            kmax = std::max(kmax, k);
            if (g.retained(m)) {
                rmin = std::min(rmin, k);
                rmax = std::max(rmax, k);
            }
        }
        // chi(2^-j_min k) = 0 needs 2^-j_min kmin >= 4/3;
        // chi(2^-(j_max+1) k) = 1 needs 2^-(j_max+1) kmax <= 3/4.
        int lo = static_cast<int>(std::floor(std::log2(kmin * 0.75)));
        int hi = static_cast<int>(std::ceil(std::log2(kmax * 4.0 / 3.0))) - 1;
        while (std::ldexp(kmin, -lo) < 4.0 / 3.0) --lo;
        while (std::ldexp(kmax, -(hi + 1)) > 0.75) ++hi;
        j_min_ = lo - 1;
        j_max_ = hi + 1;

        int active = 0;
        for (int j = j_min_; j <= j_max_; ++j) {
            bool any = false;
            double a = std::ldexp(0.75, j), b = std::ldexp(8.0 / 3.0, j);
            if (rmax > 0.0 && b > rmin && a < rmax) {
                for (std::size_t m = 0; m < g.size() && !any; ++m)
                    if (g.retained(m) && g.abs(m) > 0.0 && lp_phi(std::ldexp(g.abs(m), -j)) > 0.0) any = true;
            }
            active += any ? 1 : 0;
        }
        if (active < 3) throw InvalidArgument("partition: grid frequency range hosts fewer than 3 shells");

        const int shells = j_max_ - j_min_ + 1;
        phi_.assign(static_cast<std::size_t>(shells), std::vector<double>(g.size(), 0.0));
        chi_.assign(static_cast<std::size_t>(shells + 1), std::vector<double>(g.size(), 0.0));
        for (int j = j_min_; j <= j_max_ + 1; ++j) {
            auto& cj = chi_[static_cast<std::size_t>(j - j_min_)];
            for (std::size_t m = 0; m < g.size(); ++m) cj[m] = lp_chi(std::ldexp(g.abs(m), -j));
        }
        for (int j = j_min_; j <= j_max_; ++j) {
            auto& pj = phi_[static_cast<std::size_t>(j - j_min_)];
            const auto& c0 = chi_[static_cast<std::size_t>(j - j_min_)];
            const auto& c1 = chi_[static_cast<std::size_t>(j + 1 - j_min_)];
            for (std::size_t m = 0; m < g.size(); ++m) pj[m] = g.abs(m) == 0.0 ? 0.0 : c1[m] - c0[m];
        }
    }

    const Grid& grid() const { return grid_; }
    int j_min() const { return j_min_; }
    int j_max() const { return j_max_; }
    int shells() const { return j_max_ - j_min_ + 1; }

    /// phi(2^-j xi) at `mode`; zero outside the shell range.
    double phi(int j, std::size_t mode) const {
        if (j < j_min_ || j > j_max_) return 0.0;
        return phi_[static_cast<std::size_t>(j - j_min_)][mode];
    }
    const std::vector<double>& phi_table(int j) const { return phi_[static_cast<std::size_t>(j - j_min_)]; }

    /// chi(2^-j xi) at `mode`, with the telescoping endpoint values outside
    /// [j_min, j_max + 1].
    double chi(int j, std::size_t mode) const {
        if (j < j_min_) return grid_.abs2(mode) == 0.0 ? 1.0 : 0.0;
        if (j > j_max_ + 1) return 1.0;
        return chi_[static_cast<std::size_t>(j - j_min_)][mode];
    }

    void check_grid(const Grid& g) const {
        if (!(g == grid_)) throw InvalidArgument("partition: grid mismatch");
    }

private:
    bool non_nyquist(std::size_t m) const {
        for (int a = 0; a < grid_.dim(); ++a)
            if (grid_.index(m, a) == -grid_.n() / 2) return false;
        return true;
    }

    Grid grid_;
    int j_min_ = 0;
    int j_max_ = -1;
    std::vector<std::vector<double>> phi_;
    std::vector<std::vector<double>> chi_;
};

inline DyadicPartition build_partition(const Grid& g) { return DyadicPartition(g); }

/// Dyadic block Delta_j f.
inline SpectralField delta_j(const DyadicPartition& lp, const SpectralField& f, int j) {
    lp.check_grid(f.grid());
    SpectralField out(f.grid(), f.components());
    if (j < lp.j_min() || j > lp.j_max()) return out;
    const auto& t = lp.phi_table(j);
    for (int c = 0; c < f.components(); ++c) {
        auto src = f.component(c);
        auto dst = out.component(c);
        for (std::size_t m = 0; m < t.size(); ++m) dst[m] = t[m] * src[m];
    }
    return out;
}

/// Low-frequency cutoff S_j f = chi(2^-j D) f (zero mode included).
inline SpectralField s_j(const DyadicPartition& lp, const SpectralField& f, int j) {
    lp.check_grid(f.grid());
    SpectralField out(f.grid(), f.components());
    const std::size_t modes = f.modes();
    for (int c = 0; c < f.components(); ++c) {
        auto src = f.component(c);
        auto dst = out.component(c);
        for (std::size_t m = 0; m < modes; ++m) dst[m] = lp.chi(j, m) * src[m];
    }
    return out;
}

/// Delta_{q-1} + Delta_q + Delta_{q+1}.
inline SpectralField delta_tilde(const DyadicPartition& lp, const SpectralField& f, int q) {
    SpectralField out = delta_j(lp, f, q - 1);
    out += delta_j(lp, f, q);
    out += delta_j(lp, f, q + 1);
    return out;
}


/// Paraproduct T_f g = sum_q S_{q-1} f Delta_q g. Products are formed in
/// physical space and the result is dealiased. Scalars broadcast against
/// vectors; equal component counts multiply component-wise.
inline SpectralField paraproduct(const DyadicPartition& lp, const SpectralField& f, const SpectralField& g) {
    const int mc = detail::product_components(f, g);
    PhysicalField acc(f.grid(), mc);
    for (int q = lp.j_min(); q <= lp.j_max(); ++q) {
        SpectralField dg = delta_j(lp, g, q);
        if (max_abs_coeff(dg) == 0.0) continue;
        detail::accumulate_product(acc, to_physical(s_j(lp, f, q - 1)), to_physical(dg));
    }
    return to_spectral_dealiased(acc);
}

/// Remainder R(f, g) = sum_q Delta_q f (Delta_{q-1} + Delta_q + Delta_{q+1}) g.
inline SpectralField remainder(const DyadicPartition& lp, const SpectralField& f, const SpectralField& g) {
    const int mc = detail::product_components(f, g);
    PhysicalField acc(f.grid(), mc);
    for (int q = lp.j_min(); q <= lp.j_max(); ++q) {
        SpectralField df = delta_j(lp, f, q);
        if (max_abs_coeff(df) == 0.0) continue;
        detail::accumulate_product(acc, to_physical(df), to_physical(delta_tilde(lp, g, q)));
    }
    return to_spectral_dealiased(acc);
}

/// T_g f + T_f g + R(f, g) + mean(f) mean(g). The homogeneous blocks drop
/// the zero mode, so the product of the means is added back explicitly;
/// the result equals the dealiased product f g.
inline SpectralField bony_sum(const DyadicPartition& lp, const SpectralField& f, const SpectralField& g) {
    SpectralField out = paraproduct(lp, g, f);
    out += paraproduct(lp, f, g);
    out += remainder(lp, f, g);
    const int ca = f.components(), cb = g.components();
    for (int c = 0; c < out.components(); ++c)
        out.at(c, 0) += f.at(ca == 1 ? 0 : c, 0) * g.at(cb == 1 ? 0 : c, 0);
    return out;
}

/// || bony_sum - f g ||_{L2} / || f g ||_{L2}.
inline double bony_residual(const DyadicPartition& lp, const SpectralField& f, const SpectralField& g) {
    SpectralField fg = product(f, g);
    SpectralField diff = bony_sum(lp, f, g);
    diff -= fg;
    double denom = l2_norm_parseval(fg);
    return denom == 0.0 ? l2_norm_parseval(diff) : l2_norm_parseval(diff) / denom;
}

}  // namespace critlab
