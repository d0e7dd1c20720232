#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "critlab/littlewood_paley.hpp"
#include "critlab/model.hpp"

namespace critlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct BesovIndex {
    double s = 0.0;
    double p = 2.0;
    double r = 1.0;

    void validate() const {
        if (!(p >= 1.0) || !(r >= 1.0)) throw InvalidArgument("besov index: need p >= 1 and r >= 1");
    }
};

/// l^r norm of a nonnegative sequence.
inline double lr_aggregate(const std::vector<double>& v, double r) {
    if (std::isinf(r)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, x);
        return m;
    }
    if (r == 1.0) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    double s = 0.0;
    for (double x : v) s += std::pow(x, r);
    return std::pow(s, 1.0 / r);
}

/// ||Delta_j f||_{L^p} for every shell j_min..j_max.
inline std::vector<double> shell_norms(const DyadicPartition& lp, const SpectralField& f, double p) {
    lp.check_grid(f.grid());
    std::vector<double> out(static_cast<std::size_t>(lp.shells()), 0.0);
    const double vol = f.grid().volume();
    for (int j = lp.j_min(); j <= lp.j_max(); ++j) {
        const auto& t = lp.phi_table(j);
        if (p == 2.0) {
            double acc = 0.0;
            for (int c = 0; c < f.components(); ++c) {
                auto src = f.component(c);
                for (std::size_t m = 0; m < t.size(); ++m)
                    if (t[m] != 0.0) acc += t[m] * t[m] * std::norm(src[m]);
            }
            out[static_cast<std::size_t>(j - lp.j_min())] = std::sqrt(acc * vol);
        } else {
            SpectralField block = delta_j(lp, f, j);
            if (max_abs_coeff(block) == 0.0) continue;
            out[static_cast<std::size_t>(j - lp.j_min())] = lp_norm(to_physical(block), p);
        }
    }
    return out;
}

/// Shell norms for several exponents at once; each block is transformed
/// once. Result is indexed [exponent][shell].
inline std::vector<std::vector<double>> shell_norms_multi(const DyadicPartition& lp, const SpectralField& f,
                                                         const std::vector<double>& ps) {
    lp.check_grid(f.grid());
    std::vector<std::vector<double>> out(ps.size(), std::vector<double>(static_cast<std::size_t>(lp.shells()), 0.0));
    bool physical = false;
    for (double p : ps) physical = physical || p != 2.0;
    for (std::size_t i = 0; i < ps.size(); ++i)
        if (ps[i] == 2.0) out[i] = shell_norms(lp, f, 2.0);
    if (!physical) return out;
    for (int j = lp.j_min(); j <= lp.j_max(); ++j) {
        SpectralField block = delta_j(lp, f, j);
        if (max_abs_coeff(block) == 0.0) continue;
        PhysicalField phys = to_physical(block);
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (ps[i] != 2.0) out[i][static_cast<std::size_t>(j - lp.j_min())] = lp_norm(phys, ps[i]);
    }
    return out;
}

/// Weighted sequence 2^{js} * a_j.
inline std::vector<double> weighted(const DyadicPartition& lp, const std::vector<double>& a, double s) {
    std::vector<double> w(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) w[i] = std::exp2(s * (lp.j_min() + static_cast<int>(i))) * a[i];
    return w;
}

/// Homogeneous Besov norm ||f||_{B^s_{p,r}} over the partition's shells.
inline double besov_norm(const DyadicPartition& lp, const SpectralField& f, const BesovIndex& idx) {
    idx.validate();
    return lr_aggregate(weighted(lp, shell_norms(lp, f, idx.p), idx.s), idx.r);
}

/// Besov norm from precomputed shell norms (same p).
inline double besov_from_shells(const DyadicPartition& lp, const std::vector<double>& shells, double s, double r) {
    return lr_aggregate(weighted(lp, shells, s), r);
}

/// Hybrid weight max(nu, 2^-j)^{1 - 2/r}.
inline double hybrid_weight(int j, double nu, double r) {
    double e = std::isinf(r) ? 1.0 : 1.0 - 2.0 / r;
    return std::pow(std::max(nu, std::exp2(-j)), e);
}

inline double hybrid_from_shells(const DyadicPartition& lp, const std::vector<double>& l2_shells, double s,
                                 double r, double nu) {
    double acc = 0.0;
    for (std::size_t i = 0; i < l2_shells.size(); ++i) {
        int j = lp.j_min() + static_cast<int>(i);
        acc += std::exp2(j * s) * hybrid_weight(j, nu, r) * l2_shells[i];
    }
    return acc;
}

/// Hybrid Besov norm sum_j 2^{js} max(nu, 2^-j)^{1-2/r} ||Delta_j f||_{L2}.
inline double hybrid_norm(const DyadicPartition& lp, const SpectralField& f, double s, double r, double nu) {
    if (!(nu > 0.0)) throw InvalidArgument("hybrid norm: nu must be positive");
    if (!(r >= 1.0)) throw InvalidArgument("hybrid norm: r must be >= 1");
    return hybrid_from_shells(lp, shell_norms(lp, f, 2.0), s, r, nu);
}

/// Time-ordered snapshots sharing one grid.
template <class State>
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
    void push(double t, State s) {
        if (!times.empty() && !(t > times.back()))
            throw InvalidArgument("trajectory: times must be strictly increasing");
        times.push_back(t);
        states.push_back(std::move(s));
    }
};

/// Shell norms ||Delta_j f(t)||_{L^p} for every snapshot: the raw material of
/// every space-time norm.
struct ShellSeries {
    int j_min = 0;
    double p = 2.0;
    std::vector<double> times;
    std::vector<std::vector<double>> shells;  // [snapshot][shell]

    void push(double t, std::vector<double> s) {
        times.push_back(t);
        shells.push_back(std::move(s));
    }
    std::size_t size() const { return times.size(); }
    std::size_t shell_count() const { return shells.empty() ? 0 : shells.front().size(); }
};

inline ShellSeries shell_series(const DyadicPartition& lp, const Trajectory<SpectralField>& traj, double p) {
    ShellSeries out;
    out.j_min = lp.j_min();
    out.p = p;
    for (std::size_t i = 0; i < traj.size(); ++i) out.push(traj.times[i], shell_norms(lp, traj.states[i], p));
    return out;
}

/// (int_0^T a(t)^rho dt)^{1/rho} by the trapezoidal rule on the snapshot
/// times; rho = inf takes the maximum.
inline double time_norm(const std::vector<double>& times, const std::vector<double>& a, double rho) {
    if (std::isinf(rho)) return a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
    double acc = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        double fa = std::pow(a[i - 1], rho), fb = std::pow(a[i], rho);
        acc += 0.5 * (times[i] - times[i - 1]) * (fa + fb);
    }
    return std::pow(acc, 1.0 / rho);
}

/// Chemin-Lerner norm: time L^rho inside each shell, then weighted l^r.
inline double chemin_lerner(const ShellSeries& series, double rho, double s, double r) {
    if (series.size() < 2) throw InvalidArgument("chemin-lerner: need at least 2 snapshots");
    std::vector<double> per_shell(series.shell_count());
    std::vector<double> a(series.size());
    for (std::size_t k = 0; k < per_shell.size(); ++k) {
        for (std::size_t i = 0; i < series.size(); ++i) a[i] = series.shells[i][k];
        per_shell[k] = std::exp2(s * (series.j_min + static_cast<int>(k))) * time_norm(series.times, a, rho);
    }
    return lr_aggregate(per_shell, r);
}

/// Ordinary Bochner norm L^rho_T(B^s_{p,r}): Besov norm per snapshot, then
/// time L^rho.
inline double lebesgue_besov(const ShellSeries& series, double rho, double s, double r) {
    if (series.size() < 2 && !std::isinf(rho)) throw InvalidArgument("time norm: need at least 2 snapshots");
    std::vector<double> n(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::vector<double> w(series.shells[i].size());
        for (std::size_t k = 0; k < w.size(); ++k)
            w[k] = std::exp2(s * (series.j_min + static_cast<int>(k))) * series.shells[i][k];
        n[i] = lr_aggregate(w, r);
    }
    return time_norm(series.times, n, rho);
}

/// Time L^rho of the hybrid norm (L2 shell series required).
inline double lebesgue_hybrid(const ShellSeries& series, double rho, double s, double r, double nu) {
    std::vector<double> n(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < series.shells[i].size(); ++k) {
            int j = series.j_min + static_cast<int>(k);
            acc += std::exp2(j * s) * hybrid_weight(j, nu, r) * series.shells[i][k];
        }
        n[i] = acc;
    }
    return time_norm(series.times, n, rho);
}

inline double chemin_lerner(const DyadicPartition& lp, const Trajectory<SpectralField>& traj, double rho,
                            const BesovIndex& idx) {
    idx.validate();
    if (traj.size() < 2) throw InvalidArgument("chemin-lerner: need at least 2 snapshots");
    return chemin_lerner(shell_series(lp, traj, idx.p), rho, idx.s, idx.r);
}

inline double lebesgue_besov(const DyadicPartition& lp, const Trajectory<SpectralField>& traj, double rho,
                             const BesovIndex& idx) {
    idx.validate();
    return lebesgue_besov(shell_series(lp, traj, idx.p), rho, idx.s, idx.r);
}

/// Norm of the solution space from L2 shell series of b, u and d - d_hat:
/// L^inf in time of the hybrid norm of b, the B^{s-1} norm of u and the
/// B^s norm of d - d_hat, plus the matching L^1 terms.
inline double solution_norm(const ShellSeries& sb, const ShellSeries& su, const ShellSeries& sd, double s,
                            double nu, double nu_lower, double theta) {
    if (sb.size() == 0) return 0.0;
    double out = lebesgue_hybrid(sb, kInf, s, kInf, nu) + lebesgue_besov(su, kInf, s - 1.0, 1.0) +
                 lebesgue_besov(sd, kInf, s, 1.0);
    if (sb.size() >= 2) {
        out += nu * lebesgue_hybrid(sb, 1.0, s, 1.0, nu) + nu_lower * lebesgue_besov(su, 1.0, s + 1.0, 1.0) +
               theta * lebesgue_besov(sd, 1.0, s + 2.0, 1.0);
    }
    return out;
}

/// Shell series of (b, u, d - d_hat) accumulated one snapshot at a time.
struct StateSeries {
    ShellSeries b, u, d;

    explicit StateSeries(const DyadicPartition& lp) { b.j_min = u.j_min = d.j_min = lp.j_min(); }

    void push(const DyadicPartition& lp, const FlowState& st) { push(lp, st.t, st); }
    void push(const DyadicPartition& lp, double t, const FlowState& st) {
        lp.check_grid(st.grid());
        b.push(t, shell_norms(lp, st.b, 2.0));
        u.push(t, shell_norms(lp, st.u, 2.0));
        d.push(t, shell_norms(lp, director_perturbation(st), 2.0));
    }
};

inline double solution_norm(const DyadicPartition& lp, const Trajectory<FlowState>& traj, double s, double nu,
                            double nu_lower, double theta) {
    StateSeries ser(lp);
    for (std::size_t i = 0; i < traj.size(); ++i) ser.push(lp, traj.times[i], traj.states[i]);
    return solution_norm(ser.b, ser.u, ser.d, s, nu, nu_lower, theta);
}

inline double solution_norm(const DyadicPartition& lp, const Trajectory<FlowState>& traj, double s,
                            const ModelParams& prm) {
    return solution_norm(lp, traj, s, prm.nu(), prm.nu_lower(), prm.theta);
}

/// Initial quantity ||b0||_{hybrid s,inf} + ||u0||_{B^{s-1}_{2,1}} + ||d0 - d_hat||_{B^s_{2,1}}.
inline double initial_quantity(const DyadicPartition& lp, const FlowState& s0, double s, double nu) {
    return hybrid_norm(lp, s0.b, s, kInf, nu) + besov_norm(lp, s0.u, {s - 1.0, 2.0, 1.0}) +
           besov_norm(lp, director_perturbation(s0), {s, 2.0, 1.0});
}

}  // namespace critlab
