// critlab: command-line front end for the solver, sweeps and harnesses.
//
// Exit codes: 0 success, 1 a check failed (or a run aborted), 2 bad
// arguments, configuration or input file.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "critlab/critlab.hpp"

using namespace critlab;

namespace {

struct Common {
    std::string config;
    std::string out;
    bool plot = false;
    std::optional<std::uint64_t> seed;
};

RunConfig load(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
    if (c.seed) {
        cfg.sweep.data.seed = *c.seed;
        cfg.inequalities.seed = *c.seed;
    }
    return cfg;
}

void print_report(const SweepReport& rep) {
    for (const auto& s : rep.slopes) {
        if (s.analytical_only) {
            std::printf("rate  %-5s %-48s target %s (analytical target only)\n", s.quantity.c_str(), s.norm_spec.c_str(),
                        format_number(s.target).c_str());
            continue;
        }
        std::printf("rate  %-5s %-48s slope %s +- %s target %s%s\n", s.quantity.c_str(), s.norm_spec.c_str(),
                    s.fitted ? format_number(s.fit.slope).c_str() : "-",
                    s.fitted ? format_number(s.fit.stderr_slope).c_str() : "-", format_number(s.target).c_str(),
                    s.flagged ? "  [flagged]" : "");
    }
    for (const auto& r : rep.ratios)
        std::printf("ratio %-20s %-40s [%s, %s]%s\n", r.name.c_str(), r.setting.c_str(), format_number(r.min_ratio).c_str(),
                    format_number(r.max_ratio).c_str(), r.flagged ? "  [flagged]" : "");
    for (const auto& n : rep.notes) std::printf("note  %s\n", n.c_str());
    for (const auto& c : rep.checks) std::printf("%s %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
}

int finish(const Common& c, const SweepReport& rep, const RunConfig& cfg, std::uint64_t seed) {
    print_report(rep);
    if (!c.out.empty())
        for (const auto& f : write_report(c.out, rep, cfg, seed, c.plot)) std::printf("wrote %s\n", f.c_str());
    return rep.passed() ? 0 : 1;
}

double parse_exponent(const std::string& s, const char* what) {
    try {
        return ini::to_double(s);
    } catch (const InvalidArgument&) {
        throw ConfigError(std::string("--") + what + ": not a number: '" + s + "'");
    }
}

int run_solve(const Common& c) {
    RunConfig cfg = load(c);
    const SweepConfig& sc = cfg.sweep;
    ModelParams prm = sc.params;
    prm.validate();
    const Grid g = sc.grid.make();
    DyadicPartition lp(g);
    FlowState s0 = initial_data(g, sc.data);
    const double dt = sweep_dt(g, s0, prm.eps, sc.run.T, sc.run.dt);
    StepOptions opt;
    opt.renormalize_director = sc.run.renormalize_director;
    StateSeries series(lp);
    auto res = integrate(s0, sc.run.T, dt, sc.run.snapshot_every, prm, opt,
                         [&](const FlowState& s) { series.push(lp, s); });

    SweepReport rep;
    rep.kind = "solve";
    SweepPoint pt;
    pt.param = prm.eps;
    pt.aborted = res.aborted;
    pt.reason = res.reason;
    pt.steps = res.steps;
    pt.dt = dt;
    const double s = 0.5 * g.dim();
    pt.initial = initial_quantity(lp, s0, s, prm.nu());
    pt.warnings = res.warnings;
    const std::string spec = "B_nu^" + format_number(s) + "(T)";
    pt.values.push_back({"solution", spec, solution_norm(series.b, series.u, series.d, s, prm.nu(), prm.nu_lower(),
                                                         prm.theta),
                         std::numeric_limits<double>::quiet_NaN()});
    const FlowState& f = res.final_state;
    pt.values.push_back({"b", "L^2 at T", l2_norm_parseval(f.b), std::numeric_limits<double>::quiet_NaN()});
    pt.values.push_back({"u", "L^2 at T", l2_norm_parseval(f.u), std::numeric_limits<double>::quiet_NaN()});
    pt.values.push_back({"d-d_hat", "L^2 at T", l2_norm_parseval(director_perturbation(f)),
                         std::numeric_limits<double>::quiet_NaN()});
    pt.values.push_back({"b", "mean drift", std::abs(mean(f.b) - mean(s0.b)), std::numeric_limits<double>::quiet_NaN()});
    rep.check("run completed", !res.aborted, res.aborted ? res.reason : std::to_string(res.steps) + " steps of " +
                                                                            format_number(dt));
    rep.points.push_back(std::move(pt));
    for (const auto& m : rep.points[0].values)
        std::printf("%-10s %-16s %.17g\n", m.quantity.c_str(), m.norm_spec.c_str(), m.value);
    const int code = finish(c, rep, cfg, sc.data.seed);
    if (!c.out.empty() && !res.aborted) {
        const std::filesystem::path dir(c.out);
        save_field((dir / "b.field").string(), f.b);
        save_field((dir / "u.field").string(), f.u);
        save_field((dir / "d.field").string(), f.d);
        std::printf("wrote %s/{b,u,d}.field\n", c.out.c_str());
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"critlab: low-Mach limit experiments for compressible nematic flows"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--config", common.config, "INI configuration file");
        if (with_out) {
            sub->add_option("--out", common.out, "output directory for reports");
            sub->add_flag("--plot", common.plot, "write SVG log-log rate plots");
        }
        sub->add_option("--seed", common.seed, "override the data seed");
    };

    auto* solve = app.add_subcommand("solve", "integrate one run at params.eps");
    add_common(solve, true);
    auto* limit = app.add_subcommand("limit-sweep", "incompressible-limit sweep over eps");
    add_common(limit, true);
    auto* small = app.add_subcommand("smallness-sweep", "small-data boundedness ladder over eta");
    add_common(small, true);
    auto* ineq = app.add_subcommand("verify-inequalities", "harmonic-analysis inequality harness");
    add_common(ineq, true);
    auto* strich = app.add_subcommand("strichartz-check", "acoustic eps^(1/r) scaling on a large box");
    add_common(strich, true);
    auto* besov = app.add_subcommand("besov-norm", "homogeneous Besov norm of a field file");
    add_common(besov, false);
    std::string field, s_str = "0", p_str = "2", r_str = "1";
    besov->add_option("--field", field, "field file")->required();
    besov->add_option("--s", s_str, "regularity index");
    besov->add_option("--p", p_str, "Lebesgue exponent (inf allowed)");
    besov->add_option("--r", r_str, "summation exponent (inf allowed)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (solve->parsed()) return run_solve(common);
        if (limit->parsed()) {
            RunConfig cfg = load(common);
            return finish(common, limit_sweep(cfg.sweep), cfg, cfg.sweep.data.seed);
        }
        if (small->parsed()) {
            RunConfig cfg = load(common);
            return finish(common, smallness_sweep(cfg.sweep), cfg, cfg.sweep.data.seed);
        }
        if (ineq->parsed()) {
            RunConfig cfg = load(common);
            return finish(common, inequality_harness(cfg.inequalities), cfg, cfg.inequalities.seed);
        }
        if (strich->parsed()) {
            RunConfig cfg = load(common);
            return finish(common, strichartz_check(cfg.strichartz), cfg, cfg.sweep.data.seed);
        }
        if (besov->parsed()) {
            RunConfig cfg = load(common);
            const GridSpec& gs = cfg.sweep.grid;
            SpectralField f = load_field(field, gs.dealias);
            const Grid& g = f.grid();
            if (g.dim() != gs.dim || g.n() != gs.n || g.box_length() != gs.L)
                throw ConfigError(field + ": grid (dim " + std::to_string(g.dim()) + ", n " + std::to_string(g.n()) +
                                  ", L " + format_number(g.box_length()) + ") does not match the configured grid");
            BesovIndex idx{parse_exponent(s_str, "s"), parse_exponent(p_str, "p"), parse_exponent(r_str, "r")};
            DyadicPartition lp(g);
            std::printf("%.17g\n", besov_norm(lp, f, idx));
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
