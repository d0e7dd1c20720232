#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "critlab/experiments.hpp"
#include "json.hpp"

namespace critlab {

inline constexpr const char* kCodeVersion = "critlab 0.1.0";
inline constexpr int kReportSchema = 1;

/// Malformed configuration or input file. Messages carry "file:line:".
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Run configuration: flat INI sections, key = value, '#' or ';' comments.

struct RunConfig {
    SweepConfig sweep;
    StrichartzConfig strichartz;
    InequalityConfig inequalities;

    void validate() const {
        sweep.validate();
        strichartz.validate();
        inequalities.validate();
    }
};

namespace ini {

inline std::string num(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

inline double to_double(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw InvalidArgument("expected a number");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (*end != '\0' || std::isnan(v)) throw InvalidArgument("not a number: '" + t + "'");
    return v;
}

inline long to_long(const std::string& s) {
    const std::string t = trim(s);
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || *end != '\0') throw InvalidArgument("not an integer: '" + t + "'");
    return v;
}

inline bool to_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw InvalidArgument("not a boolean: '" + s + "'");
}

inline std::vector<double> to_doubles(const std::string& s) {
    std::vector<double> v;
    for (const auto& x : split(s, ',')) v.push_back(to_double(x));
    return v;
}

inline std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
    return out;
}

/// "a:b, c:d" pairs.
inline std::vector<std::pair<std::string, std::string>> to_pairs(const std::string& s) {
    std::vector<std::pair<std::string, std::string>> out;
    if (trim(s).empty()) return out;
    for (const auto& item : split(s, ',')) {
        auto kv = split(item, ':');
        if (kv.size() != 2) throw InvalidArgument("expected name:value pairs, got '" + item + "'");
        out.emplace_back(kv[0], kv[1]);
    }
    return out;
}

/// ":line" of the key a validation message "section: ... key ..." names,
/// else of the section header, else empty.
inline std::string anchor(const std::map<std::string, int>& lines, const std::string& msg) {
    const auto colon = msg.find(':');
    if (colon == std::string::npos) return "";
    const std::string section = msg.substr(0, colon), rest = msg.substr(colon + 1);
    std::size_t best = std::string::npos;
    int line = 0;
    for (const auto& [name, ln] : lines) {
        if (name.rfind(section + ".", 0) != 0) continue;
        const std::string key = name.substr(section.size() + 1);
        for (std::size_t at = rest.find(key); at != std::string::npos; at = rest.find(key, at + 1)) {
            auto word = [&](std::size_t i) { return std::isalnum(static_cast<unsigned char>(rest[i])) || rest[i] == '_'; };
            const bool left = at == 0 || !word(at - 1);
            const bool right = at + key.size() >= rest.size() || !word(at + key.size());
            if (left && right) {
                if (at < best) {
                    best = at;
                    line = ln;
                }
                break;
            }
        }
    }
    if (!line) {
        auto it = lines.find(section);
        if (it != lines.end()) line = it->second;
    }
    return line ? ":" + std::to_string(line) : "";
}

}  // namespace ini

inline std::string serialize(const RunConfig& c) {
    using ini::num;
    const auto& sc = c.sweep;
    std::ostringstream o;
    o << "[grid]\n"
      << "dim = " << sc.grid.dim << "\n"
      << "n = " << sc.grid.n << "\n"
      << "L = " << num(sc.grid.L) << "\n"
      << "dealias = " << num(sc.grid.dealias) << "\n\n";
    o << "[params]\n"
      << "mu = " << num(sc.params.mu) << "\n"
      << "lambda = " << num(sc.params.lambda) << "\n"
      << "xi = " << num(sc.params.xi) << "\n"
      << "theta = " << num(sc.params.theta) << "\n"
      << "pressure = " << (sc.params.pressure.kind == PressureLaw::Kind::Linear ? "linear" : "gamma") << "\n"
      << "gamma = " << num(sc.params.pressure.gamma) << "\n"
      << "eps = " << num(sc.params.eps) << "\n\n";
    o << "[run]\n"
      << "dt = " << num(sc.run.dt) << "\n"
      << "T = " << num(sc.run.T) << "\n"
      << "snapshot_every = " << sc.run.snapshot_every << "\n"
      << "renormalize_director = " << (sc.run.renormalize_director ? "true" : "false") << "\n\n";
    o << "[data]\n"
      << "family = " << family_name(sc.data.family) << "\n"
      << "amplitude = " << num(sc.data.amplitude) << "\n"
      << "seed = " << sc.data.seed << "\n"
      << "kmax = " << num(sc.data.kmax) << "\n\n";
    std::string menu;
    for (std::size_t i = 0; i < sc.sweep.norm_menu.size(); ++i)
        menu += (i ? ", " : "") + std::string(quantity_name(sc.sweep.norm_menu[i].first)) + ":" +
                num(sc.sweep.norm_menu[i].second);
    o << "[sweep]\n"
      << "eps_list = " << ini::join(sc.sweep.eps_list) << "\n"
      << "norm_menu = " << menu << "\n"
      << "slope_tolerance = " << num(sc.sweep.slope_tolerance) << "\n"
      << "monotone_slack = " << num(sc.sweep.monotone_slack) << "\n"
      << "reduction_factor = " << num(sc.sweep.reduction_factor) << "\n"
      << "eta_list = " << ini::join(sc.sweep.eta_list) << "\n"
      << "eta_large = " << num(sc.sweep.eta_large) << "\n"
      << "gamma_stability = " << num(sc.sweep.gamma_stability) << "\n"
      << "threads = " << sc.sweep.threads << "\n\n";
    const auto& st = c.strichartz;
    std::string pr;
    for (std::size_t i = 0; i < st.pr.size(); ++i)
        pr += (i ? ", " : "") + num(st.pr[i].first) + ":" + num(st.pr[i].second);
    o << "[strichartz]\n"
      << "dim = " << st.dim << "\n"
      << "n = " << st.n << "\n"
      << "L = " << num(st.L) << "\n"
      << "sigma = " << num(st.sigma) << "\n"
      << "kappa = " << num(st.kappa) << "\n"
      << "s = " << num(st.s) << "\n"
      << "nu = " << num(st.nu) << "\n"
      << "eps_list = " << ini::join(st.eps_list) << "\n"
      << "pr = " << pr << "\n"
      << "time_samples = " << st.time_samples << "\n"
      << "tolerance = " << num(st.tolerance) << "\n"
      << "wrap_threshold = " << num(st.wrap_threshold) << "\n"
      << "companions = " << (st.companions ? "true" : "false") << "\n\n";
    const auto& iq = c.inequalities;
    std::vector<double> grids(iq.grids.begin(), iq.grids.end());
    o << "[inequalities]\n"
      << "dim = " << iq.dim << "\n"
      << "grids = " << ini::join(grids) << "\n"
      << "L = " << num(iq.L) << "\n"
      << "samples = " << iq.samples << "\n"
      << "seed = " << iq.seed << "\n"
      << "bernstein_lo = " << num(iq.bernstein_lo) << "\n"
      << "bernstein_hi = " << num(iq.bernstein_hi) << "\n"
      << "gamma_pressure = " << num(iq.gamma_pressure) << "\n";
    return o.str();
}

/// Parse INI text. `origin` names the source in error messages. Sections
/// and keys not listed above are rejected; omitted keys keep defaults. The
/// result is validated before returning.
inline RunConfig parse_config(const std::string& text, const std::string& origin = "<config>") {
    using namespace ini;
    RunConfig c;
    auto& sc = c.sweep;
    auto& st = c.strichartz;
    auto& iq = c.inequalities;

    using Setter = std::function<void(const std::string&)>;
    auto as_int = [](int& dst) { return Setter([&dst](const std::string& v) { dst = static_cast<int>(to_long(v)); }); };
    auto as_dbl = [](double& dst) { return Setter([&dst](const std::string& v) { dst = to_double(v); }); };
    auto as_u64 = [](std::uint64_t& dst) {
        return Setter([&dst](const std::string& v) {
            const long x = to_long(v);
            if (x < 0) throw InvalidArgument("seed must be >= 0");
            dst = static_cast<std::uint64_t>(x);
        });
    };
    auto as_bool = [](bool& dst) { return Setter([&dst](const std::string& v) { dst = to_bool(v); }); };
    auto as_list = [](std::vector<double>& dst) { return Setter([&dst](const std::string& v) { dst = to_doubles(v); }); };

    std::map<std::string, std::map<std::string, Setter>> table;
    table["grid"] = {{"dim", as_int(sc.grid.dim)},
                     {"n", as_int(sc.grid.n)},
                     {"L", as_dbl(sc.grid.L)},
                     {"dealias", as_dbl(sc.grid.dealias)}};
    table["params"] = {{"mu", as_dbl(sc.params.mu)},
                       {"lambda", as_dbl(sc.params.lambda)},
                       {"xi", as_dbl(sc.params.xi)},
                       {"theta", as_dbl(sc.params.theta)},
                       {"gamma", as_dbl(sc.params.pressure.gamma)},
                       {"eps", as_dbl(sc.params.eps)},
                       {"pressure", [&](const std::string& v) {
                            if (v == "linear") sc.params.pressure.kind = PressureLaw::Kind::Linear;
                            else if (v == "gamma") sc.params.pressure.kind = PressureLaw::Kind::Gamma;
                            else throw InvalidArgument("pressure must be 'gamma' or 'linear'");
                        }}};
    table["run"] = {{"dt", as_dbl(sc.run.dt)},
                    {"T", as_dbl(sc.run.T)},
                    {"snapshot_every", as_int(sc.run.snapshot_every)},
                    {"renormalize_director", as_bool(sc.run.renormalize_director)}};
    table["data"] = {{"amplitude", as_dbl(sc.data.amplitude)},
                     {"seed", as_u64(sc.data.seed)},
                     {"kmax", as_dbl(sc.data.kmax)},
                     {"family", [&](const std::string& v) {
                          if (v == "well_prepared") sc.data.family = DataFamily::WellPrepared;
                          else if (v == "ill_prepared") sc.data.family = DataFamily::IllPrepared;
                          else throw InvalidArgument("family must be 'well_prepared' or 'ill_prepared'");
                      }}};
    table["sweep"] = {{"eps_list", as_list(sc.sweep.eps_list)},
                      {"slope_tolerance", as_dbl(sc.sweep.slope_tolerance)},
                      {"monotone_slack", as_dbl(sc.sweep.monotone_slack)},
                      {"reduction_factor", as_dbl(sc.sweep.reduction_factor)},
                      {"eta_list", as_list(sc.sweep.eta_list)},
                      {"eta_large", as_dbl(sc.sweep.eta_large)},
                      {"gamma_stability", as_dbl(sc.sweep.gamma_stability)},
                      {"threads", as_int(sc.sweep.threads)},
                      {"norm_menu", [&](const std::string& v) {
                           sc.sweep.norm_menu.clear();
                           for (const auto& [q, p] : to_pairs(v))
                               sc.sweep.norm_menu.emplace_back(quantity_from_name(q), to_double(p));
                       }}};
    table["strichartz"] = {{"dim", as_int(st.dim)},
                           {"n", as_int(st.n)},
                           {"L", as_dbl(st.L)},
                           {"sigma", as_dbl(st.sigma)},
                           {"kappa", as_dbl(st.kappa)},
                           {"s", as_dbl(st.s)},
                           {"nu", as_dbl(st.nu)},
                           {"eps_list", as_list(st.eps_list)},
                           {"time_samples", as_int(st.time_samples)},
                           {"tolerance", as_dbl(st.tolerance)},
                           {"wrap_threshold", as_dbl(st.wrap_threshold)},
                           {"companions", as_bool(st.companions)},
                           {"pr", [&](const std::string& v) {
                                st.pr.clear();
                                for (const auto& [p, r] : to_pairs(v)) st.pr.emplace_back(to_double(p), to_double(r));
                            }}};
    table["inequalities"] = {{"dim", as_int(iq.dim)},
                             {"L", as_dbl(iq.L)},
                             {"samples", as_int(iq.samples)},
                             {"seed", as_u64(iq.seed)},
                             {"bernstein_lo", as_dbl(iq.bernstein_lo)},
                             {"bernstein_hi", as_dbl(iq.bernstein_hi)},
                             {"gamma_pressure", as_dbl(iq.gamma_pressure)},
                             {"grids", [&](const std::string& v) {
                                  iq.grids.clear();
                                  for (const auto& x : split(v, ',')) iq.grids.push_back(static_cast<int>(to_long(x)));
                              }}};

    std::istringstream in(text);
    std::string line, section;
    std::map<std::string, int> seen;  // "section.key" and "section" -> line
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        const auto hash = line.find_first_of("#;");
        const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(where + "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (!table.count(section)) throw ConfigError(where + "unknown section [" + section + "]");
            seen.emplace(section, lineno);
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        if (section.empty()) throw ConfigError(where + "key outside of any section");
        const std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
        auto& keys = table[section];
        auto it = keys.find(key);
        if (it == keys.end()) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
        if (!seen.emplace(section + "." + key, lineno).second)
            throw ConfigError(where + "duplicate key '" + key + "' in [" + section + "]");
        try {
            it->second(value);
        } catch (const InvalidArgument& e) {
            throw ConfigError(where + section + "." + key + ": " + e.what());
        }
    }
    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(origin + anchor(seen, e.what()) + ": " + e.what());
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

/// 64-bit FNV-1a, hex.
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Binary field files: "CLFD", u32 version, u32 dim, u32 n, f64 L, u32 m
// (components), then m * n^dim (re, im) f64 pairs, component-major, modes in
// row-major FFT index order. Everything little-endian.

inline constexpr std::array<char, 4> kFieldMagic = {'C', 'L', 'F', 'D'};
inline constexpr std::uint32_t kFieldVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& o, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    o.write(reinterpret_cast<const char*>(b.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in, const std::string& what) {
    std::array<unsigned char, sizeof(T)> b;
    if (!in.read(reinterpret_cast<char*>(b.data()), sizeof(T))) throw ConfigError(what + ": truncated field file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    T v;
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
}

}  // namespace detail

inline void write_field(std::ostream& o, const SpectralField& f) {
    const Grid& g = f.grid();
    o.write(kFieldMagic.data(), 4);
    detail::put_le<std::uint32_t>(o, kFieldVersion);
    detail::put_le<std::uint32_t>(o, static_cast<std::uint32_t>(g.dim()));
    detail::put_le<std::uint32_t>(o, static_cast<std::uint32_t>(g.n()));
    detail::put_le<double>(o, g.box_length());
    detail::put_le<std::uint32_t>(o, static_cast<std::uint32_t>(f.components()));
    for (const complex& z : f.data()) {
        detail::put_le<double>(o, z.real());
        detail::put_le<double>(o, z.imag());
    }
}

/// Read a field; the grid is rebuilt with `dealias_fraction`.
inline SpectralField read_field(std::istream& in, const std::string& what = "<field>",
                                double dealias_fraction = 2.0 / 3.0) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), 4)) throw ConfigError(what + ": truncated field file");
    if (magic != kFieldMagic) throw ConfigError(what + ": not a field file (bad magic)");
    const auto version = detail::get_le<std::uint32_t>(in, what);
    if (version != kFieldVersion)
        throw ConfigError(what + ": unsupported field format version " + std::to_string(version) + " (expected " +
                          std::to_string(kFieldVersion) + ")");
    const auto dim = detail::get_le<std::uint32_t>(in, what);
    const auto n = detail::get_le<std::uint32_t>(in, what);
    const auto L = detail::get_le<double>(in, what);
    const auto m = detail::get_le<std::uint32_t>(in, what);
    if (dim < 1 || dim > 3 || m < 1 || m > 16) throw ConfigError(what + ": implausible header");
    Grid g;
    try {
        g = grid_make(static_cast<int>(dim), static_cast<int>(n), L, dealias_fraction);
    } catch (const InvalidArgument& e) {
        throw ConfigError(what + ": " + e.what());
    }
    SpectralField f(g, static_cast<int>(m));
    for (complex& z : f.data()) {
        const double re = detail::get_le<double>(in, what);
        const double im = detail::get_le<double>(in, what);
        z = complex(re, im);
    }
    return f;
}

inline void save_field(const std::string& path, const SpectralField& f) {
    std::ofstream o(path, std::ios::binary);
    if (!o) throw ConfigError(path + ": cannot write");
    write_field(o, f);
}

inline SpectralField load_field(const std::string& path, double dealias_fraction = 2.0 / 3.0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open");
    return read_field(in, path, dealias_fraction);
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

/// Finite doubles as numbers, everything else as null.
inline nlohmann::json jnum(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace detail

/// JSON report: schema version, config echo (text and hash), seed, points,
/// fits, ratio rows, checks. No timestamps, so equal inputs give equal bytes.
inline nlohmann::json report_json(const SweepReport& rep, const RunConfig& cfg, std::uint64_t seed) {
    using nlohmann::json;
    using detail::jnum;
    const std::string text = serialize(cfg);
    json j;
    j["schema_version"] = kReportSchema;
    j["kind"] = rep.kind;
    j["passed"] = rep.passed();
    j["seed"] = seed;
    j["config"] = text;
    j["provenance"] = {{"code_version", kCodeVersion}, {"config_fnv1a", fnv1a_hex(text)}};
    j["param_name"] = rep.param_name;
    json pts = json::array();
    for (const auto& p : rep.points) {
        json vals = json::array();
        for (const auto& m : p.values)
            vals.push_back({{"quantity", m.quantity}, {"norm_spec", m.norm_spec}, {"value", jnum(m.value)},
                            {"target_exponent", jnum(m.target)}});
        pts.push_back({{"param", jnum(p.param)},
                       {"aborted", p.aborted},
                       {"valid", p.valid},
                       {"reason", p.reason},
                       {"steps", p.steps},
                       {"dt", jnum(p.dt)},
                       {"initial", jnum(p.initial)},
                       {"values", vals},
                       {"warnings", p.warnings}});
    }
    j["points"] = pts;
    json sl = json::array();
    for (const auto& s : rep.slopes)
        sl.push_back({{"quantity", s.quantity},
                      {"norm_spec", s.norm_spec},
                      {"target_exponent", jnum(s.target)},
                      {"fitted", s.fitted},
                      {"slope", s.fitted ? jnum(s.fit.slope) : json(nullptr)},
                      {"stderr", s.fitted ? jnum(s.fit.stderr_slope) : json(nullptr)},
                      {"residual", s.fitted ? jnum(s.fit.residual) : json(nullptr)},
                      {"samples", s.fit.samples},
                      {"within_tolerance", s.within_tolerance},
                      {"flagged", s.flagged},
                      {"analytical_only", s.analytical_only},
                      {"note", s.note}});
    j["rates"] = sl;
    json ra = json::array();
    for (const auto& r : rep.ratios)
        ra.push_back({{"name", r.name},
                      {"setting", r.setting},
                      {"samples", r.samples},
                      {"min_ratio", jnum(r.min_ratio)},
                      {"max_ratio", jnum(r.max_ratio)},
                      {"bound", jnum(r.bound)},
                      {"flagged", r.flagged},
                      {"note", r.note}});
    j["ratios"] = ra;
    json ch = json::array();
    for (const auto& c : rep.checks) ch.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    j["checks"] = ch;
    j["notes"] = rep.notes;
    return j;
}

namespace detail {

inline std::string sci(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", x);
    return buf;
}

inline std::string csv_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

}  // namespace detail

/// One row per (param, quantity, norm): eps, quantity, norm_spec, value,
/// target_exponent, fitted_slope, stderr. The first column is named after
/// the swept parameter.
inline std::string report_csv(const SweepReport& rep) {
    using detail::csv_text;
    using detail::sci;
    std::string out = rep.param_name + ",quantity,norm_spec,value,target_exponent,fitted_slope,stderr\n";
    for (const auto& p : rep.points)
        for (const auto& m : p.values) {
            double slope = std::numeric_limits<double>::quiet_NaN(), se = slope;
            for (const auto& s : rep.slopes)
                if (s.quantity == m.quantity && s.norm_spec == m.norm_spec && s.fitted) {
                    slope = s.fit.slope;
                    se = s.fit.stderr_slope;
                }
            out += sci(p.param) + "," + csv_text(m.quantity) + "," + csv_text(m.norm_spec) + "," + sci(m.value) + "," +
                   sci(m.target) + "," + sci(slope) + "," + sci(se) + "\n";
        }
    return out;
}

/// Ratio rows of the inequality and a priori harnesses.
inline std::string ratios_csv(const SweepReport& rep) {
    using detail::csv_text;
    using detail::sci;
    std::string out = "name,setting,samples,min_ratio,max_ratio,bound,flagged\n";
    for (const auto& r : rep.ratios)
        out += csv_text(r.name) + "," + csv_text(r.setting) + "," + std::to_string(r.samples) + "," + sci(r.min_ratio) +
               "," + sci(r.max_ratio) + "," + sci(r.bound) + "," + (r.flagged ? "1" : "0") + "\n";
    return out;
}

/// Log-log rate plot for one fitted norm: measured points, fitted line,
/// and a guide of the target slope through the geometric mean of the data.
inline std::string rate_plot_svg(const SweepReport& rep, const SlopeResult& s) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : rep.points) {
        if (p.aborted || !p.valid) continue;
        for (const auto& m : p.values)
            if (m.quantity == s.quantity && m.norm_spec == s.norm_spec && m.value > 0.0)
                pts.emplace_back(std::log10(p.param), std::log10(m.value));
    }
    const double W = 560, H = 400, ml = 70, mr = 20, mt = 40, mb = 50;
    auto esc = [](const std::string& t) {
        std::string o;
        for (char ch : t) {
            if (ch == '<') o += "&lt;";
            else if (ch == '>') o += "&gt;";
            else if (ch == '&') o += "&amp;";
            else o += ch;
        }
        return o;
    };
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << ml << "\" y=\"20\" font-size=\"13\" font-family=\"sans-serif\">" << esc(s.quantity) << " "
      << esc(s.norm_spec) << "</text>\n";
    if (pts.size() < 2) {
        o << "<text x=\"" << ml << "\" y=\"60\" font-size=\"12\">not enough points</text>\n</svg>\n";
        return o.str();
    }
    double x0 = pts[0].first, x1 = x0, y0 = pts[0].second, y1 = y0;
    for (auto [x, y] : pts) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    double mx = 0, my = 0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= pts.size();
    my /= pts.size();
    auto line_y = [&](double slope, double icpt, double x) { return icpt + slope * x; };
    const double fit_icpt = s.fit.intercept / std::log(10.0);
    const bool has_target = std::isfinite(s.target);
    for (double x : {x0, x1}) {
        if (s.fitted) {
            y0 = std::min(y0, line_y(s.fit.slope, fit_icpt, x));
            y1 = std::max(y1, line_y(s.fit.slope, fit_icpt, x));
        }
        if (has_target) {
            y0 = std::min(y0, my + s.target * (x - mx));
            y1 = std::max(y1, my + s.target * (x - mx));
        }
    }
    x0 = std::floor(x0 * 10) / 10 - 0.05;
    x1 = std::ceil(x1 * 10) / 10 + 0.05;
    if (y1 - y0 < 0.1) {
        y0 -= 0.05;
        y1 += 0.05;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto X = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto Y = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
    o << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
      << "\" height=\"" << H - mt - mb << "\"/></g>\n";
    o << "<g font-size=\"11\" font-family=\"sans-serif\" stroke=\"#ccc\">\n";
    for (int d = static_cast<int>(std::ceil(x0)); d <= std::floor(x1); ++d)
        o << "<line x1=\"" << X(d) << "\" y1=\"" << mt << "\" x2=\"" << X(d) << "\" y2=\"" << H - mb << "\"/>"
          << "<text stroke=\"none\" x=\"" << X(d) - 12 << "\" y=\"" << H - mb + 16 << "\">1e" << d << "</text>\n";
    for (int d = static_cast<int>(std::ceil(y0)); d <= std::floor(y1); ++d)
        o << "<line x1=\"" << ml << "\" y1=\"" << Y(d) << "\" x2=\"" << W - mr << "\" y2=\"" << Y(d) << "\"/>"
          << "<text stroke=\"none\" x=\"" << ml - 40 << "\" y=\"" << Y(d) + 4 << "\">1e" << d << "</text>\n";
    o << "</g>\n";
    o << "<text x=\"" << (W + ml) / 2 - 10 << "\" y=\"" << H - 12 << "\" font-size=\"12\">" << esc(rep.param_name)
      << "</text>\n";
    if (has_target)
        o << "<line stroke=\"#888\" stroke-dasharray=\"6,4\" x1=\"" << X(x0) << "\" y1=\"" << Y(my + s.target * (x0 - mx))
          << "\" x2=\"" << X(x1) << "\" y2=\"" << Y(my + s.target * (x1 - mx)) << "\"/>\n";
    if (s.fitted)
        o << "<line stroke=\"#c33\" x1=\"" << X(x0) << "\" y1=\"" << Y(line_y(s.fit.slope, fit_icpt, x0)) << "\" x2=\""
          << X(x1) << "\" y2=\"" << Y(line_y(s.fit.slope, fit_icpt, x1)) << "\"/>\n";
    o << "<polyline fill=\"none\" stroke=\"#36c\" points=\"";
    for (auto [x, y] : pts) o << X(x) << "," << Y(y) << " ";
    o << "\"/>\n";
    for (auto [x, y] : pts) o << "<circle fill=\"#36c\" r=\"3\" cx=\"" << X(x) << "\" cy=\"" << Y(y) << "\"/>\n";
    o << "<text x=\"" << W - mr - 190 << "\" y=\"" << mt + 16 << "\" font-size=\"11\">fitted " << format_number(s.fit.slope)
      << (has_target ? ", target " + format_number(s.target) : std::string()) << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError(p.string() + ": cannot write");
    f << text;
}

/// report.json, report.csv (when there are points), ratios.csv (when there
/// are ratio rows) and, with `plots`, one SVG per fitted norm.
inline std::vector<std::string> write_report(const std::filesystem::path& dir, const SweepReport& rep,
                                             const RunConfig& cfg, std::uint64_t seed, bool plots) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    auto emit = [&](const std::string& name, const std::string& text) {
        write_text(dir / name, text);
        files.push_back((dir / name).string());
    };
    emit("report.json", report_json(rep, cfg, seed).dump(2) + "\n");
    if (!rep.points.empty()) emit("report.csv", report_csv(rep));
    if (!rep.ratios.empty()) emit("ratios.csv", ratios_csv(rep));
    if (plots) {
        int k = 0;
        for (const auto& s : rep.slopes) {
            if (!s.fitted) continue;
            std::string name = "rate_" + std::to_string(k++) + "_" + s.quantity + ".svg";
            emit(name, rate_plot_svg(rep, s));
        }
    }
    return files;
}

}  // namespace critlab
