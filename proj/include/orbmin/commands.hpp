#pragma once

// Command implementations behind the orbmin executable: parameter sweeps for
// the Kepler problem, the figure-eight study, and config-driven classification.
// Every command returns its output as text so that runs can be compared byte
// for byte.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include <json.hpp>

#include "orbmin/orbmin.hpp"

namespace orbmin::cli {

using json = nlohmann::json;

inline constexpr std::string_view kToolVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Formatting

/// Shortest round-trip representation, or 15 significant digits when
/// `digits15` is set. Locale independent.
inline std::string fmt(double x, bool digits15 = true) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = digits15 ? std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 15)
                              : std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// x rounded to 15 significant digits (null for non-finite values).
inline json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    const std::string s = fmt(x);
    double r = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), r);
    return r;
}

inline json num_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

inline json mat_json(const Mat& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(num(m(i, j)));
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Argument helpers

inline double parse_double(std::string_view s, std::string_view what) {
    double v = 0.0;
    const auto* b = s.data();
    const auto* e = s.data() + s.size();
    while (b < e && *b == ' ') ++b;
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e)
        throw Error(ErrorKind::ConfigInvalid, std::string(what) + ": cannot parse number '" + std::string(s) + "'");
    return v;
}

/// "a:b:step" (inclusive) or a comma-separated list.
inline std::vector<double> parse_alpha_list(std::string_view spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string_view::npos) {
        std::vector<std::string_view> parts;
        std::size_t pos = 0;
        while (true) {
            const std::size_t c = spec.find(':', pos);
            parts.push_back(spec.substr(pos, c - pos));
            if (c == std::string_view::npos) break;
            pos = c + 1;
        }
        if (parts.size() != 3) throw Error(ErrorKind::ConfigInvalid, "alpha list must be a:b:step");
        const double a = parse_double(parts[0], "alpha list"), b = parse_double(parts[1], "alpha list"),
                     st = parse_double(parts[2], "alpha list");
        if (!(st > 0) || b < a) throw Error(ErrorKind::ConfigInvalid, "alpha list needs a <= b and step > 0");
        const auto count = static_cast<std::size_t>(std::floor((b - a) / st + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) out.push_back(std::round((a + st * static_cast<double>(i)) * 1e12) / 1e12);
        return out;
    }
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t c = spec.find(',', pos);
        const std::string_view tok = spec.substr(pos, c == std::string_view::npos ? spec.size() - pos : c - pos);
        if (!tok.empty()) out.push_back(parse_double(tok, "number list"));
        if (c == std::string_view::npos) break;
        pos = c + 1;
    }
    if (out.empty()) throw Error(ErrorKind::ConfigInvalid, "empty number list");
    return out;
}

/// Worker count: hardware concurrency capped by ORBIT_MINIMALITY_THREADS.
inline unsigned thread_cap() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ORBIT_MINIMALITY_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

/// Runs f(i) for i in [0, count) on up to thread_cap() workers; results are
/// written by index so the output order never depends on scheduling.
template <class R, class F>
std::vector<R> parallel_map(std::size_t count, F&& f) {
    std::vector<R> out(count);
    std::vector<std::exception_ptr> errors(count);
    const unsigned workers = std::min<unsigned>(thread_cap(), static_cast<unsigned>(std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---------------------------------------------------------------------------
// kepler-jacobi

struct JacobiSweep {
    std::vector<double> alphas;
    int k = 1;
    double period = 2 * std::numbers::pi;
    double tmax = 2 * std::numbers::pi;
    IntegratorOpts integ = default_basis_opts();
    std::size_t rows_per_period = kDefaultGrid;
};

struct JacobiColumn {
    double alpha = 0.0;
    std::vector<double> det;
    ConjugateReport report;
};

struct JacobiData {
    std::vector<double> times;
    std::vector<JacobiColumn> columns;
};

inline JacobiData kepler_jacobi_data(const JacobiSweep& s) {
    if (s.alphas.empty()) throw Error(ErrorKind::ConfigInvalid, "empty alpha list");
    if (!(s.tmax >= s.period * (1 - 1e-12))) throw Error(ErrorKind::ConfigInvalid, "tmax must be >= period");
    for (double a : s.alphas)
        if (!(a > 0)) throw Error(ErrorKind::AlphaOutOfRange, "alpha must be positive");
    JacobiData d;
    const auto rows = static_cast<std::size_t>(std::llround(static_cast<double>(s.rows_per_period) * s.tmax / s.period));
    for (std::size_t i = 0; i <= rows; ++i)
        d.times.push_back(i == rows ? s.tmax : s.tmax * static_cast<double>(i) / static_cast<double>(rows));
    d.columns = parallel_map<JacobiColumn>(s.alphas.size(), [&](std::size_t j) {
        const Trajectory tr = circular_orbit(s.alphas[j], s.period, s.k);
        const SecondVariation sv = second_variation(tr);
        const ConjoinedBasis b = principal_basis(sv, s.tmax, s.integ);
        JacobiColumn c;
        c.alpha = s.alphas[j];
        for (double t : d.times) c.det.push_back(b.det_Y(t));
        ConjugateOpts co;
        co.samples = rows;
        c.report = conjugate_points(b, co);
        return c;
    });
    return d;
}

inline std::string kepler_jacobi_csv(const JacobiSweep& s, const JacobiData& d) {
    std::string out = "# det Y0(t) of the principal Jacobi basis along circular Kepler orbits; k=" + std::to_string(s.k) +
                      ", T=" + fmt(s.period) + ", tmax=" + fmt(s.tmax) + "; columns: t, one det column per alpha\n";
    out += "t";
    for (const auto& c : d.columns) out += ",detY0_alpha_" + fmt(c.alpha, false);
    out += "\n";
    for (std::size_t i = 0; i < d.times.size(); ++i) {
        out += fmt(d.times[i]);
        for (const auto& c : d.columns) out += "," + fmt(c.det[i]);
        out += "\n";
    }
    return out;
}

inline std::string cmd_kepler_jacobi(const JacobiSweep& s) { return kepler_jacobi_csv(s, kepler_jacobi_data(s)); }

// ---------------------------------------------------------------------------
// kepler-actions

struct ActionRow {
    double alpha = 0.0;
    double circular = 0.0;
    double collision_ejection = 0.0;
    std::string smaller; ///< "circular", "collision_ejection" or "equal"
};

inline std::vector<ActionRow> kepler_actions(const std::vector<double>& alphas, int k, double T) {
    if (alphas.empty()) throw Error(ErrorKind::ConfigInvalid, "empty alpha list");
    return parallel_map<ActionRow>(alphas.size(), [&](std::size_t i) {
        ActionRow r;
        r.alpha = alphas[i];
        r.circular = action_k_circular(r.alpha, T, k);
        r.collision_ejection = action_collision_ejection(r.alpha, T);
        r.smaller = r.circular < r.collision_ejection ? "circular"
                    : r.circular > r.collision_ejection ? "collision_ejection"
                                                        : "equal";
        return r;
    });
}

inline std::string kepler_actions_csv(const std::vector<ActionRow>& rows, int k, double T) {
    std::string out = "# actions of the k-circular and collision-ejection solutions; k=" + std::to_string(k) +
                      ", T=" + fmt(T) + "; columns: alpha, action_circular, action_collision_ejection, smaller\n";
    out += "alpha,action_circular,action_collision_ejection,smaller\n";
    for (const auto& r : rows)
        out += fmt(r.alpha, false) + "," + fmt(r.circular) + "," + fmt(r.collision_ejection) + "," + r.smaller + "\n";
    return out;
}

inline json kepler_actions_json(const std::vector<ActionRow>& rows, int k, double T) {
    json j;
    j["k"] = k;
    j["T"] = num(T);
    j["tool_version"] = std::string(kToolVersion);
    json a = json::array();
    for (const auto& r : rows)
        a.push_back({{"alpha", num(r.alpha)},
                     {"action_circular", num(r.circular)},
                     {"action_collision_ejection", num(r.collision_ejection)},
                     {"smaller", r.smaller}});
    j["rows"] = a;
    return j;
}

// ---------------------------------------------------------------------------
// Report serialization

inline json report_json(const MinimalityReport& r, const json& config_echo) {
    json j;
    j["tool_version"] = std::string(kToolVersion);
    j["verdict"] = std::string(to_string(r.verdict));
    j["reason"] = r.reason;
    j["dimension"] = r.dim;
    j["period"] = num(r.period);
    j["interval_end"] = num(r.tau);
    j["el_residual"] = num(r.el_residual);
    j["closure_defect"] = num(r.closure_defect);
    if (r.symmetry)
        j["symmetry"] = {{"M", r.symmetry->M}, {"defect", num(r.symmetry_defect)}};
    else
        j["symmetry"] = nullptr;

    json cond;
    cond["legendre"] = {{"strict", r.pointwise.legendre_strict}, {"min_eigenvalue", num(r.pointwise.legendre_min_eig)}};
    cond["regularity"] = {{"classification", std::string(to_string(r.pointwise.regularity))},
                          {"min_eigenvalue", num(r.pointwise.regularity_min_eig)},
                          {"integral_P", mat_json(r.pointwise.integral_P)}};
    cond["jacobi"] = {{"J", r.jacobi_J}, {"J_strict", r.jacobi_J_strict}, {"parity_hint", std::string(to_string(r.parity))}};
    if (r.sr) {
        const SRResult& s = *r.sr;
        json trace = json::array();
        for (const auto& e : s.trace)
            trace.push_back({{"eps", num(e.eps)},
                             {"status", std::string(to_string(e.status))},
                             {"singular_time", e.singular_time >= 0 ? num(e.singular_time) : json(nullptr)},
                             {"boundary_min_eigenvalue", num(e.boundary_min_eig)},
                             {"riccati_residual", num(e.riccati_residual)}});
        json lmi = nullptr;
        if (s.lmi.attempted)
            lmi = {{"feasible", s.lmi.feasible},
                   {"verified", s.lmi.verified},
                   {"margin", num(s.lmi.margin)},
                   {"slice_dim", s.lmi.slice_dim},
                   {"boundary_min_eigenvalue", num(s.lmi.boundary_min_eig)},
                   {"riccati_residual", num(s.lmi.riccati_residual)},
                   {"detail", s.lmi.detail}};
        cond["sr"] = {{"status", std::string(to_string(s.status))},
                      {"holds", s.holds()},
                      {"route", s.route},
                      {"M", s.M},
                      {"eps_trace", trace},
                      {"boundary_search", lmi},
                      {"symmetry_checked", s.symmetry_checked},
                      {"momentum_defect", num(s.momentum_defect)},
                      {"equivariance_defect", num(s.equivariance_defect)},
                      {"reason", s.reason}};
    } else {
        cond["sr"] = nullptr;
    }
    cond["weierstrass"] = {{"strict", r.pointwise.weierstrass_strict},
                           {"basis", r.pointwise.weierstrass_basis},
                           {"min_excess", num(r.pointwise.weierstrass_min_excess)}};
    j["conditions"] = cond;

    json zeros = json::array();
    for (const Zero& z : r.conjugate.zeros)
        zeros.push_back({{"t", num(z.t)}, {"kind", std::string(to_string(z.kind))}, {"interior", r.conjugate.is_interior(z)}});
    j["conjugate_points"] = zeros;
    j["endpoint_degenerate"] = r.conjugate.endpoint_degenerate;
    j["det_sign"] = std::string(to_string(r.conjugate.sign));
    j["det_end_relative"] = num(r.conjugate.det_max > 0 ? r.conjugate.det_end / r.conjugate.det_max : 0.0);
    j["wronskian_drift"] = num(r.wronskian_drift);

    if (r.boundary.computed)
        j["boundary_form"] = {{"definiteness", std::string(to_string(r.boundary.definiteness))},
                              {"min_eigenvalue", num(r.boundary.min_eig)},
                              {"eigenvalues", num_array(r.boundary.eigenvalues)},
                              {"slice_dim", r.boundary.slice_dim}};
    else
        j["boundary_form"] = nullptr;
    j["symmetry_directions"] = {{"generators", r.slice.generators}, {"second_variation", num_array(r.slice.kernel_values)}};
    j["certificate"] = r.certificate;
    j["dlm_implied"] = r.dlm_implied;
    if (r.witness)
        j["witness"] = {{"method", r.witness->method},
                        {"second_variation", num(r.witness->value)},
                        {"conjugate_time", num(r.witness->conjugate_time)},
                        {"window", num(r.witness->window)},
                        {"eta", num(r.witness->eta)}};
    else
        j["witness"] = nullptr;
    if (!r.witness_error.empty()) j["witness_error"] = r.witness_error;

    const Tolerances& t = r.tolerances;
    j["tolerances"] = {{"tol_el", num(t.tol_el)},         {"tol_periodic", num(t.tol_periodic)},
                       {"tol_touch", num(t.tol_touch)},   {"tol_endpoint", num(t.tol_endpoint)},
                       {"tol_definite", num(t.tol_definite)}, {"tol_riccati", num(t.tol_riccati)},
                       {"tol_witness", num(t.tol_witness)},   {"tube_radius", num(t.tube_radius)},
                       {"eps_schedule", num_array(t.eps_schedule)}};
    j["config_echo"] = config_echo;
    return j;
}

// ---------------------------------------------------------------------------
// eight

enum class EightMode { Trajectory, Jacobi, Classify, ClassifySymmetric };

inline EightMode parse_eight_mode(std::string_view s) {
    if (s == "trajectory") return EightMode::Trajectory;
    if (s == "jacobi") return EightMode::Jacobi;
    if (s == "classify") return EightMode::Classify;
    if (s == "classify-symmetric") return EightMode::ClassifySymmetric;
    throw Error(ErrorKind::ConfigInvalid, "unknown eight mode '" + std::string(s) + "'");
}

inline std::string cmd_eight(EightMode mode, const ClassifyOpts& opts = {}) {
    const FigureEight fe = figure_eight();
    const Trajectory& tr = fe.trajectory;
    const double T = tr.period();
    const std::size_t N = tr.grid_size();
    if (mode == EightMode::Trajectory) {
        std::string out = "# figure-eight positions over one period T=" + fmt(T) +
                          "; columns: t, x1, y1, x2, y2, x3, y3\nt,x1,y1,x2,y2,x3,y3\n";
        for (std::size_t i = 0; i <= N; ++i) {
            const double t = tr.grid_time(i);
            const Vec u = tr.position(t);
            out += fmt(t);
            for (double x : u) out += "," + fmt(x);
            out += "\n";
        }
        return out;
    }
    if (mode == EightMode::Jacobi) {
        const SecondVariation sv = second_variation(tr);
        const ConjoinedBasis b = principal_basis(sv, T, opts.integ);
        std::string out = "# det Y0(t) along the figure-eight over one period T=" + fmt(T) +
                          "; columns: t, detY0, sign (-1, 0 or 1)\nt,detY0,sign\n";
        for (std::size_t i = 0; i <= N; ++i) {
            const double t = tr.grid_time(i);
            const double d = b.det_Y(t);
            out += fmt(t) + "," + fmt(d) + "," + std::to_string((d > 0) - (d < 0)) + "\n";
        }
        return out;
    }
    const bool symmetric = mode == EightMode::ClassifySymmetric;
    const MinimalityReport r = symmetric ? classify(tr, fe.symmetry, opts) : classify(tr, std::nullopt, opts);
    json echo = {{"command", "eight"}, {"mode", symmetric ? "classify-symmetric" : "classify"}};
    return report_json(r, echo).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
    std::string model_type; ///< "kepler_alpha" or "nbody"
    double alpha = 0.0;
    int bodies = 0;
    std::string orbit_type; ///< "circular", "initial_conditions" or "figure_eight"
    double period = 0.0;
    int k = 0;
    Vec u0, v0;
    std::optional<SymmetrySpec> symmetry;
    ClassifyOpts classify;
    std::string report_path;
    json echo;
};

namespace detail {

inline std::size_t line_of(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

struct ConfigReader {
    std::string_view text;

    std::size_t line_of_key(std::string_view key) const {
        const std::string quoted = "\"" + std::string(key) + "\"";
        const std::size_t p = text.find(quoted);
        return p == std::string_view::npos ? 1 : line_of(text, p);
    }

    [[noreturn]] void fail(const std::string& path, std::string_view key, const std::string& msg) const {
        throw Error(ErrorKind::ConfigInvalid,
                    "line " + std::to_string(line_of_key(key)) + ": field '" + path + "': " + msg);
    }

    void only_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) const {
        if (!obj.is_object()) fail(path, path.substr(path.rfind('/') + 1), "expected an object");
        for (const auto& [key, value] : obj.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                fail(path + "/" + key, key, "unknown key '" + key + "'");
        }
    }

    const json& need(const json& obj, const std::string& path, std::string_view key) const {
        if (!obj.contains(std::string(key))) fail(path + "/" + std::string(key), path.substr(path.rfind('/') + 1),
                                                  "missing required key '" + std::string(key) + "'");
        return obj.at(std::string(key));
    }

    double number(const json& v, const std::string& path, std::string_view key) const {
        if (!v.is_number()) fail(path, key, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(path, key, "expected a finite number");
        return d;
    }

    double positive(const json& v, const std::string& path, std::string_view key) const {
        const double d = number(v, path, key);
        if (!(d > 0)) fail(path, key, "must be positive");
        return d;
    }

    int integer(const json& v, const std::string& path, std::string_view key) const {
        if (!v.is_number_integer()) fail(path, key, "expected an integer");
        return v.get<int>();
    }

    std::string string(const json& v, const std::string& path, std::string_view key) const {
        if (!v.is_string()) fail(path, key, "expected a string");
        return v.get<std::string>();
    }

    Vec numbers(const json& v, const std::string& path, std::string_view key) const {
        if (!v.is_array()) fail(path, key, "expected an array of numbers");
        Vec out;
        for (const auto& x : v) out.push_back(number(x, path, key));
        return out;
    }
};

} // namespace detail

/// Parses and validates a JSON run configuration. Unknown keys, missing keys
/// and out-of-range values raise ConfigInvalid with the line and field path.
inline RunConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ConfigInvalid,
                    "line " + std::to_string(detail::line_of(text, e.byte > 0 ? e.byte - 1 : 0)) + ": malformed JSON");
    }
    const detail::ConfigReader rd{text};
    RunConfig c;
    c.echo = root;
    rd.only_keys(root, "", {"model", "orbit", "symmetry", "integrator", "tolerances", "output"});

    const json& model = rd.need(root, "", "model");
    rd.only_keys(model, "/model", {"type", "alpha", "N"});
    c.model_type = rd.string(rd.need(model, "/model", "type"), "/model/type", "type");
    if (c.model_type == "kepler_alpha") {
        rd.only_keys(model, "/model", {"type", "alpha"});
        c.alpha = rd.positive(rd.need(model, "/model", "alpha"), "/model/alpha", "alpha");
    } else if (c.model_type == "nbody") {
        rd.only_keys(model, "/model", {"type", "N"});
        c.bodies = rd.integer(rd.need(model, "/model", "N"), "/model/N", "N");
        if (c.bodies < 2) rd.fail("/model/N", "N", "needs at least two bodies");
    } else {
        rd.fail("/model/type", "type", "unknown model type '" + c.model_type + "'");
    }

    const json& orbit = rd.need(root, "", "orbit");
    rd.only_keys(orbit, "/orbit", {"type", "T", "k", "u0", "v0"});
    c.orbit_type = rd.string(rd.need(orbit, "/orbit", "type"), "/orbit/type", "type");
    if (c.orbit_type == "circular") {
        rd.only_keys(orbit, "/orbit", {"type", "T", "k"});
        if (c.model_type != "kepler_alpha") rd.fail("/orbit/type", "type", "circular orbits need model kepler_alpha");
        c.period = rd.positive(rd.need(orbit, "/orbit", "T"), "/orbit/T", "T");
        c.k = rd.integer(rd.need(orbit, "/orbit", "k"), "/orbit/k", "k");
        if (c.k == 0) rd.fail("/orbit/k", "k", "winding count must be nonzero");
    } else if (c.orbit_type == "initial_conditions") {
        rd.only_keys(orbit, "/orbit", {"type", "T", "u0", "v0"});
        c.period = rd.positive(rd.need(orbit, "/orbit", "T"), "/orbit/T", "T");
        c.u0 = rd.numbers(rd.need(orbit, "/orbit", "u0"), "/orbit/u0", "u0");
        c.v0 = rd.numbers(rd.need(orbit, "/orbit", "v0"), "/orbit/v0", "v0");
        const std::size_t n = c.model_type == "kepler_alpha" ? 2 : 2 * static_cast<std::size_t>(c.bodies);
        if (c.u0.size() != n) rd.fail("/orbit/u0", "u0", "expected " + std::to_string(n) + " entries");
        if (c.v0.size() != n) rd.fail("/orbit/v0", "v0", "expected " + std::to_string(n) + " entries");
    } else if (c.orbit_type == "figure_eight") {
        rd.only_keys(orbit, "/orbit", {"type"});
        if (c.model_type != "nbody" || c.bodies != 3) rd.fail("/orbit/type", "type", "figure_eight needs model nbody with N=3");
    } else {
        rd.fail("/orbit/type", "type", "unknown orbit type '" + c.orbit_type + "'");
    }
    const std::size_t n = c.model_type == "kepler_alpha" ? 2 : 2 * static_cast<std::size_t>(c.bodies);

    if (root.contains("symmetry") && !root.at("symmetry").is_null()) {
        const json& s = root.at("symmetry");
        rd.only_keys(s, "/symmetry", {"M", "S"});
        SymmetrySpec spec;
        spec.M = rd.integer(rd.need(s, "/symmetry", "M"), "/symmetry/M", "M");
        if (spec.M < 1) rd.fail("/symmetry/M", "M", "must be >= 1");
        const Vec flat = rd.numbers(rd.need(s, "/symmetry", "S"), "/symmetry/S", "S");
        if (flat.size() != n * n) rd.fail("/symmetry/S", "S", "expected " + std::to_string(n * n) + " entries (row-major)");
        spec.S = Mat::from_row_major(n, n, flat);
        if (orthogonality_defect(spec.S) > 1e-10) rd.fail("/symmetry/S", "S", "matrix is not orthogonal");
        c.symmetry = spec;
    }

    if (root.contains("integrator")) {
        const json& g = root.at("integrator");
        rd.only_keys(g, "/integrator", {"method", "rtol", "atol", "step"});
        IntegratorOpts& io = c.classify.integ;
        if (g.contains("method")) {
            const std::string m = rd.string(g.at("method"), "/integrator/method", "method");
            if (m == "rk4_fixed")
                io.method = Method::Rk4Fixed;
            else if (m == "dp54_adaptive")
                io.method = Method::Dp54Adaptive;
            else
                rd.fail("/integrator/method", "method", "expected rk4_fixed or dp54_adaptive");
        }
        if (g.contains("rtol")) io.rtol = rd.positive(g.at("rtol"), "/integrator/rtol", "rtol");
        if (g.contains("atol")) io.atol = rd.positive(g.at("atol"), "/integrator/atol", "atol");
        if (g.contains("step")) io.step = rd.positive(g.at("step"), "/integrator/step", "step");
        if (io.method == Method::Rk4Fixed && !g.contains("step"))
            rd.fail("/integrator/step", "method", "rk4_fixed needs a step");
    }

    if (root.contains("tolerances")) {
        const json& t = root.at("tolerances");
        rd.only_keys(t, "/tolerances", {"eps_schedule", "tol_el_rel", "tol_touch", "tol_endpoint", "tol_definite",
                                        "tol_riccati", "tube_radius", "samples", "mollifier_windows"});
        ClassifyOpts& o = c.classify;
        if (t.contains("eps_schedule")) {
            o.sr.eps_schedule = rd.numbers(t.at("eps_schedule"), "/tolerances/eps_schedule", "eps_schedule");
            for (double e : o.sr.eps_schedule)
                if (!(e > 0)) rd.fail("/tolerances/eps_schedule", "eps_schedule", "entries must be positive");
        }
        if (t.contains("tol_el_rel")) o.tol_el_rel = rd.positive(t.at("tol_el_rel"), "/tolerances/tol_el_rel", "tol_el_rel");
        if (t.contains("tol_touch")) o.conjugate.tol_touch = rd.positive(t.at("tol_touch"), "/tolerances/tol_touch", "tol_touch");
        if (t.contains("tol_endpoint"))
            o.conjugate.tol_endpoint = rd.positive(t.at("tol_endpoint"), "/tolerances/tol_endpoint", "tol_endpoint");
        if (t.contains("tol_definite")) {
            o.pointwise.tol_definite = rd.positive(t.at("tol_definite"), "/tolerances/tol_definite", "tol_definite");
            o.sr.tol_definite = o.pointwise.tol_definite;
        }
        if (t.contains("tol_riccati")) o.sr.tol_riccati = rd.positive(t.at("tol_riccati"), "/tolerances/tol_riccati", "tol_riccati");
        if (t.contains("tube_radius"))
            o.pointwise.tube_radius = rd.positive(t.at("tube_radius"), "/tolerances/tube_radius", "tube_radius");
        if (t.contains("samples")) {
            const int s = rd.integer(t.at("samples"), "/tolerances/samples", "samples");
            if (s < 64) rd.fail("/tolerances/samples", "samples", "must be >= 64");
            o.conjugate.samples = static_cast<std::size_t>(s);
            o.sr.samples = static_cast<std::size_t>(s);
        }
        if (t.contains("mollifier_windows")) {
            o.mollifier_windows = rd.numbers(t.at("mollifier_windows"), "/tolerances/mollifier_windows", "mollifier_windows");
            for (double w : o.mollifier_windows)
                if (!(w > 0 && w < 0.5)) rd.fail("/tolerances/mollifier_windows", "mollifier_windows", "entries must lie in (0, 0.5)");
        }
    }

    if (root.contains("output")) {
        const json& out = root.at("output");
        rd.only_keys(out, "/output", {"report"});
        if (out.contains("report")) c.report_path = rd.string(out.at("report"), "/output/report", "report");
    }
    return c;
}

/// Builds the trajectory described by a configuration.
inline Trajectory build_trajectory(const RunConfig& c) {
    if (c.orbit_type == "circular") return circular_orbit(c.alpha, c.period, c.k);
    if (c.orbit_type == "figure_eight") return figure_eight().trajectory;
    std::shared_ptr<const LagrangianModel> model;
    if (c.model_type == "kepler_alpha")
        model = std::make_shared<KeplerAlpha>(c.alpha);
    else
        model = std::make_shared<NBodyPlanar>(static_cast<std::size_t>(c.bodies));
    IntegratorOpts io;
    io.rtol = 1e-12;
    io.atol = 1e-14;
    io.step = 0.0;
    return Trajectory::integrate(model, c.u0, c.v0, c.period, io);
}

inline std::string cmd_classify(const RunConfig& c) {
    const Trajectory tr = build_trajectory(c);
    const MinimalityReport r = classify(tr, c.symmetry, c.classify);
    return report_json(r, c.echo).dump(2) + "\n";
}

} // namespace orbmin::cli
