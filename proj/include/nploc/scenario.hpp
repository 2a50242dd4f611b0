#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nploc/scatter.hpp"

namespace nploc {

using Json = nlohmann::ordered_json;

inline constexpr int scenario_version = 1;

enum class Command { spectrum, field, sweep, scatter, oracle_check, star_demo };

inline const char* to_string(Command c)
{
    switch (c) {
    case Command::spectrum: return "spectrum";
    case Command::field: return "field";
    case Command::sweep: return "sweep";
    case Command::scatter: return "scatter";
    case Command::oracle_check: return "oracle-check";
    case Command::star_demo: return "star-demo";
    }
    return "?";
}

inline Command parse_command(const std::string& s)
{
    for (auto c : {Command::spectrum, Command::field, Command::sweep, Command::scatter,
                   Command::oracle_check, Command::star_demo})
        if (s == to_string(c))
            return c;
    throw ConfigError("unknown command '" + s + "'");
}

// Mesh knobs shared by the commands that take a single curve.
struct MeshSettings {
    // 0 picks the default for the command.
    int panels = 0;
    bool graded = false;
    double grade_threshold = 0.5;
};

struct SpectrumSettings {
    double cluster_tol = 1e-5;
    Normalization normalization = Normalization::arc_length_l2;
    std::vector<int> traces {0};
};

struct FieldSettings {
    int rank = 0;
    // 0 renders the Laplace single layer, otherwise the Helmholtz one.
    double k = 0.0;
    Box window {-2.0, 2.0, -2.0, 2.0};
    int nx = 81;
    int ny = 81;
    double cluster_tol = 1e-5;
};

struct SweepFamilySpec {
    // "ellipse" sweeps rho0 downward; "bump_family" sweeps kappa upward.
    std::string kind = "ellipse";
    double R0 = 1.0;
    std::vector<double> rho0;
    int n_sym = 1;
    bool concave = false;
    BumpProfile profile = BumpProfile::rounded_corner;
    std::vector<double> kappa;
};

struct SweepSettings {
    SweepFamilySpec family;
    SweepOptions options;
};

struct LocalizationSettings {
    BumpFamilySpec family;
    std::vector<double> kappa;
    LocalizationOptions options;
};

struct ScatterSettings {
    double eps = -1.0;
    double delta = 1e-3;
    double k = 10.0;
    Vec2 direction {-1.0, 0.0};
    std::vector<Box> windows;
    int nx = 81;
    int ny = 81;
    double nodes_per_wavelength = 10.0;
    double curvature_resolution = 1.0;
    std::size_t node_cap = 4096;
    double rcond_warning = 1e-12;
    // Interior grid for the energy proxy; 0 skips it.
    int energy_grid = 61;
    double zoom_halfwidth = 0.4;
    // Replaces the single curve by a family of scaled bump curves.
    std::optional<LocalizationSettings> localization;
};

struct OracleSettings {
    int n_max = 5;
    double tolerance = 1e-6;
    double cluster_tol = 1e-5;
};

struct Scenario {
    int version = scenario_version;
    Command command = Command::spectrum;
    // Reserved: every algorithm is deterministic, so the seed changes nothing.
    std::uint64_t seed = 0;
    std::optional<CurveSpec> curve;
    MeshSettings mesh;
    SpectrumSettings spectrum;
    FieldSettings field;
    SweepSettings sweep;
    ScatterSettings scatter;
    OracleSettings oracle;
    StarOptions star;
};

namespace detail {

inline std::string join_path(const std::string& base, const std::string& key)
{
    return base.empty() ? key : base + "." + key;
}

inline void read_value(const Json& v, const std::string& p, double& out)
{
    if (!v.is_number())
        throw ConfigError(p + ": expected a number");
    out = v.get<double>();
}

inline void read_value(const Json& v, const std::string& p, long long& out)
{
    if (!v.is_number_integer())
        throw ConfigError(p + ": expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
        throw ConfigError(p + ": integer out of range");
    out = v.get<long long>();
}

inline void read_value(const Json& v, const std::string& p, int& out)
{
    long long x = 0;
    read_value(v, p, x);
    if (x < INT32_MIN || x > INT32_MAX)
        throw ConfigError(p + ": integer out of range");
    out = static_cast<int>(x);
}

template <class U>
    requires(std::is_unsigned_v<U> && !std::is_same_v<U, bool>)
void read_value(const Json& v, const std::string& p, U& out)
{
    long long x = 0;
    read_value(v, p, x);
    if (x < 0)
        throw ConfigError(p + ": expected a non-negative integer");
    out = static_cast<U>(x);
}

inline void read_value(const Json& v, const std::string& p, bool& out)
{
    if (!v.is_boolean())
        throw ConfigError(p + ": expected true or false");
    out = v.get<bool>();
}

inline void read_value(const Json& v, const std::string& p, std::string& out)
{
    if (!v.is_string())
        throw ConfigError(p + ": expected a string");
    out = v.get<std::string>();
}

inline std::vector<double> read_numbers(const Json& v, const std::string& p, std::size_t n)
{
    if (!v.is_array() || v.size() != n)
        throw ConfigError(p + ": expected an array of " + std::to_string(n) + " numbers");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        read_value(v[i], p + "[" + std::to_string(i) + "]", out[i]);
    return out;
}

inline void read_value(const Json& v, const std::string& p, Vec2& out)
{
    auto a = read_numbers(v, p, 2);
    out = {a[0], a[1]};
}

// [xmin, xmax, ymin, ymax]
inline void read_value(const Json& v, const std::string& p, Box& out)
{
    auto a = read_numbers(v, p, 4);
    out = {a[0], a[1], a[2], a[3]};
}

inline void read_value(const Json& v, const std::string& p, Normalization& out)
{
    std::string s;
    read_value(v, p, s);
    if (s == to_string(Normalization::arc_length_l2))
        out = Normalization::arc_length_l2;
    else if (s == to_string(Normalization::parameter_density))
        out = Normalization::parameter_density;
    else
        throw ConfigError(p + ": expected arc_length_l2 or parameter_density, got '" + s + "'");
}

inline void read_value(const Json& v, const std::string& p, BumpProfile& out)
{
    std::string s;
    read_value(v, p, s);
    if (s == to_string(BumpProfile::rounded_corner))
        out = BumpProfile::rounded_corner;
    else if (s == to_string(BumpProfile::gaussian))
        out = BumpProfile::gaussian;
    else
        throw ConfigError(p + ": expected rounded_corner or gaussian, got '" + s + "'");
}

inline void read_value(const Json& v, const std::string& p, Observable& out)
{
    std::string s;
    read_value(v, p, s);
    if (s == to_string(Observable::eigenfunction))
        out = Observable::eigenfunction;
    else if (s == to_string(Observable::conormal))
        out = Observable::conormal;
    else
        throw ConfigError(p + ": expected eigenfunction or conormal, got '" + s + "'");
}

// "+1" is the largest positive cluster, "-2" the second largest negative one.
inline void read_value(const Json& v, const std::string& p, Track& out)
{
    std::string s;
    read_value(v, p, s);
    bool ok = s.size() >= 2 && (s[0] == '+' || s[0] == '-') &&
              s.find_first_not_of("0123456789", 1) == std::string::npos && s.size() < 8;
    int n = ok ? std::stoi(s.substr(1)) : 0;
    if (n < 1)
        throw ConfigError(p + ": expected a track label such as +1 or -2, got '" + s + "'");
    out = {s[0] == '+' ? 1 : -1, n - 1};
}

template <class T>
void read_value(const Json& v, const std::string& p, std::vector<T>& out)
{
    if (!v.is_array())
        throw ConfigError(p + ": expected an array");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
        T x {};
        read_value(v[i], p + "[" + std::to_string(i) + "]", x);
        out.push_back(x);
    }
}

// Reads keys of one JSON object and rejects the ones nobody asked for.
class Fields {
public:
    Fields(const Json& j, std::string path, std::string owner)
        : j_(j), path_(std::move(path)), owner_(std::move(owner))
    {
        if (!j_.is_object())
            throw ConfigError((path_.empty() ? std::string("scenario") : path_) + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string path(const std::string& key) const { return join_path(path_, key); }

    template <class T>
    void get(const std::string& key, T& out)
    {
        if (!has(key))
            return;
        seen_.insert(key);
        read_value(j_.at(key), path(key), out);
    }

    template <class T>
    void require(const std::string& key, T& out)
    {
        if (!has(key))
            throw ConfigError(path(key) + ": required key is missing");
        get(key, out);
    }

    const Json& object(const std::string& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const
    {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key()))
                throw ConfigError(path(item.key()) + ": unknown key for " + owner_);
    }

private:
    const Json& j_;
    std::string path_;
    std::string owner_;
    std::set<std::string> seen_;
};

inline Json box_json(const Box& b) { return Json::array({b.xmin, b.xmax, b.ymin, b.ymax}); }

inline BumpTarget parse_bump(const Json& j, const std::string& path)
{
    Fields f(j, path, "a bump");
    BumpTarget t;
    f.get("height", t.height);
    f.get("center", t.center);
    f.require("target_kappa", t.target_kappa);
    f.get("profile", t.profile);
    f.get("slope", t.slope);
    f.finish();
    return t;
}

inline void parse_mesh(const Json& j, MeshSettings& m)
{
    Fields f(j, "mesh", "the mesh block");
    f.get("panels", m.panels);
    f.get("graded", m.graded);
    f.get("grade_threshold", m.grade_threshold);
    f.finish();
}

inline void parse_spectrum(const Json& j, SpectrumSettings& s)
{
    Fields f(j, "spectrum", "the spectrum block");
    f.get("cluster_tol", s.cluster_tol);
    f.get("normalization", s.normalization);
    f.get("traces", s.traces);
    f.finish();
    for (int r : s.traces)
        if (r < 0)
            throw ConfigError("spectrum.traces: ranks are non-negative");
}

inline void parse_field(const Json& j, FieldSettings& s)
{
    Fields f(j, "field", "the field block");
    f.get("rank", s.rank);
    f.get("k", s.k);
    f.get("window", s.window);
    f.get("nx", s.nx);
    f.get("ny", s.ny);
    f.get("cluster_tol", s.cluster_tol);
    f.finish();
    if (s.rank < 0)
        throw ConfigError("field.rank: ranks are non-negative");
}

inline void parse_sweep(const Json& j, SweepSettings& s)
{
    Fields f(j, "sweep", "the sweep block");
    if (!f.has("family"))
        throw ConfigError("sweep.family: required key is missing");
    {
        Fields g(f.object("family"), "sweep.family", "a sweep family");
        auto& fam = s.family;
        g.require("kind", fam.kind);
        if (fam.kind == "ellipse") {
            g.get("R0", fam.R0);
            g.require("rho0", fam.rho0);
        } else if (fam.kind == "bump_family") {
            g.get("n_sym", fam.n_sym);
            g.get("concave", fam.concave);
            g.get("profile", fam.profile);
            g.require("kappa", fam.kappa);
        } else {
            throw ConfigError("sweep.family.kind: expected ellipse or bump_family, got '" + fam.kind + "'");
        }
        g.finish();
    }
    auto& o = s.options;
    f.get("tracks", o.tracks);
    if (f.has("observable")) {
        Observable obs {};
        f.get("observable", obs);
        o.observable = obs;
    }
    f.get("initial_panels", o.initial_panels);
    f.get("graded", o.graded);
    f.get("convergence_tol", o.convergence_tol);
    f.get("node_cap", o.node_cap);
    f.get("cluster_tol", o.cluster_tol);
    f.get("normalization", o.normalization);
    f.finish();
    if (o.tracks.empty())
        throw ConfigError("sweep.tracks: at least one track is needed");
    if (s.family.kind == "bump_family")
        o.concave = s.family.concave;
}

inline void parse_scatter(const Json& j, ScatterSettings& s)
{
    Fields f(j, "scatter", "the scatter block");
    f.get("eps", s.eps);
    f.get("delta", s.delta);
    f.get("k", s.k);
    f.get("direction", s.direction);
    f.get("windows", s.windows);
    f.get("nx", s.nx);
    f.get("ny", s.ny);
    f.get("nodes_per_wavelength", s.nodes_per_wavelength);
    f.get("curvature_resolution", s.curvature_resolution);
    f.get("node_cap", s.node_cap);
    f.get("rcond_warning", s.rcond_warning);
    f.get("energy_grid", s.energy_grid);
    f.get("zoom_halfwidth", s.zoom_halfwidth);
    if (f.has("localization")) {
        Fields g(f.object("localization"), "scatter.localization", "the localization block");
        LocalizationSettings loc;
        g.get("n_sym", loc.family.n_sym);
        g.get("concave", loc.family.concave);
        g.get("profile", loc.family.profile);
        g.require("kappa", loc.kappa);
        g.get("diameter", loc.options.target_diameter);
        g.get("grid", loc.options.grid);
        g.finish();
        loc.options.zoom_halfwidth = s.zoom_halfwidth;
        loc.options.energy_grid = s.energy_grid;
        s.localization = loc;
    }
    f.finish();
}

inline void parse_oracle(const Json& j, OracleSettings& s)
{
    Fields f(j, "oracle", "the oracle block");
    f.get("n_max", s.n_max);
    f.get("tolerance", s.tolerance);
    f.get("cluster_tol", s.cluster_tol);
    f.finish();
}

inline void parse_star(const Json& j, StarOptions& s)
{
    Fields f(j, "star", "the star block");
    f.get("eps", s.eps);
    f.get("delta", s.delta);
    f.get("k", s.k);
    f.get("direction", s.direction);
    f.get("amplitude", s.amplitude);
    f.get("exponent", s.exponent);
    f.get("lobes", s.lobes);
    f.get("panels", s.panels);
    f.get("grade_threshold", s.grade_threshold);
    f.get("spectrum", s.spectrum);
    f.get("grid", s.grid);
    f.finish();
}

inline std::string block_name(Command c)
{
    switch (c) {
    case Command::oracle_check: return "oracle";
    case Command::star_demo: return "star";
    default: return to_string(c);
    }
}

} // namespace detail

/** Curve description as accepted under the "curve" key. */
inline CurveSpec parse_curve(const Json& j, const std::string& path = "curve")
{
    detail::Fields f(j, path, "a curve");
    std::string kind;
    f.require("kind", kind);
    CurveSpec spec;
    f.get("scale", spec.scale);
    if (kind == "circle") {
        CircleSpec s;
        f.get("radius", s.radius);
        spec.shape = s;
    } else if (kind == "ellipse") {
        EllipseSpec s;
        f.get("R0", s.R0);
        f.require("rho0", s.rho0);
        spec.shape = s;
    } else if (kind == "bump_family") {
        BumpFamilySpec s;
        f.get("n_sym", s.n_sym);
        f.require("kappa_max", s.kappa_max);
        f.get("concave", s.concave);
        f.get("profile", s.profile);
        spec.shape = s;
    } else if (kind == "bumps") {
        BumpsSpec s;
        f.get("base_radius", s.base_radius);
        if (!f.has("bumps"))
            throw ConfigError(f.path("bumps") + ": required key is missing");
        const Json& arr = f.object("bumps");
        if (!arr.is_array() || arr.empty())
            throw ConfigError(f.path("bumps") + ": expected a non-empty array");
        for (std::size_t i = 0; i < arr.size(); ++i)
            s.bumps.push_back(detail::parse_bump(arr[i], f.path("bumps") + "[" + std::to_string(i) + "]"));
        spec.shape = s;
    } else if (kind == "star") {
        StarSpec s;
        f.get("amplitude", s.amplitude);
        f.get("exponent", s.exponent);
        f.get("lobes", s.lobes);
        spec.shape = s;
    } else {
        throw ConfigError(f.path("kind") + ": unknown curve kind '" + kind +
                          "'; expected circle, ellipse, bump_family, bumps or star");
    }
    f.finish();
    return spec;
}

inline Json to_json(const CurveSpec& spec)
{
    Json j = std::visit(
        [](const auto& s) -> Json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CircleSpec>)
                return {{"kind", "circle"}, {"radius", s.radius}};
            else if constexpr (std::is_same_v<T, EllipseSpec>)
                return {{"kind", "ellipse"}, {"R0", s.R0}, {"rho0", s.rho0}};
            else if constexpr (std::is_same_v<T, BumpFamilySpec>)
                return {{"kind", "bump_family"}, {"n_sym", s.n_sym}, {"kappa_max", s.kappa_max},
                        {"concave", s.concave}, {"profile", to_string(s.profile)}};
            else if constexpr (std::is_same_v<T, BumpsSpec>) {
                Json bumps = Json::array();
                for (const auto& b : s.bumps)
                    bumps.push_back({{"height", b.height}, {"center", b.center},
                                     {"target_kappa", b.target_kappa}, {"profile", to_string(b.profile)},
                                     {"slope", b.slope}});
                return {{"kind", "bumps"}, {"base_radius", s.base_radius}, {"bumps", bumps}};
            } else
                return {{"kind", "star"}, {"amplitude", s.amplitude}, {"exponent", s.exponent},
                        {"lobes", s.lobes}};
        },
        spec.shape);
    j["scale"] = spec.scale;
    return j;
}

/**
 * Builds a scenario for the given command from a parsed document. Every key
 * is checked; a key the command does not read is an error.
 */
inline Scenario parse_scenario(const Json& j, Command cmd)
{
    detail::Fields f(j, "", std::string("a ") + to_string(cmd) + " scenario");
    Scenario s;
    s.command = cmd;
    if (cmd == Command::scatter)
        s.mesh.graded = true;
    f.require("version", s.version);
    if (s.version != scenario_version)
        throw ConfigError("version: unsupported schema version " + std::to_string(s.version) +
                          "; this build reads version " + std::to_string(scenario_version));
    if (f.has("command")) {
        std::string name;
        f.get("command", name);
        if (name != to_string(cmd))
            throw ConfigError("command: scenario is for '" + name + "' but '" + to_string(cmd) +
                              "' was requested");
    }
    f.get("seed", s.seed);

    std::string block = detail::block_name(cmd);
    if (f.has(block)) {
        const Json& b = f.object(block);
        switch (cmd) {
        case Command::spectrum: detail::parse_spectrum(b, s.spectrum); break;
        case Command::field: detail::parse_field(b, s.field); break;
        case Command::sweep: detail::parse_sweep(b, s.sweep); break;
        case Command::scatter: detail::parse_scatter(b, s.scatter); break;
        case Command::oracle_check: detail::parse_oracle(b, s.oracle); break;
        case Command::star_demo: detail::parse_star(b, s.star); break;
        }
    } else if (cmd == Command::sweep) {
        throw ConfigError("sweep: required key is missing");
    }

    bool single_curve = cmd == Command::spectrum || cmd == Command::field || cmd == Command::oracle_check ||
                        (cmd == Command::scatter && !s.scatter.localization);
    if (single_curve) {
        if (!f.has("curve"))
            throw ConfigError("curve: required key is missing");
        s.curve = parse_curve(f.object("curve"));
        if (f.has("mesh"))
            detail::parse_mesh(f.object("mesh"), s.mesh);
    } else if (cmd == Command::scatter) {
        // The localization family carries its own curves; only the grading knobs apply.
        if (f.has("mesh"))
            detail::parse_mesh(f.object("mesh"), s.mesh);
    }
    f.finish();
    if (cmd == Command::oracle_check && !std::holds_alternative<EllipseSpec>(s.curve->shape))
        throw ConfigError("curve.kind: oracle-check needs an ellipse");
    return s;
}

/** Parses scenario text; syntax errors carry the line and column. */
inline Scenario parse_scenario_text(const std::string& text, Command cmd)
{
    Json j;
    try {
        j = Json::parse(text, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                          e.what());
    }
    return parse_scenario(j, cmd);
}

inline Scenario load_scenario(const std::filesystem::path& path, Command cmd)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read scenario file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_scenario_text(text.str(), cmd);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

/** Overrides the panel count used by the command. */
inline void override_panels(Scenario& s, int panels)
{
    if (panels < 4)
        throw ConfigError("panel override must be at least 4");
    s.mesh.panels = panels;
    s.sweep.options.initial_panels = panels;
    s.star.panels = panels;
}

/** The fully resolved scenario, defaults included, for the run manifest. */
inline Json to_json(const Scenario& s)
{
    Json j;
    j["version"] = s.version;
    j["command"] = to_string(s.command);
    j["seed"] = s.seed;
    Json mesh = {{"panels", s.mesh.panels}, {"graded", s.mesh.graded},
                 {"grade_threshold", s.mesh.grade_threshold}};
    switch (s.command) {
    case Command::spectrum:
        j["curve"] = to_json(*s.curve);
        j["mesh"] = mesh;
        j["spectrum"] = {{"cluster_tol", s.spectrum.cluster_tol},
                         {"normalization", to_string(s.spectrum.normalization)},
                         {"traces", s.spectrum.traces}};
        break;
    case Command::field:
        j["curve"] = to_json(*s.curve);
        j["mesh"] = mesh;
        j["field"] = {{"rank", s.field.rank}, {"k", s.field.k}, {"window", detail::box_json(s.field.window)},
                      {"nx", s.field.nx}, {"ny", s.field.ny}, {"cluster_tol", s.field.cluster_tol}};
        break;
    case Command::sweep: {
        const auto& fam = s.sweep.family;
        Json family = {{"kind", fam.kind}};
        if (fam.kind == "ellipse") {
            family["R0"] = fam.R0;
            family["rho0"] = fam.rho0;
        } else {
            family["n_sym"] = fam.n_sym;
            family["concave"] = fam.concave;
            family["profile"] = to_string(fam.profile);
            family["kappa"] = fam.kappa;
        }
        const auto& o = s.sweep.options;
        Json tracks = Json::array();
        for (const auto& t : o.tracks)
            tracks.push_back(t.label());
        j["sweep"] = {{"family", family},
                      {"tracks", tracks},
                      {"observable", o.observable ? Json(to_string(*o.observable)) : Json(nullptr)},
                      {"initial_panels", o.initial_panels},
                      {"graded", o.graded},
                      {"convergence_tol", o.convergence_tol},
                      {"node_cap", o.node_cap},
                      {"cluster_tol", o.cluster_tol},
                      {"normalization", to_string(o.normalization)}};
        break;
    }
    case Command::scatter: {
        const auto& c = s.scatter;
        if (s.curve)
            j["curve"] = to_json(*s.curve);
        j["mesh"] = mesh;
        Json windows = Json::array();
        for (const auto& b : c.windows)
            windows.push_back(detail::box_json(b));
        Json sc = {{"eps", c.eps},
                   {"delta", c.delta},
                   {"k", c.k},
                   {"direction", {c.direction.x(), c.direction.y()}},
                   {"windows", windows},
                   {"nx", c.nx},
                   {"ny", c.ny},
                   {"nodes_per_wavelength", c.nodes_per_wavelength},
                   {"curvature_resolution", c.curvature_resolution},
                   {"node_cap", c.node_cap},
                   {"rcond_warning", c.rcond_warning},
                   {"energy_grid", c.energy_grid},
                   {"zoom_halfwidth", c.zoom_halfwidth}};
        if (c.localization)
            sc["localization"] = {{"n_sym", c.localization->family.n_sym},
                                  {"concave", c.localization->family.concave},
                                  {"profile", to_string(c.localization->family.profile)},
                                  {"kappa", c.localization->kappa},
                                  {"diameter", c.localization->options.target_diameter},
                                  {"grid", c.localization->options.grid}};
        j["scatter"] = sc;
        break;
    }
    case Command::oracle_check:
        j["curve"] = to_json(*s.curve);
        j["mesh"] = mesh;
        j["oracle"] = {{"n_max", s.oracle.n_max}, {"tolerance", s.oracle.tolerance},
                       {"cluster_tol", s.oracle.cluster_tol}};
        break;
    case Command::star_demo: {
        const auto& o = s.star;
        j["star"] = {{"eps", o.eps},
                     {"delta", o.delta},
                     {"k", o.k},
                     {"direction", {o.direction.x(), o.direction.y()}},
                     {"amplitude", o.amplitude},
                     {"exponent", o.exponent},
                     {"lobes", o.lobes},
                     {"panels", o.panels},
                     {"grade_threshold", o.grade_threshold},
                     {"spectrum", o.spectrum},
                     {"grid", o.grid}};
        break;
    }
    }
    return j;
}

} // namespace nploc
