#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "nploc/scenario.hpp"

namespace nploc {

enum class RunStatus { ok, not_converged, check_failed };

inline const char* to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::not_converged: return "not_converged";
    case RunStatus::check_failed: return "check_failed";
    }
    return "?";
}

// Process exit codes of the command-line front end.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_numerical = 3;
inline constexpr int exit_check_failed = 4;

inline int exit_code(RunStatus s)
{
    switch (s) {
    case RunStatus::ok: return exit_ok;
    case RunStatus::not_converged: return exit_numerical;
    case RunStatus::check_failed: return exit_check_failed;
    }
    return exit_numerical;
}

/** Errors caused by the scenario map to 2, everything else the library raises to 3. */
inline int exit_code(const Error& e)
{
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidParameter*>(&e) ||
        dynamic_cast<const InvalidGeometry*>(&e))
        return exit_config;
    return exit_numerical;
}

struct RunResult {
    RunStatus status = RunStatus::ok;
    std::vector<std::string> outputs; // file names relative to the output directory
    std::vector<std::string> warnings;
    Json results = Json::object();
};

// Progress callback: verbosity level of the message, then the message.
using RunLog = std::function<void(int, const std::string&)>;

namespace detail {

class OutputDir {
public:
    OutputDir(std::filesystem::path dir, RunResult& res) : dir_(std::move(dir)), res_(res)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_))
            throw ConfigError("cannot create output directory " + dir_.string());
    }

    template <class Fn>
    void write(const std::string& name, Fn&& fn)
    {
        std::ofstream os(dir_ / name, std::ios::binary);
        if (!os)
            throw ConfigError("cannot write " + (dir_ / name).string());
        fn(os);
        if (!os)
            throw ConfigError("write failed for " + (dir_ / name).string());
        res_.outputs.push_back(name);
    }

    void grid(const std::string& stem, const FieldGrid& g)
    {
        write(stem + ".csv", [&](std::ostream& os) { write_grid_csv(os, g); });
        ImageScale sc;
        write(stem + ".pgm", [&](std::ostream& os) { sc = write_grid_pgm(os, g); });
        write(stem + ".pgm.txt", [&](std::ostream& os) { write_pgm_sidecar(os, g, sc); });
    }

private:
    std::filesystem::path dir_;
    RunResult& res_;
};

inline PanelMesh scenario_mesh(const Curve& c, const MeshSettings& s)
{
    int panels = s.panels > 0 ? s.panels : default_panel_count(kappa_max_of(c));
    MeshOptions opt;
    opt.graded = s.graded;
    opt.grade_threshold = s.grade_threshold;
    return build_mesh(c, panels, opt);
}

inline Json mesh_json(const PanelMesh& m)
{
    return {{"panels", m.panel_count()}, {"nodes", m.size()}, {"perimeter", m.perimeter}};
}

inline std::string short_text(double v)
{
    std::ostringstream s;
    s << std::setprecision(4) << v;
    return s.str();
}

inline void add_warnings(RunResult& res, const std::vector<std::string>& w)
{
    res.warnings.insert(res.warnings.end(), w.begin(), w.end());
}

inline void run_spectrum(const Scenario& s, OutputDir& out, RunResult& res, const RunLog& log)
{
    Curve c = make_curve(*s.curve);
    auto m = scenario_mesh(c, s.mesh);
    log(1, "spectrum: " + std::to_string(m.size()) + " nodes");
    SpectralOptions so;
    so.cluster_tol = s.spectrum.cluster_tol;
    so.normalization = s.spectrum.normalization;
    auto pairs = eigendecompose(assemble_np(m), m, so);
    for (int r : s.spectrum.traces)
        if (static_cast<std::size_t>(r) >= pairs.size())
            throw ConfigError("spectrum.traces: rank " + std::to_string(r) + " exceeds the " +
                              std::to_string(pairs.size()) + " eigenvalues of the mesh");
    double kappa = kappa_max_of(c);
    out.write("spectrum.csv", [&](std::ostream& os) { write_spectrum_csv(os, pairs, kappa); });
    for (int r : s.spectrum.traces)
        out.write("trace_rank" + std::to_string(r) + ".csv",
                  [&](std::ostream& os) { write_trace_csv(os, make_trace(m, pairs[r].samples)); });
    Json leading = Json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(pairs.size(), 8); ++i)
        leading.push_back(pairs[i].lambda.real());
    double imag = max_imag(pairs);
    if (imag > spectral_zero_floor)
        res.warnings.push_back("largest imaginary part " + short_text(imag) + " exceeds the zero floor");
    res.results = {{"mesh", mesh_json(m)}, {"kappa_max", kappa}, {"leading", leading}, {"max_imag", imag}};
}

inline void run_field(const Scenario& s, OutputDir& out, RunResult& res, const RunLog& log)
{
    const auto& f = s.field;
    Curve c = make_curve(*s.curve);
    auto m = scenario_mesh(c, s.mesh);
    log(1, "field: " + std::to_string(m.size()) + " nodes");
    SpectralOptions so;
    so.cluster_tol = f.cluster_tol;
    auto pairs = eigendecompose(assemble_np(m), m, so);
    if (static_cast<std::size_t>(f.rank) >= pairs.size())
        throw ConfigError("field.rank: rank " + std::to_string(f.rank) + " exceeds the " +
                          std::to_string(pairs.size()) + " eigenvalues of the mesh");
    auto g = render_field(m, pairs[f.rank].samples, f.window, f.nx, f.ny, f.k);
    out.grid("field", g);
    Json residual = nullptr;
    try {
        residual = f.k == 0.0 ? harmonicity_check(g) : laplacian_residual(g, f.k * f.k, CellMask::exterior);
    } catch (const InsufficientGrid& e) {
        res.warnings.push_back(std::string("no Helmholtz residual: ") + e.what());
    }
    res.results = {{"mesh", mesh_json(m)},
                   {"lambda", pairs[f.rank].lambda.real()},
                   {"source", g.source},
                   {"interior_residual", f.k == 0.0 ? residual : Json(nullptr)},
                   {"exterior_residual", f.k == 0.0 ? Json(nullptr) : residual}};
}

inline void run_sweep_command(const Scenario& s, OutputDir& out, RunResult& res, const RunLog& log)
{
    const auto& fam = s.sweep.family;
    std::vector<Curve> curves;
    if (fam.kind == "ellipse")
        for (double rho : fam.rho0)
            curves.push_back(make_ellipse(fam.R0, rho));
    else
        for (double kappa : fam.kappa)
            curves.push_back(make_bump_family(fam.n_sym, kappa, fam.concave, fam.profile));
    log(1, "sweep: " + std::to_string(curves.size()) + " members");
    auto recs = run_sweep(curves, s.sweep.options);
    out.write("sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, recs); });
    std::vector<LabeledFit> fits;
    Json per_track = Json::object();
    for (const auto& t : s.sweep.options.tracks) {
        auto tr = track_records(recs, t.label());
        auto fit = fit_power_law(tr);
        fits.push_back({t.label(), fit});
        per_track[t.label()] = {{"p", fit.p}, {"ln_alpha", fit.ln_alpha},
                                {"strictly_increasing", strictly_increasing(tr)}};
        log(1, "track " + t.label() + ": p = " + short_text(fit.p));
    }
    out.write("fit.csv", [&](std::ostream& os) { table_report(os, fits); });
    std::size_t unconverged = 0;
    for (const auto& r : recs)
        if (!r.converged) {
            ++unconverged;
            res.warnings.push_back("track " + r.track + " at kappa_max " + short_text(r.kappa_max) +
                                   " did not converge (" + std::to_string(r.nodes) + " nodes)");
        }
    if (unconverged > 0)
        res.status = RunStatus::not_converged;
    res.results = {{"tracks", per_track}, {"records", recs.size()}, {"unconverged", unconverged}};
}

inline ScatterConfig scatter_config(const Scenario& s, Curve c)
{
    const auto& p = s.scatter;
    ScatterConfig cfg(std::move(c));
    cfg.eps = p.eps;
    cfg.delta = p.delta;
    cfg.k = p.k;
    cfg.direction = p.direction;
    cfg.windows = p.windows;
    cfg.grid_nx = p.nx;
    cfg.grid_ny = p.ny;
    cfg.panels = s.mesh.panels;
    cfg.graded = s.mesh.graded;
    cfg.grade_threshold = s.mesh.grade_threshold;
    cfg.nodes_per_wavelength = p.nodes_per_wavelength;
    cfg.curvature_resolution = p.curvature_resolution;
    cfg.node_cap = p.node_cap;
    cfg.rcond_warning = p.rcond_warning;
    return cfg;
}

inline void run_localization(const Scenario& s, OutputDir& out, RunResult& res, const RunLog& log)
{
    const auto& loc = *s.scatter.localization;
    auto family = [f = loc.family](double kappa) {
        return make_bump_family(f.n_sym, kappa, f.concave, f.profile);
    };
    auto tmpl = scatter_config(s, make_circle(1.0));
    log(1, "localization: " + std::to_string(loc.kappa.size()) + " members");
    auto rows = localization_experiment(family, loc.kappa, tmpl, loc.options);
    std::vector<RunSummaryRow> summary;
    Json ratios = Json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        RunSummaryRow row;
        row.label = "member" + std::to_string(i);
        row.kappa_max = r.kappa_max;
        row.energy = r.energy;
        row.coverage = r.coverage;
        row.enhancement = std::max(r.zoom_max, r.elsewhere_max);
        row.localization_ratio = r.ratio;
        row.rcond = r.rcond;
        row.nodes = r.nodes;
        summary.push_back(row);
        ratios.push_back(r.ratio);
        add_warnings(res, r.warnings);
        if (r.grids.size() == 2) {
            out.grid("member" + std::to_string(i) + "_global", r.grids[0]);
            out.grid("member" + std::to_string(i) + "_zoom", r.grids[1]);
        }
    }
    out.write("localization.csv", [&](std::ostream& os) {
        os.precision(17);
        os << "kappa_max,scale,zoom_max,elsewhere_max,ratio,peak_x,peak_y,peak_panels,rcond,nodes\n";
        for (const auto& r : rows)
            os << r.kappa_max << ',' << r.scale << ',' << r.zoom_max << ',' << r.elsewhere_max << ','
               << r.ratio << ',' << r.peak.x() << ',' << r.peak.y() << ',' << r.peak_panels << ','
               << r.rcond << ',' << r.nodes << '\n';
    });
    out.write("run_summary.csv", [&](std::ostream& os) { write_run_summary(os, summary); });
    bool increasing = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
        increasing = increasing && rows[i].ratio > rows[i - 1].ratio;
    res.results = {{"localization_ratio", ratios}, {"increasing", increasing}};
}

inline void run_scatter(const Scenario& s, OutputDir& out, RunResult& res, const RunLog& log)
{
    if (s.scatter.localization) {
        run_localization(s, out, res, log);
        return;
    }
    Curve c = make_curve(*s.curve);
    auto sol = solve_transmission(scatter_config(s, c));
    log(1, "scatter: " + std::to_string(sol.mesh.size()) + " nodes, rcond " + short_text(sol.rcond));
    render_windows(sol);
    add_warnings(res, sol.warnings);
    BoundaryTrace tr {sol.mesh.arclength, sol.mesh.t, sol.boundary, sol.normal_derivative};
    out.write("boundary.csv", [&](std::ostream& os) { write_trace_csv(os, tr); });
    for (std::size_t i = 0; i < sol.grids.size(); ++i)
        out.grid("window" + std::to_string(i), sol.grids[i]);

    RunSummaryRow row;
    row.label = c.name().empty() ? "scatter" : c.name();
    row.kappa_max = kappa_max_of(c);
    row.enhancement = boundary_enhancement(sol);
    row.localization_ratio = localize(sol, s.scatter.zoom_halfwidth).ratio;
    row.rcond = sol.rcond;
    row.nodes = sol.mesh.size();
    if (s.scatter.energy_grid > 0) {
        auto e = energy_proxy(sol, s.scatter.energy_grid);
        row.energy = e.energy;
        row.coverage = e.coverage;
        add_warnings(res, e.warnings);
    }
    out.write("run_summary.csv", [&](std::ostream& os) { write_run_summary(os, {row}); });
    auto resid = transmission_residual(sol);
    res.results = {{"mesh", mesh_json(sol.mesh)},
                   {"kc", {sol.kc.real(), sol.kc.imag()}},
                   {"rcond", sol.rcond},
                   {"enhancement", row.enhancement},
                   {"localization_ratio", row.localization_ratio},
                   {"energy", row.energy},
                   {"coverage", row.coverage},
                   {"residual_value", resid.value},
                   {"residual_flux", resid.flux}};
}

inline void run_oracle_check(const Scenario& s, OutputDir& out, RunResult& res, const RunLog& log)
{
    const auto& spec = std::get<EllipseSpec>(s.curve->shape);
    Curve c = make_curve(*s.curve);
    auto m = scenario_mesh(c, s.mesh);
    log(1, "oracle-check: " + std::to_string(m.size()) + " nodes");
    SpectralOptions so;
    so.cluster_tol = s.oracle.cluster_tol;
    auto pairs = eigendecompose(assemble_np(m), m, so);
    auto rows = match_oracle(pairs, m, EllipseOracle(spec.R0 * s.curve->scale, spec.rho0), s.oracle.n_max);
    double worst = 0.0;
    for (const auto& r : rows)
        worst = std::max(worst, r.eigenvalue_error);
    out.write("oracle.csv", [&](std::ostream& os) {
        os.precision(17);
        os << "n,sign,expected,re,im,eigenvalue_error,subspace_angle,l2_distance,rank,passed\n";
        for (const auto& r : rows)
            os << r.n << ',' << r.sign << ',' << r.expected << ',' << r.computed.real() << ','
               << r.computed.imag() << ',' << r.eigenvalue_error << ',' << r.subspace_angle << ','
               << r.l2_distance << ',' << r.rank << ',' << (r.eigenvalue_error <= s.oracle.tolerance)
               << '\n';
    });
    bool passed = worst <= s.oracle.tolerance;
    if (!passed)
        res.status = RunStatus::check_failed;
    res.results = {{"mesh", mesh_json(m)}, {"max_error", worst}, {"passed", passed}};
}

inline void run_star(const Scenario& s, OutputDir& out, RunResult& res, const RunLog& log)
{
    log(1, "star-demo: solving");
    auto rep = star_demo(s.star);
    add_warnings(res, rep.warnings);
    out.write("star_report.csv", [&](std::ostream& os) { write_star_report(os, rep); });
    if (!rep.grids.empty())
        out.grid("star_field", rep.grids.front());
    double worst = 0.0;
    for (const auto& p : rep.peaks)
        worst = std::max(worst, p.panels);
    res.results = {{"wavelength", rep.wavelength_text},
                   {"d_tilde", rep.d_tilde_text},
                   {"subwavelength_ratio", rep.subwavelength_ratio},
                   {"peaks", rep.peaks.size()},
                   {"max_peak_panels", worst},
                   {"rcond", rep.rcond},
                   {"nodes", rep.nodes}};
}

} // namespace detail

/**
 * Runs one scenario and writes its outputs into dir, manifest.json last.
 * A library error still leaves a manifest with status "error" and is then
 * rethrown.
 */
inline RunResult run_scenario(const Scenario& s, const std::filesystem::path& dir, const RunLog& log = {})
{
    RunLog say = log ? log : RunLog([](int, const std::string&) {});
    RunResult res;
    detail::OutputDir out(dir, res);
    auto manifest = [&](const std::string& status) {
        return Json {{"schema_version", scenario_version},
                     {"command", to_string(s.command)},
                     {"status", status},
                     {"scenario", to_json(s)},
                     {"results", res.results},
                     {"warnings", res.warnings},
                     {"outputs", res.outputs}};
    };
    try {
        switch (s.command) {
        case Command::spectrum: detail::run_spectrum(s, out, res, say); break;
        case Command::field: detail::run_field(s, out, res, say); break;
        case Command::sweep: detail::run_sweep_command(s, out, res, say); break;
        case Command::scatter: detail::run_scatter(s, out, res, say); break;
        case Command::oracle_check: detail::run_oracle_check(s, out, res, say); break;
        case Command::star_demo: detail::run_star(s, out, res, say); break;
        }
    } catch (const Error& e) {
        Json m = manifest("error");
        m["error"] = e.what();
        out.write("manifest.json", [&](std::ostream& os) { os << m.dump(2) << '\n'; });
        throw;
    }
    out.write("manifest.json", [&](std::ostream& os) { os << manifest(to_string(res.status)).dump(2) << '\n'; });
    return res;
}

} // namespace nploc
