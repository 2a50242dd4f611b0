#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nploc/runner.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv)
{
    CLI::App app {"Neumann-Poincare spectra, blow-up sweeps and plasmonic scattering"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string scenario_path;
    std::string out_dir = "out";
    int panels = 0;
    int verbosity = 0;
    app.add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("-p,--panels", panels, "Override the panel count of the scenario")
        ->check(CLI::Range(4, 1 << 20));
    app.add_flag("-v,--verbose", verbosity, "Print progress; repeat for more");

    struct Entry {
        nploc::Command command;
        const char* help;
    };
    const Entry entries[] = {
        {nploc::Command::spectrum, "NP spectrum and eigenfunction traces of one curve"},
        {nploc::Command::field, "Single-layer field of one eigenfunction on a grid"},
        {nploc::Command::sweep, "Eigenfunction blow-up across a curve family, with power-law fits"},
        {nploc::Command::scatter, "Plasmonic transmission problem, or a localization experiment"},
        {nploc::Command::oracle_check, "Compare an ellipse spectrum with its closed forms"},
        {nploc::Command::star_demo, "The twelve-cusp star lit far below resonance size"},
    };
    for (const auto& e : entries) {
        auto* sub = app.add_subcommand(nploc::to_string(e.command), e.help);
        auto* opt = sub->add_option("-s,--scenario,scenario", scenario_path, "Scenario file (JSON)")
                        ->check(CLI::ExistingFile);
        if (e.command != nploc::Command::star_demo)
            opt->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return nploc::exit_config;
    }

    auto command = nploc::parse_command(app.get_subcommands().front()->get_name());
    auto log = [verbosity](int level, const std::string& msg) {
        if (level <= verbosity)
            std::cerr << msg << '\n';
    };

    nploc::Scenario scenario;
    try {
        if (scenario_path.empty()) {
            scenario = nploc::parse_scenario(nploc::Json {{"version", nploc::scenario_version}}, command);
        } else {
            scenario = nploc::load_scenario(scenario_path, command);
        }
        if (panels > 0)
            nploc::override_panels(scenario, panels);
    } catch (const nploc::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return nploc::exit_config;
    }

    try {
        auto res = nploc::run_scenario(scenario, fs::path(out_dir), log);
        for (const auto& w : res.warnings)
            std::cerr << "warning: " << w << '\n';
        if (verbosity > 0)
            std::cerr << res.results.dump(2) << '\n';
        log(1, "status: " + std::string(nploc::to_string(res.status)));
        return nploc::exit_code(res.status);
    } catch (const nploc::Error& e) {
        int code = nploc::exit_code(e);
        std::cerr << (code == nploc::exit_config ? "config error: " : "numerical failure: ") << e.what()
                  << '\n';
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
