// Scenario-driven command-line front end.
//
// Exit codes: 0 success, 1 numeric failure, 2 config error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "cavio/runner.hpp"

namespace {

struct Common {
    std::string config_path;
    std::string out_dir;
    std::string format;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "scenario config file")->required();
    cmd->add_option("--out", c.out_dir, "output directory (overrides config)");
    cmd->add_option("--format", c.format, "restrict outputs to csv|json|grid");
}

cavio::ScenarioConfig load(const Common& c) {
    auto cfg = cavio::ScenarioConfig::from_file(cavio::ConfigFile::load(c.config_path));
    if (!c.format.empty()) {
        if (c.format != "csv" && c.format != "json" && c.format != "grid")
            throw cavio::ConfigError("--format must be csv|json|grid");
        cfg.formats = {c.format};
    }
    return cfg;
}

int report(const cavio::RunSummary& sum) {
    for (const auto& m : sum.messages) std::fprintf(stderr, "note: %s\n", m.c_str());
    for (const auto& f : sum.files) std::printf("wrote %s\n", f.string().c_str());
    return sum.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"absorbing-cavity resonance, extraction and Wigner-map toolkit"};
    app.require_subcommand(1);

    Common c_res, c_ext, c_cat, c_map;
    auto* res = app.add_subcommand("resonances", "locate modes, report rates, sweep |D1|^-2");
    add_common(res, c_res);
    auto* ext = app.add_subcommand("extraction", "eta(t) curve and mode couplings");
    add_common(ext, c_ext);
    auto* cat = app.add_subcommand("cat-demo", "cat-state output Wigner function");
    add_common(cat, c_cat);
    auto* map = app.add_subcommand("wigner-map", "general channel map between Wigner grids");
    add_common(map, c_map);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    try {
        if (res->parsed()) return report(cavio::run_resonances(load(c_res), c_res.out_dir));
        if (ext->parsed()) return report(cavio::run_extraction(load(c_ext), c_ext.out_dir));
        if (cat->parsed()) return report(cavio::run_cat_demo(load(c_cat), c_cat.out_dir));
        if (map->parsed()) return report(cavio::run_wigner_map(load(c_map), c_map.out_dir));
    } catch (const cavio::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const cavio::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
