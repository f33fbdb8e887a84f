// Command-line driver: simulate, invert, verify, sweep.
//
// Exit codes: 0 success, 1 hard error (bad input, geometry, solver),
// 2 verify found a failing property.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wavepot/commands.hpp"
#include "wavepot/error.hpp"

namespace {

constexpr int exit_error = 1;
constexpr int exit_verify_failed = 2;

void print_warnings(const nlohmann::ordered_json& doc)
{
    if (doc.contains("warnings"))
        for (const auto& w : doc["warnings"])
            std::cerr << "warning: " << w.get<std::string>() << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Potential reconstruction for the 1-D wave equation from a boundary flux"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);

    // One flag per configuration key; applied after the file.
    std::map<std::string, std::string> overrides;
    for (const auto& key : wavepot::RunConfig::keys())
        app.add_option("--" + key, overrides[key], "configuration key " + key);

    auto* simulate = app.add_subcommand("simulate", "fine-grid direct solve; writes measurement files");

    wavepot::InvertOptions invert_options;
    auto* invert = app.add_subcommand("invert", "reconstruct the potential from a measurement");
    invert->add_option("--measurement", invert_options.measurement, "measurement CSV (t, flux)");
    invert->add_flag("--dump-matrix", invert_options.dump_matrix, "write the initial system matrix");

    bool break_oterm = false;
    auto* verify = app.add_subcommand("verify", "run the numerical property suite");
    // Test hook: zero region-O coefficient, to show which checks notice it.
    verify->add_flag("--break-oterm", break_oterm)->group("");

    std::string axis;
    std::vector<double> values;
    auto* sweep = app.add_subcommand("sweep", "one reconstruction per axis value");
    sweep->add_option("--axis", axis, "s, noise, cfl or N")->required();
    sweep->add_option("--values", values, "comma-separated axis values")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_error;
    }

    try {
        wavepot::RunConfig cfg;
        if (!config_path.empty())
            cfg.load(config_path);
        for (const auto& key : wavepot::RunConfig::keys())
            if (app.count("--" + key))
                cfg.set(key, overrides[key]);

        if (*simulate) {
            const auto doc = wavepot::cmd_simulate(cfg);
            print_warnings(doc);
            std::printf("wrote %s (%d time samples)\n", cfg.out.c_str(), doc["grid"]["Nt"].get<int>() + 1);
        } else if (*invert) {
            const auto doc = wavepot::cmd_invert(cfg, invert_options);
            print_warnings(doc);
            std::printf("%s after %d iterations", doc["stop_reason"].get<std::string>().c_str(),
                        doc["iterations"].get<int>());
            if (doc.contains("rel_l2_error"))
                std::printf(", relative L2 error %.3e", doc["rel_l2_error"].get<double>());
            std::printf("\n");
        } else if (*verify) {
            if (break_oterm)
                cfg.oterm_coeff = 0.0;
            const auto report = wavepot::cmd_verify(cfg);
            for (const auto& c : report.checks)
                std::printf("%-28s %s  value=%.3e  tol=%.3e%s%s\n", c.name.c_str(), c.passed ? "PASS" : "FAIL",
                            c.value, c.tolerance, c.detail.empty() ? "" : "  ", c.detail.c_str());
            for (const auto& w : report.warnings)
                std::cerr << "warning: " << w << "\n";
            return report.passed() ? 0 : exit_verify_failed;
        } else if (*sweep) {
            const auto doc = wavepot::cmd_sweep(cfg, wavepot::parse_sweep_axis(axis), values);
            print_warnings(doc);
            std::printf("wrote %zu runs to %s/sweep.csv\n", values.size(), cfg.out.c_str());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
    return 0;
}
