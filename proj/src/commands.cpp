#include "wavepot/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>

#include "wavepot/error.hpp"
#include "wavepot/inversion.hpp"
#include "wavepot/io.hpp"
#include "wavepot/measurement.hpp"

namespace wavepot {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path prepare_out(const RunConfig& cfg)
{
    fs::path out(cfg.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec)
        throw Error("cannot create output directory " + cfg.out + ": " + ec.message());
    write_text((out / "config.txt").string(), cfg.dump());
    return out;
}

void write_json(const fs::path& path, const Json& doc)
{
    write_text(path.string(), doc.dump(2) + "\n");
}

// JSON has no NaN; missing values are written as null.
Json number(double v)
{
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json grid_json(const SpaceTimeGrid& g)
{
    return {{"L", g.L}, {"T", g.T}, {"N", g.N}, {"h", g.h}, {"tau", g.tau}, {"Nt", g.Nt}, {"cfl", g.cfl}};
}

Json provenance_json(const Measurement& m)
{
    Json steps = Json::array();
    for (const auto& p : m.provenance) {
        Json step{{"kind", to_string(p.kind)}};
        if (p.kind == ProvenanceStep::Kind::noisy) {
            step["alpha"] = p.alpha;
            step["seed"] = p.seed;
        } else if (p.kind == ProvenanceStep::Kind::regularized) {
            step["passes"] = p.passes;
            step["unit"] = p.unit;
            step["zero_phase"] = p.zero_phase;
        }
        steps.push_back(step);
    }
    return steps;
}

void check_geometry_or_throw(const RunConfig& cfg, std::vector<std::string>& warnings)
{
    const auto report = check_geometry(cfg.L, cfg.T, cfg.x0, cfg.beta);
    if (report.hard_failure())
        throw GeometryError(report.describe());
    if (report.has_warnings())
        warnings.push_back(report.describe());
}

struct SimulatedData {
    Measurement clean;
    Measurement noisy;
    Measurement regularized;
    SpaceTimeGrid grid;
};

// The last inverse time level may lie past T; the fine data must reach it.
double inverse_end_time(const RunConfig& cfg)
{
    const auto g = cfg.inverse_grid();
    return std::max(cfg.T, g.t(g.Nt));
}

SimulatedData simulate_data(const RunConfig& cfg, double t_end)
{
    if (cfg.Q.empty())
        throw ConfigError("simulate needs the true potential Q");
    SimulatedData d;
    d.grid = SpaceTimeGrid::from_steps(cfg.L, t_end, cfg.direct_h, cfg.direct_tau);
    const auto truth = cfg.sample(cfg.Q, d.grid);
    d.clean = Measurement::clean(solve_wave_flux(cfg.problem(d.grid, truth), d.grid, cfg.direct_theta));
    d.noisy = add_noise(d.clean, {cfg.noise, cfg.seed});
    d.regularized = gaussian_regularize(d.noisy, cfg.effective_reg_passes(), {cfg.inverse_grid().tau, true});
    return d;
}

struct InversionRun {
    ReconstructionResult result;
    SpaceTimeGrid grid;
    std::optional<PotentialField> truth;
    double seconds = 0.0;
};

InversionRun invert_series(const RunConfig& cfg, const FluxSeries& data, const IterationObserver& observer = {})
{
    InversionRun run;
    const auto inv = cfg.inversion();
    run.grid = inv.grid;
    const double needed = run.grid.t(run.grid.Nt);
    if (data.end_time() < needed * (1.0 - 1e-9))
        throw ConfigError("measurement ends at t = " + std::to_string(data.end_time()) +
                          " before the last inverse time level " + std::to_string(needed));
    if (!cfg.Q.empty())
        run.truth = cfg.sample(cfg.Q, run.grid);
    const auto q0 = cfg.sample(cfg.q0, run.grid);
    const auto start = Clock::now();
    run.result = run_reconstruction(inv, data, cfg.problem(run.grid, q0), q0, run.truth ? &*run.truth : nullptr,
                                    observer);
    run.seconds = seconds_since(start);
    return run;
}

double relative_l2(const Eigen::VectorXd& q, const Eigen::VectorXd& ref)
{
    const double n = ref.norm();
    return (q - ref).norm() / (n > 0.0 ? n : 1.0);
}

} // namespace

Json config_json(const RunConfig& cfg)
{
    Json j = Json::object();
    for (const auto& key : RunConfig::keys())
        j[key] = cfg.get(key);
    return j;
}

Json cmd_simulate(const RunConfig& cfg)
{
    const auto start = Clock::now();
    Json doc;
    doc["config"] = config_json(cfg);
    std::vector<std::string> warnings;
    check_geometry_or_throw(cfg, warnings);
    const auto out = prepare_out(cfg);
    const auto d = simulate_data(cfg, inverse_end_time(cfg));

    Json files = Json::object();
    write_flux_csv((out / "measurement_clean.csv").string(), d.clean.flux);
    files["clean"] = {{"path", "measurement_clean.csv"}, {"provenance", provenance_json(d.clean)}};
    if (cfg.noise > 0.0) {
        write_flux_csv((out / "measurement_noisy.csv").string(), d.noisy.flux);
        write_flux_csv((out / "measurement_regularized.csv").string(), d.regularized.flux);
        files["noisy"] = {{"path", "measurement_noisy.csv"}, {"provenance", provenance_json(d.noisy)}};
        files["regularized"] = {{"path", "measurement_regularized.csv"},
                                {"provenance", provenance_json(d.regularized)}};
    }
    doc["grid"] = grid_json(d.grid);
    doc["alpha"] = cfg.noise;
    doc["seed"] = cfg.seed;
    doc["passes"] = cfg.effective_reg_passes();
    doc["files"] = files;
    doc["warnings"] = warnings;
    doc["seconds"] = seconds_since(start);
    write_json(out / "measurement.json", doc);
    return doc;
}

Json cmd_invert(const RunConfig& cfg, const InvertOptions& options)
{
    const auto start = Clock::now();
    std::vector<std::string> warnings;
    check_geometry_or_throw(cfg, warnings);
    const auto out = prepare_out(cfg);

    std::string path = options.measurement;
    if (path.empty())
        path = (out / (cfg.noise > 0.0 ? "measurement_noisy.csv" : "measurement_clean.csv")).string();
    const auto data = read_flux_csv(path);

    const auto g = cfg.inverse_grid();
    if (options.dump_matrix) {
        const auto q0 = cfg.sample(cfg.q0, g);
        SystemOptions so;
        so.penalty = cfg.penalty;
        so.oterm_coeff = cfg.oterm_coeff;
        so.sh_bound = cfg.sh_bound;
        write_matrix_coordinates(assemble_system({g, CarlemanWeight(cfg.L, cfg.x0, cfg.beta, cfg.s), q0.values}, so),
                                 (out / "matrix_q0.txt").string());
    }

    const auto run = invert_series(cfg, data);
    const auto& r = run.result;
    for (std::size_t k = 0; k < r.iterates.size(); ++k)
        write_potential_csv((out / ("potential_" + std::to_string(k) + ".csv")).string(), g, r.iterates[k]);
    write_potential_csv((out / "potential_final.csv").string(), g, r.q.values);
    if (run.truth)
        write_potential_csv((out / "potential_exact.csv").string(), g, run.truth->values);

    const auto n = static_cast<Eigen::Index>(r.history.size());
    Eigen::VectorXd k(n), rel(n), werr(n), sup(n), hf(n), secs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& h = r.history[static_cast<std::size_t>(i)];
        k[i] = h.k;
        rel[i] = h.rel_change;
        werr[i] = h.weighted_error;
        sup[i] = h.sup_update;
        hf[i] = h.hf_energy;
        secs[i] = h.seconds;
    }
    write_csv((out / "history.csv").string(),
              {"k", "rel_change", "weighted_error", "sup_update", "hf_energy", "seconds"},
              {k, rel, werr, sup, hf, secs});

    for (const auto& w : r.warnings)
        if (std::find(warnings.begin(), warnings.end(), w) == warnings.end())
            warnings.push_back(w);
    Json doc;
    doc["config"] = config_json(cfg);
    doc["measurement"] = path;
    doc["grid"] = grid_json(g);
    doc["converged"] = r.converged;
    doc["diverged"] = r.diverged;
    doc["stop_reason"] = r.stop_reason;
    doc["iterations"] = r.history.size();
    doc["smoothing_passes"] = cfg.effective_reg_passes();
    doc["final_rel_change"] = r.history.empty() ? Json(nullptr) : number(r.history.back().rel_change);
    if (run.truth) {
        doc["rel_l2_error"] = relative_l2(r.q.values, run.truth->values);
        doc["sup_error"] = (r.q.values - run.truth->values).cwiseAbs().maxCoeff();
    }
    doc["weighted_error_shift"] = r.weighted_error_shift;
    doc["warnings"] = warnings;
    doc["timings"] = {{"reconstruction_seconds", run.seconds}, {"total_seconds", seconds_since(start)}};
    write_json(out / "summary.json", doc);
    return doc;
}

Json to_json(const VerifyReport& report)
{
    Json checks = Json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"value", number(c.value)},
                          {"tolerance", c.tolerance},
                          {"detail", c.detail}});
    return {{"passed", report.passed()},
            {"oterm_coeff", report.oterm_coeff},
            {"checks", checks},
            {"warnings", report.warnings}};
}

VerifyReport cmd_verify(const RunConfig& cfg)
{
    const auto out = prepare_out(cfg);
    auto report = run_verify_suite(cfg);
    Json doc = to_json(report);
    doc["config"] = config_json(cfg);
    write_json(out / "verify.json", doc);
    return report;
}

SweepAxis parse_sweep_axis(const std::string& name)
{
    if (name == "s")
        return SweepAxis::s;
    if (name == "noise")
        return SweepAxis::noise;
    if (name == "cfl" || name == "CFL")
        return SweepAxis::cfl;
    if (name == "N")
        return SweepAxis::N;
    throw ConfigError("unknown sweep axis '" + name + "' (expected s, noise, cfl or N)");
}

std::string to_string(SweepAxis a)
{
    switch (a) {
    case SweepAxis::s: return "s";
    case SweepAxis::noise: return "noise";
    case SweepAxis::cfl: return "cfl";
    case SweepAxis::N: return "N";
    }
    return "?";
}

Json cmd_sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values)
{
    if (values.empty())
        throw ConfigError("sweep: empty list of axis values");
    const auto start = Clock::now();
    std::vector<std::string> warnings;
    check_geometry_or_throw(cfg, warnings);
    const auto out = prepare_out(cfg);

    std::vector<RunConfig> configs;
    for (double v : values) {
        RunConfig c = cfg;
        switch (axis) {
        case SweepAxis::s: c.s = v; break;
        case SweepAxis::noise: c.noise = v; break;
        case SweepAxis::cfl: c.cfl = v; break;
        case SweepAxis::N: {
            const double n = std::round(v);
            if (n < 1.0 || std::abs(n - v) > 1e-9)
                throw ConfigError("sweep: N values must be positive integers");
            c.tau = c.cfl * c.L / (n + 1.0);
            break;
        }
        }
        c.inversion().validate();
        configs.push_back(c);
    }

    // The clean fine-grid flux does not depend on any axis.
    double t_end = cfg.T;
    for (const auto& c : configs)
        t_end = std::max(t_end, inverse_end_time(c));
    const auto clean = simulate_data(cfg, t_end).clean;

    auto one = [&clean](const RunConfig& c) {
        const auto noisy = add_noise(clean, {c.noise, c.seed});
        return invert_series(c, noisy.flux);
    };
    std::vector<std::future<InversionRun>> jobs;
    for (const auto& c : configs)
        jobs.push_back(std::async(std::launch::async, one, c));

    const auto n = static_cast<Eigen::Index>(values.size());
    Eigen::VectorXd value(n), iters(n), conv(n), div(n), rel(n), sup(n), change(n), hf(n), secs(n);
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto run = jobs[static_cast<std::size_t>(i)].get();
        const auto& r = run.result;
        value[i] = values[static_cast<std::size_t>(i)];
        iters[i] = static_cast<double>(r.history.size());
        conv[i] = r.converged ? 1.0 : 0.0;
        div[i] = r.diverged ? 1.0 : 0.0;
        rel[i] = run.truth ? relative_l2(r.q.values, run.truth->values) : std::numeric_limits<double>::quiet_NaN();
        sup[i] = run.truth ? (r.q.values - run.truth->values).cwiseAbs().maxCoeff()
                           : std::numeric_limits<double>::quiet_NaN();
        change[i] = r.history.empty() ? std::numeric_limits<double>::quiet_NaN() : r.history.back().rel_change;
        hf[i] = r.history.empty() ? 0.0 : r.history.back().hf_energy;
        secs[i] = run.seconds;
        write_potential_csv((out / ("sweep_" + std::to_string(i) + "_potential.csv")).string(), run.grid,
                            r.q.values);
        rows.push_back({{"value", value[i]},
                        {"stop_reason", r.stop_reason},
                        {"warnings", r.warnings},
                        {"grid", grid_json(run.grid)}});
    }
    write_csv((out / "sweep.csv").string(),
              {"value", "iterations", "converged", "diverged", "rel_l2_error", "sup_error", "final_rel_change",
               "hf_energy", "seconds"},
              {value, iters, conv, div, rel, sup, change, hf, secs});

    Json doc;
    doc["config"] = config_json(cfg);
    doc["axis"] = to_string(axis);
    doc["runs"] = rows;
    doc["warnings"] = warnings;
    doc["seconds"] = seconds_since(start);
    write_json(out / "sweep.json", doc);
    return doc;
}

} // namespace wavepot
