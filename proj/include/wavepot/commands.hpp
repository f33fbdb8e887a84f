#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavepot/config.hpp"
#include "wavepot/properties.hpp"

namespace wavepot {

// Each command writes into cfg.out (created when missing) and returns the
// JSON document it also stores there.

/// Fine-grid direct solve with the true potential, run up to the later of T
/// and the last time level of the inverse grid. Writes
/// measurement_clean.csv, and with noise > 0 measurement_noisy.csv and
/// measurement_regularized.csv, plus measurement.json and config.txt.
nlohmann::ordered_json cmd_simulate(const RunConfig& cfg);

struct InvertOptions {
    /// Measurement CSV (t, flux). Empty selects the noisy or clean file
    /// written by simulate into cfg.out.
    std::string measurement;
    bool dump_matrix = false;  // matrix_q0.txt for the initial iterate
};

/// Writes history.csv, potential_<k>.csv for k = 0.., potential_exact.csv
/// when Q is set, and summary.json.
nlohmann::ordered_json cmd_invert(const RunConfig& cfg, const InvertOptions& options = {});

/// Writes verify.json.
VerifyReport cmd_verify(const RunConfig& cfg);
nlohmann::ordered_json to_json(const VerifyReport& report);

enum class SweepAxis { s, noise, cfl, N };

SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis a);

/// One simulate-and-invert run per value, in parallel. Writes sweep.csv with
/// one row per value and sweep_<i>_potential.csv.
nlohmann::ordered_json cmd_sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values);

/// Config fields echoed as strings in key order.
nlohmann::ordered_json config_json(const RunConfig& cfg);

} // namespace wavepot
