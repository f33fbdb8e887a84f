#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavepot/expr.hpp"
#include "wavepot/grid.hpp"
#include "wavepot/inversion.hpp"
#include "wavepot/wave.hpp"

namespace wavepot {

/// Every setting of a run. Text format: one `key = value` per line, `#`
/// starts a comment, unknown keys are errors.
struct RunConfig {
    // geometry and weight
    double L = 1.0;
    double T = 1.3;
    double x0 = -0.3;
    double beta = 0.99;
    double s = 100.0;
    double m = 3.0;

    // data of the direct problem, as expressions
    std::string f = "0";          // source f(t, x)
    std::string f_partial = "2";  // Dirichlet data f_partial(t, x) at x = 0 and x = L
    std::string w0 = "2 + sin(pi*x)";
    std::string w1 = "0";
    // Potentials accept an expression or "file:<path>" naming a CSV (x, q).
    std::string Q = "sin(2*pi*x)"; // true potential; empty disables error tracking
    std::string q0 = "0";          // initial guess

    // direct (measurement) solve
    double direct_tau = 0.00033;
    double direct_h = 0.00025;
    double direct_theta = 1.0;

    // inverse solve
    double tau = 0.01;
    double cfl = 1.0;
    double theta = 0.0;

    // measurement
    double noise = 0.0;
    std::uint64_t seed = 1;
    int reg_passes = -1;  // negative selects one pass per percent of noise

    // algorithm
    std::string variant = "alg4";
    bool penalty = true;
    int ncut = 0;  // 0 selects the default block count
    double alpha_floor = 0.0;
    double eps_stop = 1e-5;
    int max_iter = 10;
    double oterm_coeff = 2.0;
    double sh_bound = 1.0;
    bool interpolate_dead_zone = false;

    std::string out = "out";

    /// Sets one field from its textual value.
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    static const std::vector<std::string>& keys();

    /// Reads `key = value` lines on top of the current values.
    void load(const std::string& path);
    void load_text(const std::string& text, const std::string& origin = "<text>");
    /// Lines in key order, parseable by load_text.
    std::string dump() const;

    int effective_reg_passes() const;
    SpaceTimeGrid direct_grid() const;
    SpaceTimeGrid inverse_grid() const;
    InversionConfig inversion() const;
    /// Direct problem data sampled on g with the potential q.
    WaveProblem problem(const SpaceTimeGrid& g, const PotentialField& q) const;
    PotentialField sample(const std::string& expression, const SpaceTimeGrid& g) const;
};

} // namespace wavepot
