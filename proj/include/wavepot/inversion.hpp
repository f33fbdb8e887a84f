#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wavepot/conjugate.hpp"
#include "wavepot/cutoff.hpp"
#include "wavepot/grid.hpp"
#include "wavepot/wave.hpp"
#include "wavepot/weight.hpp"

namespace wavepot {

enum class Variant { alg3, alg4 };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

struct InversionConfig {
    SpaceTimeGrid grid;       // inverse grid
    CarlemanWeight weight{1.0, -0.3, 0.99, 100.0};
    double m = 3.0;           // a priori bound
    double alpha_floor = 0.0; // nodes with |w0| below it are reset to 0
    double eps_stop = 1e-5;
    int max_iter = 10;
    Variant variant = Variant::alg4;
    double theta = 0.0;       // scheme for the iterate problem
    bool penalty = true;
    double oterm_coeff = 2.0;
    double sh_bound = 1.0;
    std::optional<int> ncut;
    int smoothing_passes = 0;         // applied to the data and to every model flux
    bool zero_phase_smoothing = true; // kernel unit is the inverse time step
    bool interpolate_dead_zone = false;

    void validate() const;
};

struct IterationRecord {
    int k = 0;
    double rel_change = 0.0;
    double weighted_error = 0.0;  // NaN without a reference
    double sup_update = 0.0;
    double hf_energy = 0.0;       // of the new iterate
    double seconds = 0.0;
};

struct ReconstructionResult {
    PotentialField q;
    std::vector<IterationRecord> history;
    std::vector<Eigen::VectorXd> iterates;  // q^0, q^1, ...
    bool converged = false;
    bool diverged = false;
    std::string stop_reason;
    double weighted_error_shift = 0.0;  // max_x phi(0, x)
    std::vector<std::string> warnings;
};

/// Pointwise clamp to [-m, m].
PotentialField truncate_Tm(const PotentialField& q, double m);

/// q + rate / w0 where |w0| >= alpha_floor, 0 elsewhere, then truncated.
/// w0 holds the interior nodes only.
PotentialField update_potential(const PotentialField& q, const Eigen::VectorXd& rate, const Eigen::VectorXd& w0,
                                double alpha_floor, double m);

/// Fills nodes with |w0| < alpha_floor by linear interpolation between the
/// nearest passing nodes (constant beyond the outermost ones).
Eigen::VectorXd interpolate_dead_zone(const Eigen::VectorXd& q, const Eigen::VectorXd& w0, double alpha_floor);

/// h sum_j exp(2 s (phi(0, x_j) - max_x phi(0, x))) |q_j - Q_j|^2.
double weighted_error(const PotentialField& q, const PotentialField& ref, const CarlemanWeight& w,
                      const SpaceTimeGrid& g);

/// Squared norm of the second differences q_{j+1} - 2 q_j + q_{j-1} over
/// the interior triples.
double hf_energy(const Eigen::VectorXd& q);

/// Forward differences d_tau^+ d_h^+ of cutoff(phi) d_t w on n = 0..Nt-1,
/// j = 0..N; the remaining entries are zero.
Field compute_nu_tilde(const Trajectory& w, const CarlemanWeight& weight,
                       const std::function<double(double)>& cutoff);

using IterationObserver = std::function<void(const IterationRecord&, const Eigen::VectorXd&)>;

/// Fixed-point reconstruction. `problem` supplies the source, boundary and
/// initial data on the inverse grid; its potential is ignored. The
/// measurement is resampled onto the inverse time grid when needed.
ReconstructionResult run_reconstruction(const InversionConfig& cfg, const FluxSeries& measurement,
                                        const WaveProblem& problem, const PotentialField& q0,
                                        const PotentialField* reference = nullptr,
                                        const IterationObserver& observer = {});

} // namespace wavepot
