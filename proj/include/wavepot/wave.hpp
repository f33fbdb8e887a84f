#pragma once

#include <functional>
#include <limits>

#include <Eigen/Core>

#include "wavepot/grid.hpp"

namespace wavepot {

/// Nodal values of a potential on the interior nodes j = 1..N, stored at
/// index j - 1, together with its a priori bound.
struct PotentialField {
    Eigen::VectorXd values;
    double bound = std::numeric_limits<double>::infinity();

    int size() const { return static_cast<int>(values.size()); }
    double sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

/// Samples a function of x on the interior nodes of a grid.
PotentialField sample_potential(const SpaceTimeGrid& g, const std::function<double(double)>& fn,
                                double bound = std::numeric_limits<double>::infinity());

/// Data of the Dirichlet problem
///   w_tt - w_xx + q w = f on (0, T) x (0, L),
///   w(t, 0) = f0(t), w(t, L) = fL(t), w(0) = w0, w_t(0) = w1.
struct WaveProblem {
    PotentialField q;
    std::function<double(double, double)> source;  // f(t, x); empty means zero
    std::function<double(double)> boundary_left;   // f0(t)
    std::function<double(double)> boundary_right;  // fL(t)
    Eigen::VectorXd w0;  // all N + 2 nodes
    Eigen::VectorXd w1;  // all N + 2 nodes

    /// Throws when sizes disagree with the grid or the corner values of w0
    /// are incompatible with the boundary data (tolerance 1e-8).
    void validate(const SpaceTimeGrid& g) const;
};

/// Space-time field w(n, j), rows are time levels n = 0..Nt and columns the
/// space nodes j = 0..N+1.
struct Trajectory {
    SpaceTimeGrid grid;
    Eigen::MatrixXd values;
};

/// Uniformly sampled time series m(n tau), n = 0..size-1.
struct FluxSeries {
    double tau = 0.0;
    Eigen::VectorXd values;

    int size() const { return static_cast<int>(values.size()); }
    double t(int n) const { return n * tau; }
    double end_time() const { return (size() - 1) * tau; }
};

/// Time stepping with the symmetric theta stencil
///   (w^{n+1} - 2 w^n + w^{n-1}) / tau^2
///       = Delta_h[theta w^{n+1} + (1 - 2 theta) w^n + theta w^{n-1}] - q w^n + f^n,
/// started by the second-order Taylor step. theta = 0 is the explicit
/// leapfrog scheme and requires cfl <= 1.
Trajectory solve_wave(const WaveProblem& p, const SpaceTimeGrid& g, double theta);

/// Same scheme, keeping only the boundary flux (w_{N+1} - w_N) / h.
FluxSeries solve_wave_flux(const WaveProblem& p, const SpaceTimeGrid& g, double theta);

FluxSeries extract_flux(const Trajectory& tr);

/// Centered differences inside, one-sided second-order differences at both ends.
FluxSeries time_derivative(const FluxSeries& series);

/// Linear interpolation onto the time nodes of target.
FluxSeries resample(const FluxSeries& series, const SpaceTimeGrid& target);

FluxSeries operator-(const FluxSeries& a, const FluxSeries& b);

} // namespace wavepot
