#pragma once

namespace wavepot {

/// Uniform space mesh x_j = j h, j = 0..N+1, over [0, L] together with a
/// uniform time mesh t_n = n tau, n = 0..Nt, covering [0, T].
struct SpaceTimeGrid {
    double L = 1.0;
    double T = 1.0;
    int N = 0;         // interior space nodes
    double h = 0.0;    // L / (N + 1)
    double tau = 0.0;
    int Nt = 0;        // last time index; Nt * tau >= T > (Nt - 1) * tau
    double cfl = 0.0;  // tau / h

    /// Grid from an interior node count and a time step.
    static SpaceTimeGrid make(double L, double T, int N, double tau);

    /// Grid for a given time step and CFL ratio. The node count is rounded
    /// to the nearest admissible value and tau is then reset to cfl * h so
    /// that the ratio is exact.
    static SpaceTimeGrid from_cfl(double L, double T, double tau, double cfl);

    /// Grid from a space step and a time step (h rounded to L / (N + 1)).
    static SpaceTimeGrid from_steps(double L, double T, double h, double tau);

    double x(int j) const { return j * h; }
    double t(int n) const { return n * tau; }
    int space_nodes() const { return N + 2; }
    int time_nodes() const { return Nt + 1; }
};

/// Number of time steps needed to cover [0, T] with step tau, tolerant to
/// the roundoff in T / tau.
int time_steps_covering(double T, double tau);

} // namespace wavepot
