#include "wavepot/grid.hpp"

#include <cmath>

#include "wavepot/error.hpp"

namespace wavepot {

int time_steps_covering(double T, double tau)
{
    const double ratio = T / tau;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest))
        return static_cast<int>(nearest);
    return static_cast<int>(std::ceil(ratio));
}

SpaceTimeGrid SpaceTimeGrid::make(double L, double T, int N, double tau)
{
    if (!(L > 0.0) || !(T > 0.0))
        throw ConfigError("grid: L and T must be positive");
    if (N < 2)
        throw ConfigError("grid: at least two interior nodes are required");
    if (!(tau > 0.0))
        throw ConfigError("grid: time step must be positive");

    SpaceTimeGrid g;
    g.L = L;
    g.T = T;
    g.N = N;
    g.h = L / (N + 1);
    g.tau = tau;
    g.Nt = time_steps_covering(T, tau);
    g.cfl = tau / g.h;
    return g;
}

SpaceTimeGrid SpaceTimeGrid::from_cfl(double L, double T, double tau, double cfl)
{
    if (!(cfl > 0.0))
        throw ConfigError("grid: CFL ratio must be positive");
    const double h_target = tau / cfl;
    const int cells = std::max(3, static_cast<int>(std::lround(L / h_target)));
    const double h = L / cells;
    return make(L, T, cells - 1, cfl * h);
}

SpaceTimeGrid SpaceTimeGrid::from_steps(double L, double T, double h, double tau)
{
    if (!(h > 0.0))
        throw ConfigError("grid: space step must be positive");
    const int cells = std::max(3, static_cast<int>(std::lround(L / h)));
    return make(L, T, cells - 1, tau);
}

} // namespace wavepot
