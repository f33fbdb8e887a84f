#include "wavepot/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wavepot/error.hpp"

namespace wavepot {

namespace {

constexpr std::size_t kMinCells = 16384;
constexpr std::size_t kMaxCells = std::size_t{1} << 22;

// eta sampled at u = i / M, u = tau / eps0, i = 0..M.
//
// In the unit variable the bump is exp(-c / (u (1 - u))) with c = 1 / eps0^2,
// which underflows for every realistic eps0. It is rescaled by its peak
// value exp(-4c) before integrating; the normalization cancels the factor.
std::vector<double> tabulate_eta(double eps0)
{
    const double c = 1.0 / (eps0 * eps0);
    const double width = 1.0 / std::sqrt(32.0 * c);  // std. deviation of the peak in u
    std::size_t cells = std::max<std::size_t>(kMinCells, static_cast<std::size_t>(std::ceil(40.0 / width)));
    cells = std::min(cells, kMaxCells);
    cells += cells % 2;

    auto bump = [c](double u) {
        const double p = u * (1.0 - u);
        if (p <= 0.0)
            return 0.0;
        return std::exp(4.0 * c - c / p);
    };

    const std::size_t half = cells / 2;
    std::vector<double> cumulative(half + 1, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        const double a = static_cast<double>(i) / cells;
        const double b = static_cast<double>(i + 1) / cells;
        const double piece = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(bump, a, b, 8, 1e-14);
        cumulative[i + 1] = cumulative[i] + piece;
    }
    const double total = 2.0 * cumulative[half];

    // Symmetry of the bump about 1/2 gives eta(1 - u) = 1 - eta(u).
    std::vector<double> table(cells + 1);
    for (std::size_t i = 0; i <= half; ++i)
        table[i] = cumulative[i] / total;
    table[half] = 0.5;
    for (std::size_t i = half + 1; i <= cells; ++i)
        table[i] = 1.0 - table[cells - i];
    table[0] = 0.0;
    table[cells] = 1.0;
    return table;
}

} // namespace

CutoffFamily::CutoffFamily(double L0sq, double d0sq, int ncut)
    : L0sq_(L0sq), d0sq_(d0sq), ncut_(ncut)
{
    if (ncut < 1)
        throw ConfigError("cutoff: number of blocks must be at least 1");
    if (!(d0sq > 0.0) || !(L0sq > d0sq))
        throw GeometryError("cutoff: need 0 < d0^2 < L0^2");
    eps0_ = d0sq / ncut;
    table_ = std::make_shared<const std::vector<double>>(tabulate_eta(eps0_));
}

double CutoffFamily::eta(double tau) const
{
    if (tau <= 0.0)
        return 0.0;
    if (tau >= eps0_)
        return 1.0;
    const auto& tab = *table_;
    const std::size_t cells = tab.size() - 1;
    const double pos = tau / eps0_ * static_cast<double>(cells);
    const std::size_t i = std::min(cells - 1, static_cast<std::size_t>(pos));
    const double frac = pos - static_cast<double>(i);
    return tab[i] + frac * (tab[i + 1] - tab[i]);
}

double CutoffFamily::eta_j(int j, double tau) const
{
    if (j < 0 || j > ncut_)
        throw ShapeError("cutoff: block index out of range");
    if (j == 0)
        return eta(tau - L0sq_);
    const double lower = L0sq_ * static_cast<double>(ncut_ - j) / ncut_;
    const double upper = L0sq_ * static_cast<double>(ncut_ - j + 1) / ncut_;
    return eta(tau - lower) - eta(tau - upper);
}

std::pair<double, double> CutoffFamily::support(int j) const
{
    if (j < 0 || j > ncut_)
        throw ShapeError("cutoff: block index out of range");
    if (j == 0)
        return {L0sq_, std::numeric_limits<double>::infinity()};
    const double lower = L0sq_ * static_cast<double>(ncut_ - j) / ncut_;
    const double upper = L0sq_ * static_cast<double>(ncut_ - j + 1) / ncut_;
    return {lower, upper + eps0_};
}

bool CutoffFamily::eta0_vanishes_below(double phi_max) const
{
    return phi_max <= L0sq_;
}

int default_block_count(const CarlemanWeight& w)
{
    return static_cast<int>(std::floor(w.s() * (w.L0sq() + w.d0sq()) / 10.0)) + 1;
}

CutoffFamily make_cutoff_family(const CarlemanWeight& w, std::optional<int> ncut_override)
{
    int ncut = 0;
    if (ncut_override && *ncut_override > 0) {
        ncut = *ncut_override;
    } else {
        if (!(w.s() > 0.0))
            throw ConfigError("cutoff: default block count needs s > 0");
        ncut = default_block_count(w);
    }
    CutoffFamily family(w.L0sq(), w.d0sq(), ncut);
    if (!family.eta0_vanishes_below(w.L0sq()))
        throw Error("cutoff: eta_0 does not vanish on reachable phi values");
    return family;
}

} // namespace wavepot
