#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "wavepot/weight.hpp"

namespace wavepot {

/// Smooth master cut-off eta (0 below 0, 1 above eps0) and the shifted
/// differences eta_j used to split a target by level sets of phi.
///
/// eta is the normalized primitive of exp(-1 / (t (eps0 - t))). The integral
/// has no closed form; it is integrated once by adaptive Gauss-Kronrod
/// quadrature and tabulated, then read back by linear interpolation.
class CutoffFamily {
public:
    CutoffFamily(double L0sq, double d0sq, int ncut);

    int ncut() const { return ncut_; }
    double eps0() const { return eps0_; }
    double L0sq() const { return L0sq_; }
    double d0sq() const { return d0sq_; }
    std::size_t table_size() const { return table_->size(); }

    double eta(double tau) const;

    /// eta_j for j = 0..ncut. eta_0 lives above L0sq and never sees a
    /// reachable value of phi; blocks 1..ncut are the active ones.
    double eta_j(int j, double tau) const;

    /// Open interval of tau values outside which eta_j vanishes.
    std::pair<double, double> support(int j) const;

    /// True when eta_0 is zero for every tau <= phi_max.
    bool eta0_vanishes_below(double phi_max) const;

private:
    double L0sq_;
    double d0sq_;
    int ncut_;
    double eps0_;
    std::shared_ptr<const std::vector<double>> table_;  // eta on a uniform grid of [0, eps0]
};

/// Default number of blocks: floor(s (L0sq + d0sq) / 10) + 1, which keeps the
/// variation of exp(s phi) on each block within about five decades.
int default_block_count(const CarlemanWeight& w);

CutoffFamily make_cutoff_family(const CarlemanWeight& w, std::optional<int> ncut_override = {});

} // namespace wavepot
