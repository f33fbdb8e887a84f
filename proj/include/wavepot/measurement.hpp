#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavepot/cutoff.hpp"
#include "wavepot/wave.hpp"
#include "wavepot/weight.hpp"

namespace wavepot {

struct ProvenanceStep {
    enum class Kind { clean, noisy, regularized };
    Kind kind = Kind::clean;
    double alpha = 0.0;      // noisy
    std::uint64_t seed = 0;  // noisy
    int passes = 0;          // regularized
    double unit = 0.0;       // regularized: kernel time unit
    bool zero_phase = false; // regularized
};

std::string to_string(ProvenanceStep::Kind k);

/// Boundary flux measurement with the chain of operations applied to it.
struct Measurement {
    FluxSeries flux;
    std::vector<ProvenanceStep> provenance;

    static Measurement clean(FluxSeries flux);
};

struct NoiseSpec {
    double alpha = 0.0;  // relative to the sup norm of the clean series
    std::uint64_t seed = 0;
};

/// m'^n = m^n + alpha ||m||_inf u^n, u^n i.i.d. uniform on [-1, 1] drawn
/// from a 64-bit Mersenne Twister seeded with spec.seed.
Measurement add_noise(const Measurement& m, const NoiseSpec& spec);

/// Smoothing kernel K_r proportional to exp(-(r c)^2 / 4) for r = 0, 1, ...
/// while r c stays within six standard deviations, normalized to unit sum;
/// c is the sample step measured in kernel time units.
std::vector<double> smoothing_kernel(double step_ratio = 1.0);

struct SmoothingSpec {
    /// Kernel time unit; 0 means the step of the series being smoothed.
    double unit = 0.0;
    /// Causal passes use m^n <- sum_{r >= 0} K_r m^{n-r} with the series
    /// continued by its first value before t = 0. Zero-phase passes use the
    /// symmetric kernel K_{|r|} (renormalized) with mirror continuation at
    /// both ends, so they introduce no time lag.
    bool zero_phase = false;
};

FluxSeries gaussian_regularize(const FluxSeries& series, int passes, const SmoothingSpec& spec = {});
Measurement gaussian_regularize(const Measurement& m, int passes, const SmoothingSpec& spec = {});

/// Default number of smoothing passes for a relative noise level:
/// one per percent, rounded.
int default_regularization_passes(double alpha);

/// Per-block boundary targets: block j (stored at j - 1) holds
/// eta_j(phi(t^n, L)) mu(t^n).
struct BlockTargets {
    std::vector<FluxSeries> blocks;

    FluxSeries sum() const;
};

BlockTargets assemble_target(const FluxSeries& mu_source, const CarlemanWeight& w, const CutoffFamily& cut,
                             const SpaceTimeGrid& g);

/// eta(phi(t^n, L)) mu(t^n), the undecomposed target.
FluxSeries cut_target(const FluxSeries& mu_source, const CarlemanWeight& w, const CutoffFamily& cut,
                      const SpaceTimeGrid& g);

} // namespace wavepot
