#include "wavepot/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wavepot/error.hpp"

namespace wavepot {

std::string to_string(ProvenanceStep::Kind k)
{
    switch (k) {
    case ProvenanceStep::Kind::clean: return "clean";
    case ProvenanceStep::Kind::noisy: return "noisy";
    case ProvenanceStep::Kind::regularized: return "regularized";
    }
    return "unknown";
}

Measurement Measurement::clean(FluxSeries flux)
{
    Measurement m;
    m.flux = std::move(flux);
    m.provenance.push_back({ProvenanceStep::Kind::clean, 0.0, 0, 0});
    return m;
}

Measurement add_noise(const Measurement& m, const NoiseSpec& spec)
{
    if (!(spec.alpha >= 0.0))
        throw ConfigError("add_noise: alpha must be non-negative");
    Measurement out = m;
    out.provenance.push_back({ProvenanceStep::Kind::noisy, spec.alpha, spec.seed, 0});
    if (spec.alpha == 0.0 || m.flux.size() == 0)
        return out;

    const double amplitude = spec.alpha * m.flux.values.cwiseAbs().maxCoeff();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int n = 0; n < out.flux.size(); ++n)
        out.flux.values[n] += amplitude * unit(rng);
    return out;
}

std::vector<double> smoothing_kernel(double step_ratio)
{
    if (!(step_ratio > 0.0))
        throw ConfigError("smoothing_kernel: step ratio must be positive");
    // exp(-u^2 / 4) is a Gaussian of standard deviation sqrt(2) in u.
    const double cutoff = 6.0 * std::sqrt(2.0);
    std::vector<double> k;
    for (int r = 0; r * step_ratio <= cutoff; ++r) {
        const double u = r * step_ratio;
        k.push_back(std::exp(-0.25 * u * u));
    }
    double total = 0.0;
    for (double v : k)
        total += v;
    for (double& v : k)
        v /= total;
    return k;
}

namespace {

int mirror(int i, int n)
{
    if (n == 1)
        return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0)
        i += period;
    return i < n ? i : period - i;
}

} // namespace

FluxSeries gaussian_regularize(const FluxSeries& series, int passes, const SmoothingSpec& spec)
{
    if (passes < 0)
        throw ConfigError("gaussian_regularize: passes must be non-negative");
    if (spec.unit < 0.0)
        throw ConfigError("gaussian_regularize: kernel unit must be non-negative");
    FluxSeries cur = series;
    const int n = cur.size();
    if (passes == 0 || n == 0)
        return cur;
    const double ratio = spec.unit > 0.0 ? series.tau / spec.unit : 1.0;
    auto kernel = smoothing_kernel(ratio);
    const int R = static_cast<int>(kernel.size()) - 1;
    if (spec.zero_phase) {
        double total = kernel[0];
        for (int r = 1; r <= R; ++r)
            total += 2.0 * kernel[r];
        for (double& v : kernel)
            v /= total;
    }

    Eigen::VectorXd next(n);
    for (int p = 0; p < passes; ++p) {
        for (int i = 0; i < n; ++i) {
            double acc = kernel[0] * cur.values[i];
            for (int r = 1; r <= R; ++r) {
                if (spec.zero_phase)
                    acc += kernel[r] * (cur.values[mirror(i - r, n)] + cur.values[mirror(i + r, n)]);
                else
                    acc += kernel[r] * cur.values[std::max(0, i - r)];
            }
            next[i] = acc;
        }
        cur.values = next;
    }
    return cur;
}

Measurement gaussian_regularize(const Measurement& m, int passes, const SmoothingSpec& spec)
{
    Measurement out;
    out.flux = gaussian_regularize(m.flux, passes, spec);
    out.provenance = m.provenance;
    ProvenanceStep step;
    step.kind = ProvenanceStep::Kind::regularized;
    step.passes = passes;
    step.unit = spec.unit > 0.0 ? spec.unit : m.flux.tau;
    step.zero_phase = spec.zero_phase;
    out.provenance.push_back(step);
    return out;
}

int default_regularization_passes(double alpha)
{
    return static_cast<int>(std::lround(100.0 * alpha));
}

FluxSeries BlockTargets::sum() const
{
    if (blocks.empty())
        return {};
    FluxSeries total = blocks.front();
    for (std::size_t j = 1; j < blocks.size(); ++j)
        total.values += blocks[j].values;
    return total;
}

BlockTargets assemble_target(const FluxSeries& mu_source, const CarlemanWeight& w, const CutoffFamily& cut,
                             const SpaceTimeGrid& g)
{
    if (mu_source.size() != g.Nt + 1)
        throw ShapeError("assemble_target: target series is not on the inverse time grid");
    BlockTargets out;
    out.blocks.reserve(cut.ncut());
    for (int j = 1; j <= cut.ncut(); ++j) {
        FluxSeries block;
        block.tau = mu_source.tau;
        block.values.resize(mu_source.size());
        for (int n = 0; n < mu_source.size(); ++n)
            block.values[n] = cut.eta_j(j, w.phi(g.t(n), g.L)) * mu_source.values[n];
        out.blocks.push_back(std::move(block));
    }
    return out;
}

FluxSeries cut_target(const FluxSeries& mu_source, const CarlemanWeight& w, const CutoffFamily& cut,
                      const SpaceTimeGrid& g)
{
    if (mu_source.size() != g.Nt + 1)
        throw ShapeError("cut_target: target series is not on the inverse time grid");
    FluxSeries out = mu_source;
    for (int n = 0; n < out.size(); ++n)
        out.values[n] *= cut.eta(w.phi(g.t(n), g.L));
    return out;
}

} // namespace wavepot
