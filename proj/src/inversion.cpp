#include "wavepot/inversion.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "wavepot/error.hpp"
#include "wavepot/measurement.hpp"

namespace wavepot {

std::string to_string(Variant v)
{
    return v == Variant::alg3 ? "alg3" : "alg4";
}

Variant parse_variant(const std::string& name)
{
    if (name == "alg3")
        return Variant::alg3;
    if (name == "alg4")
        return Variant::alg4;
    throw ConfigError("unknown variant '" + name + "' (expected alg3 or alg4)");
}

void InversionConfig::validate() const
{
    if (!(weight.s() > 0.0))
        throw ConfigError("s must be positive");
    if (!(m > 0.0))
        throw ConfigError("the a priori bound m must be positive");
    if (!(alpha_floor >= 0.0))
        throw ConfigError("alpha_floor must be nonnegative");
    if (!(eps_stop > 0.0))
        throw ConfigError("the stopping tolerance must be positive");
    if (max_iter < 1)
        throw ConfigError("max_iter must be at least 1");
    if (smoothing_passes < 0)
        throw ConfigError("smoothing passes must be nonnegative");
    if (ncut && *ncut < 1)
        throw ConfigError("ncut must be at least 1");
}

PotentialField truncate_Tm(const PotentialField& q, double m)
{
    if (!(m > 0.0))
        throw ConfigError("truncate_Tm: bound must be positive");
    PotentialField out{q.values.cwiseMax(-m).cwiseMin(m), m};
    return out;
}

PotentialField update_potential(const PotentialField& q, const Eigen::VectorXd& rate, const Eigen::VectorXd& w0,
                                double alpha_floor, double m)
{
    if (rate.size() != q.size() || w0.size() != q.size())
        throw ShapeError("update_potential: fields are not on matching nodes");
    PotentialField next{Eigen::VectorXd(q.size()), m};
    for (int j = 0; j < q.size(); ++j) {
        const double a = std::abs(w0[j]);
        if (alpha_floor == 0.0 && a == 0.0)
            throw Error("update_potential: w0 vanishes at node " + std::to_string(j + 1) +
                        " and no positivity floor is set");
        next.values[j] = a >= alpha_floor ? q.values[j] + rate[j] / w0[j] : 0.0;
    }
    return truncate_Tm(next, m);
}

Eigen::VectorXd interpolate_dead_zone(const Eigen::VectorXd& q, const Eigen::VectorXd& w0, double alpha_floor)
{
    if (w0.size() != q.size())
        throw ShapeError("interpolate_dead_zone: fields are not on matching nodes");
    const int n = static_cast<int>(q.size());
    std::vector<int> live;
    for (int j = 0; j < n; ++j)
        if (std::abs(w0[j]) >= alpha_floor)
            live.push_back(j);
    if (live.empty() || static_cast<int>(live.size()) == n)
        return q;
    Eigen::VectorXd out = q;
    std::size_t k = 0;
    for (int j = 0; j < n; ++j) {
        while (k < live.size() && live[k] < j)
            ++k;
        if (k < live.size() && live[k] == j)
            continue;
        if (k == 0)
            out[j] = q[live.front()];
        else if (k == live.size())
            out[j] = q[live.back()];
        else {
            const int a = live[k - 1], b = live[k];
            const double r = static_cast<double>(j - a) / (b - a);
            out[j] = (1.0 - r) * q[a] + r * q[b];
        }
    }
    return out;
}

double weighted_error(const PotentialField& q, const PotentialField& ref, const CarlemanWeight& w,
                      const SpaceTimeGrid& g)
{
    if (q.size() != ref.size() || q.size() != g.N)
        throw ShapeError("weighted_error: fields are not on matching nodes");
    double top = -std::numeric_limits<double>::infinity();
    for (int j = 1; j <= g.N; ++j)
        top = std::max(top, w.phi(0.0, g.x(j)));
    double sum = 0.0;
    for (int j = 1; j <= g.N; ++j) {
        const double d = q.values[j - 1] - ref.values[j - 1];
        sum += std::exp(2.0 * w.s() * (w.phi(0.0, g.x(j)) - top)) * d * d;
    }
    return g.h * sum;
}

double hf_energy(const Eigen::VectorXd& q)
{
    double e = 0.0;
    for (int j = 1; j + 1 < q.size(); ++j) {
        const double d = q[j + 1] - 2.0 * q[j] + q[j - 1];
        e += d * d;
    }
    return e;
}

Field compute_nu_tilde(const Trajectory& w, const CarlemanWeight& weight,
                       const std::function<double(double)>& cutoff)
{
    const auto& g = w.grid;
    const auto& v = w.values;
    if (v.rows() != g.Nt + 1 || v.cols() != g.N + 2)
        throw ShapeError("compute_nu_tilde: trajectory shape does not match its grid");
    if (g.Nt < 2)
        throw ShapeError("compute_nu_tilde: at least three time levels are required");

    Field gfield(g.Nt + 1, g.N + 2);
    const int last = g.Nt;
    for (int j = 0; j <= g.N + 1; ++j) {
        for (int n = 0; n <= last; ++n) {
            double dt;
            if (n == 0)
                dt = (-3.0 * v(0, j) + 4.0 * v(1, j) - v(2, j)) / (2.0 * g.tau);
            else if (n == last)
                dt = (3.0 * v(last, j) - 4.0 * v(last - 1, j) + v(last - 2, j)) / (2.0 * g.tau);
            else
                dt = (v(n + 1, j) - v(n - 1, j)) / (2.0 * g.tau);
            gfield(n, j) = cutoff(weight.phi(g.t(n), g.x(j))) * dt;
        }
    }
    Field nu = Field::Zero(g.Nt + 1, g.N + 2);
    for (int n = 0; n < g.Nt; ++n)
        for (int j = 0; j <= g.N; ++j)
            nu(n, j) = (gfield(n + 1, j + 1) - gfield(n + 1, j) - gfield(n, j + 1) + gfield(n, j)) / (g.tau * g.h);
    return nu;
}

namespace {

FluxSeries on_grid(const FluxSeries& m, const SpaceTimeGrid& g)
{
    if (m.size() == g.Nt + 1 && std::abs(m.tau - g.tau) <= 1e-12 * g.tau)
        return m;
    return resample(m, g);
}

} // namespace

ReconstructionResult run_reconstruction(const InversionConfig& cfg, const FluxSeries& measurement,
                                        const WaveProblem& problem, const PotentialField& q0,
                                        const PotentialField* reference, const IterationObserver& observer)
{
    cfg.validate();
    const auto& g = cfg.grid;
    if (q0.size() != g.N)
        throw ShapeError("run_reconstruction: initial potential is not on the inverse grid");
    if (reference && reference->size() != g.N)
        throw ShapeError("run_reconstruction: reference potential is not on the inverse grid");
    if (std::abs(cfg.weight.L() - g.L) > 1e-12 * g.L)
        throw ConfigError("run_reconstruction: weight and grid disagree on L");

    ReconstructionResult result;
    const auto geometry = check_geometry(g.L, g.T, cfg.weight);
    if (geometry.hard_failure())
        throw GeometryError(geometry.describe());
    if (geometry.has_warnings())
        result.warnings.push_back(geometry.describe());

    WaveProblem iterate = problem;
    iterate.q = q0;
    iterate.validate(g);
    const Eigen::VectorXd w0 = problem.w0.segment(1, g.N);

    const auto cut = make_cutoff_family(cfg.weight, cfg.ncut);
    // Data are smoothed on their own grid, the model on the inverse grid,
    // with the same kernel in time units.
    const SmoothingSpec smoothing{g.tau, cfg.zero_phase_smoothing};
    const FluxSeries data = on_grid(gaussian_regularize(measurement, cfg.smoothing_passes, smoothing), g);

    SystemOptions options;
    options.penalty = cfg.penalty;
    options.oterm_coeff = cfg.oterm_coeff;
    options.sh_bound = cfg.sh_bound;

    PotentialField q = truncate_Tm(q0, cfg.m);
    result.iterates.push_back(q.values);
    result.weighted_error_shift = -std::numeric_limits<double>::infinity();
    for (int j = 1; j <= g.N; ++j)
        result.weighted_error_shift = std::max(result.weighted_error_shift, cfg.weight.phi(0.0, g.x(j)));

    int growth_streak = 0;
    double previous_change = std::numeric_limits<double>::quiet_NaN();
    bool warned_admissibility = false;

    for (int k = 0; k < cfg.max_iter; ++k) {
        const auto start = std::chrono::steady_clock::now();
        iterate.q = q;

        FluxSeries model;
        Trajectory traj;
        if (cfg.variant == Variant::alg3) {
            traj = solve_wave(iterate, g, cfg.theta);
            model = extract_flux(traj);
        } else {
            model = solve_wave_flux(iterate, g, cfg.theta);
        }
        model = gaussian_regularize(model, cfg.smoothing_passes, smoothing);
        const FluxSeries mu = time_derivative(model - data);
        const auto targets = assemble_target(mu, cfg.weight, cut, g);

        ConjugateOperator op{g, cfg.weight, q.values};
        const auto sys = assemble_system(op, options);
        if (!warned_admissibility)
            for (const auto& w : sys.warnings())
                result.warnings.push_back(w);
        warned_admissibility = true;

        std::vector<Field> nu_blocks;
        if (cfg.variant == Variant::alg3) {
            nu_blocks.reserve(cut.ncut());
            for (int j = 1; j <= cut.ncut(); ++j)
                nu_blocks.push_back(
                    compute_nu_tilde(traj, cfg.weight, [&cut, j](double p) { return cut.eta_j(j, p); }));
        }
        const auto prog = progressive_minimize(sys, targets, cut, nu_blocks);

        PotentialField next = update_potential(q, prog.rate, w0, cfg.alpha_floor, cfg.m);
        if (!next.values.allFinite())
            throw NonFiniteError("run_reconstruction: non-finite potential at iteration " + std::to_string(k + 1));

        IterationRecord rec;
        rec.k = k + 1;
        const Eigen::VectorXd delta = next.values - q.values;
        rec.rel_change = delta.norm() / std::max(q.values.norm(), 1e-30);
        rec.sup_update = delta.size() ? delta.cwiseAbs().maxCoeff() : 0.0;
        rec.weighted_error = reference ? weighted_error(next, *reference, cfg.weight, g)
                                       : std::numeric_limits<double>::quiet_NaN();
        rec.hf_energy = hf_energy(next.values);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        q = next;
        result.history.push_back(rec);
        result.iterates.push_back(q.values);
        if (observer)
            observer(rec, q.values);

        if (rec.rel_change <= cfg.eps_stop) {
            result.converged = true;
            result.stop_reason = "converged";
            break;
        }
        if (std::isfinite(previous_change) && previous_change > 0.0 && rec.rel_change > 10.0 * previous_change)
            ++growth_streak;
        else
            growth_streak = 0;
        previous_change = rec.rel_change;
        if (growth_streak >= 3) {
            result.diverged = true;
            result.stop_reason = "divergence_guard";
            break;
        }
    }
    if (result.stop_reason.empty())
        result.stop_reason = "max_iter";

    if (cfg.interpolate_dead_zone && cfg.alpha_floor > 0.0)
        q.values = interpolate_dead_zone(q.values, w0, cfg.alpha_floor);
    result.q = q;
    return result;
}

} // namespace wavepot
