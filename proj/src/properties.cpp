#include "wavepot/properties.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <boost/math/constants/constants.hpp>

#include "wavepot/error.hpp"
#include "wavepot/inversion.hpp"
#include "wavepot/measurement.hpp"
#include "wavepot/wave.hpp"

namespace wavepot {

namespace {

constexpr double pi = boost::math::constants::pi<double>();

double max_phi(const ConjugateOperator& op)
{
    double m = -std::numeric_limits<double>::infinity();
    for (int n = 0; n <= op.grid.Nt; ++n)
        for (int j = 0; j <= op.grid.N + 1; ++j)
            m = std::max(m, op.phi(n, j));
    return m;
}

// Random field on the trial space: zero at n = 0 and on both space boundaries.
Field random_trial_field(const SpaceTimeGrid& g, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field y = Field::Zero(g.Nt + 1, g.N + 2);
    for (int n = 1; n <= g.Nt; ++n)
        for (int j = 1; j <= g.N; ++j)
            y(n, j) = u(rng);
    return y;
}

SpaceTimeGrid small_grid(const RunConfig& cfg)
{
    return SpaceTimeGrid::make(cfg.L, cfg.T, 20, cfg.T / 30.0);
}

} // namespace

double partition_of_unity_error(const CarlemanWeight& w, const CutoffFamily& cut, double T, int samples,
                                 std::uint64_t seed)
{
    const double lo = -w.beta() * T * T + w.d0sq() - cut.eps0();
    const double hi = w.L0sq() + cut.eps0();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double tau = u(rng);
        double sum = 0.0;
        for (int j = 0; j <= cut.ncut(); ++j)
            sum += cut.eta_j(j, tau);
        worst = std::max(worst, std::abs(sum - cut.eta(tau)));
    }
    return worst;
}

double conjugation_identity_error(const ConjugateOperator& op, int trials, std::uint64_t seed)
{
    const auto& g = op.grid;
    const double ref = max_phi(op);
    const double s = op.s();
    const double it2 = 1.0 / (g.tau * g.tau);
    const double ih2 = 1.0 / (g.h * g.h);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        Field z(g.Nt + 1, g.N + 2);
        for (Eigen::Index i = 0; i < z.size(); ++i)
            z.data()[i] = u(rng);
        Field y(z.rows(), z.cols());
        for (int n = 0; n <= g.Nt; ++n)
            for (int j = 0; j <= g.N + 1; ++j)
                y(n, j) = std::exp(s * (op.phi(n, j) - ref)) * z(n, j);

        const Field lhs = apply_L(y, op);
        const Field wz = apply_wave_operator(z, op);
        for (int n = 1; n < g.Nt; ++n) {
            for (int j = 1; j <= g.N; ++j) {
                const double e = std::exp(s * (op.phi(n, j) - ref));
                const double rhs = e * wz(n, j);
                // Scale of the terms entering this node, so that cancellation
                // in the stencil does not inflate the relative error.
                const double scale =
                    e * ((std::abs(z(n + 1, j)) + 2.0 * std::abs(z(n, j)) + std::abs(z(n - 1, j))) * it2 +
                         (std::abs(z(n, j + 1)) + 2.0 * std::abs(z(n, j)) + std::abs(z(n, j - 1))) * ih2 +
                         std::abs(op.q[j - 1] * z(n, j)));
                if (scale > 0.0)
                    worst = std::max(worst, std::abs(lhs(n, j) - rhs) / scale);
            }
        }
    }
    return worst;
}

double smallest_eigenvalue(const QuadraticSystem& sys)
{
    const Eigen::MatrixXd dense(sys.matrix());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw SolverError("smallest_eigenvalue: eigen decomposition failed");
    return eig.eigenvalues().minCoeff();
}

double functional_value(const ConjugateOperator& op, const Eigen::MatrixXd& y, bool penalty, double oterm_coeff)
{
    const auto& g = op.grid;
    const double s = op.s();
    const double ref = max_phi(op);
    Field z(y.rows(), y.cols());
    for (int n = 0; n <= g.Nt; ++n)
        for (int j = 0; j <= g.N + 1; ++j)
            z(n, j) = std::exp(-s * (op.phi(n, j) - ref)) * y(n, j);
    const Field wz = apply_wave_operator(z, op);

    double residual = 0.0;
    for (int n = 1; n < g.Nt; ++n)
        for (int j = 1; j <= g.N; ++j) {
            const double r = std::exp(s * (op.phi(n, j) - ref)) * wz(n, j);
            residual += r * r;
        }
    double boundary = 0.0;
    for (int n = 1; n <= g.Nt; ++n)
        boundary += y(n, g.N) * y(n, g.N);
    double region = 0.0;
    for (int n = 1; n <= g.Nt; ++n)
        for (int j = 1; j <= g.N; ++j)
            if (op.weight.in_region_O(g.t(n), g.x(j)))
                region += y(n, j) * y(n, j);
    double high = 0.0;
    if (penalty)
        for (int n = 0; n < g.Nt; ++n)
            for (int j = 0; j <= g.N; ++j) {
                const double d = (y(n + 1, j + 1) - y(n + 1, j) - y(n, j + 1) + y(n, j)) / (g.tau * g.h);
                high += d * d;
            }

    const double ht = g.h * g.tau;
    return ht * residual + s * g.tau / (g.h * g.h) * boundary + oterm_coeff * s * s * s * ht * region +
           s * g.h * g.h * ht * high;
}

double form_consistency_error(const QuadraticSystem& sys, int trials, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const Field y = random_trial_field(sys.op().grid, rng);
        const double j = functional_value(sys.op(), y, sys.penalty_enabled(), 2.0);
        worst = std::max(worst, std::abs(sys.form(y, y) - j) / j);
    }
    return worst;
}

double progressive_direct_discrepancy(const QuadraticSystem& sys, const CutoffFamily& cut, std::uint64_t seed)
{
    const auto& g = sys.op().grid;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = u(rng), b = u(rng), c = u(rng);
    FluxSeries mu;
    mu.tau = g.tau;
    mu.values.resize(g.Nt + 1);
    for (int n = 0; n <= g.Nt; ++n) {
        const double t = g.t(n);
        mu.values[n] = a + b * std::sin(pi * t) + c * std::cos(2.0 * pi * t);
    }
    const auto targets = assemble_target(mu, sys.op().weight, cut, g);
    const Eigen::VectorXd progressive = progressive_minimize(sys, targets, cut).rate;
    const Eigen::VectorXd direct = direct_minimize(sys, targets.sum());
    return (progressive - direct).norm() / direct.norm();
}

OrderStudy scheme_order_study(double theta, double cfl, int n0, int levels)
{
    auto exact = [](double t, double x) { return std::cos(t) * std::sin(pi * x) + x; };
    OrderStudy study;
    for (int level = 0; level < levels; ++level) {
        const int cells = n0 << level;
        const double h = 1.0 / cells;
        const auto g = SpaceTimeGrid::make(1.0, 1.0, cells - 1, cfl * h);

        WaveProblem p;
        p.q = sample_potential(g, [](double x) { return 1.0 + x; });
        p.source = [](double t, double x) {
            const double mode = std::cos(t) * std::sin(pi * x);
            return (pi * pi - 1.0) * mode + (1.0 + x) * (mode + x);
        };
        p.boundary_left = [](double) { return 0.0; };
        p.boundary_right = [](double) { return 1.0; };
        p.w0.resize(g.N + 2);
        p.w1 = Eigen::VectorXd::Zero(g.N + 2);
        for (int j = 0; j <= g.N + 1; ++j)
            p.w0[j] = exact(0.0, g.x(j));
        p.w0[0] = 0.0;
        p.w0[g.N + 1] = 1.0;

        const auto tr = solve_wave(p, g, theta);
        double err = 0.0;
        const double tend = g.t(g.Nt);
        for (int j = 0; j <= g.N + 1; ++j)
            err = std::max(err, std::abs(tr.values(g.Nt, j) - exact(tend, g.x(j))));
        study.N.push_back(g.N);
        study.error.push_back(err);
        if (level > 0)
            study.rate.push_back(std::log2(study.error[level - 1] / err));
    }
    return study;
}

double fixed_point_update(const RunConfig& cfg)
{
    const auto inv = cfg.inversion();
    const auto& g = inv.grid;
    const auto truth = cfg.sample(cfg.Q, g);
    const auto data = solve_wave_flux(cfg.problem(g, truth), g, inv.theta);

    auto c = inv;
    c.max_iter = 1;
    c.smoothing_passes = 0;
    const auto result = run_reconstruction(c, data, cfg.problem(g, truth), truth);
    return result.history.front().sup_update;
}

bool VerifyReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

VerifyReport run_verify_suite(const RunConfig& cfg)
{
    VerifyReport report;
    report.oterm_coeff = cfg.oterm_coeff;
    auto add = [&report](std::string name, double value, double tol, bool passed, std::string detail = {}) {
        report.checks.push_back({std::move(name), passed, value, tol, std::move(detail)});
    };

    const CarlemanWeight weight(cfg.L, cfg.x0, cfg.beta, cfg.s);
    const auto geometry = check_geometry(cfg.L, cfg.T, weight);
    if (geometry.hard_failure() || geometry.has_warnings())
        report.warnings.push_back(geometry.describe());

    SystemOptions options;
    options.penalty = true;
    options.oterm_coeff = cfg.oterm_coeff;
    options.sh_bound = cfg.sh_bound;
    {
        const auto g = cfg.inverse_grid();
        const auto sys = assemble_system({g, weight, Eigen::VectorXd::Zero(g.N)}, options);
        for (const auto& w : sys.warnings())
            report.warnings.push_back("inverse grid: " + w);
    }

    const auto g = small_grid(cfg);
    {
        const auto cut = make_cutoff_family(weight);
        const double e = partition_of_unity_error(weight, cut, cfg.T, 10000, cfg.seed);
        add("partition_of_unity", e, 1e-12, e <= 1e-12);
    }
    {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Eigen::VectorXd q(g.N);
        for (int j = 0; j < g.N; ++j)
            q[j] = u(rng);
        const double e = conjugation_identity_error({g, weight, q}, 100, cfg.seed);
        add("conjugation_identity", e, 1e-12, e <= 1e-12);
    }
    for (double s : {1.0, 10.0, 100.0}) {
        const auto sys = assemble_system({g, weight.with_s(s), Eigen::VectorXd::Zero(g.N)}, options);
        const double lmin = smallest_eigenvalue(sys);
        add("spd_s" + std::to_string(static_cast<int>(s)), lmin, 0.0, lmin > 0.0 && sys.factorization_ok(),
            sys.factorization_ok() ? "factorization ok" : "factorization failed");
    }
    {
        const auto w = weight.with_s(20.0);
        const auto sys = assemble_system({g, w, Eigen::VectorXd::Zero(g.N)}, options);
        const double e = progressive_direct_discrepancy(sys, make_cutoff_family(w), cfg.seed);
        add("progressive_equals_direct", e, 1e-6, e <= 1e-6);
    }
    {
        const auto sys = assemble_system({g, weight.with_s(10.0), Eigen::VectorXd::Zero(g.N)}, options);
        const double e = form_consistency_error(sys, 5, cfg.seed);
        add("form_matches_functional", e, 1e-10, e <= 1e-10,
            "region-O coefficient in the system: " + std::to_string(cfg.oterm_coeff));
    }
    {
        const auto study = scheme_order_study(0.0, 1.0, 20, 4);
        const double r = *std::min_element(study.rate.begin(), study.rate.end());
        add("explicit_scheme_order", r, 1.9, r >= 1.9);
    }
    {
        RunConfig small = cfg;
        small.tau = g.tau;
        small.cfl = g.tau / g.h;
        const double qsup = small.sample(cfg.Q.empty() ? std::string("0") : cfg.Q, small.inverse_grid()).sup_norm();
        if (cfg.Q.empty())
            small.Q = "0";
        const double d = fixed_point_update(small);
        const double tol = 1e-8 * (1.0 + qsup);
        add("fixed_point", d, tol, d <= tol);
    }
    {
        const int n = 16;
        PotentialField q{Eigen::VectorXd::LinSpaced(n, -cfg.m, cfg.m), cfg.m};
        Eigen::VectorXd rate = Eigen::VectorXd::LinSpaced(n, -1e6, 1e6);
        const auto next = update_potential(q, rate, Eigen::VectorXd::Ones(n), 0.0, cfg.m);
        add("truncation_bound", next.sup_norm(), cfg.m, next.sup_norm() <= cfg.m);
    }
    {
        RunConfig small = cfg;
        small.tau = g.tau;
        small.cfl = g.tau / g.h;
        small.max_iter = 2;
        // Keeps s h inside the admissible window of the coarse grid.
        small.s = std::min(cfg.s, 10.0);
        if (small.Q.empty())
            small.Q = "0";
        auto once = [&small] {
            const auto inv = small.inversion();
            const auto truth = small.sample(small.Q, inv.grid);
            const auto fine = SpaceTimeGrid::from_cfl(small.L, small.T, small.tau / 2.0, small.cfl);
            const auto data = solve_wave_flux(small.problem(fine, small.sample(small.Q, fine)), fine, 1.0);
            const auto noisy = add_noise(Measurement::clean(data), {small.noise, small.seed});
            return run_reconstruction(inv, noisy.flux, small.problem(inv.grid, truth),
                                      small.sample(small.q0, inv.grid), &truth);
        };
        const auto a = once();
        const auto b = once();
        bool same = a.history.size() == b.history.size() && a.q.values == b.q.values;
        for (std::size_t k = 0; same && k < a.history.size(); ++k)
            same = a.history[k].rel_change == b.history[k].rel_change &&
                   a.history[k].sup_update == b.history[k].sup_update;
        add("determinism", same ? 0.0 : 1.0, 0.0, same, "s = " + std::to_string(small.s));
    }
    return report;
}

} // namespace wavepot
