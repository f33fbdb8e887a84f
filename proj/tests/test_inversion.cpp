#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wavepot/config.hpp"
#include "wavepot/error.hpp"
#include "wavepot/inversion.hpp"
#include "wavepot/measurement.hpp"

using namespace wavepot;

namespace {

const CarlemanWeight table1{1.0, -0.3, 0.99, 100.0};

PotentialField field(std::initializer_list<double> v, double m = 3.0)
{
    PotentialField p;
    p.values = Eigen::Map<const Eigen::VectorXd>(v.begin(), static_cast<Eigen::Index>(v.size()));
    p.bound = m;
    return p;
}

// Data generated on the inverse grid with the inverse scheme.
ReconstructionResult inverse_crime(const RunConfig& cfg, const std::string& start)
{
    const auto inv = cfg.inversion();
    const auto truth = cfg.sample(cfg.Q, inv.grid);
    const auto data = solve_wave_flux(cfg.problem(inv.grid, truth), inv.grid, inv.theta);
    const auto q0 = cfg.sample(start, inv.grid);
    return run_reconstruction(inv, data, cfg.problem(inv.grid, q0), q0, &truth);
}

// Fine implicit data, coarse explicit inversion.
ReconstructionResult dual_grid(const RunConfig& cfg)
{
    const auto fine = cfg.direct_grid();
    const auto data = solve_wave_flux(cfg.problem(fine, cfg.sample(cfg.Q, fine)), fine, cfg.direct_theta);
    const auto noisy = add_noise(Measurement::clean(data), {cfg.noise, cfg.seed});
    const auto inv = cfg.inversion();
    const auto truth = cfg.sample(cfg.Q, inv.grid);
    const auto q0 = cfg.sample(cfg.q0, inv.grid);
    return run_reconstruction(inv, noisy.flux, cfg.problem(inv.grid, q0), q0, &truth);
}

double relative_error(const RunConfig& cfg, const ReconstructionResult& r)
{
    const auto truth = cfg.sample(cfg.Q, cfg.inverse_grid());
    return (r.q.values - truth.values).norm() / truth.values.norm();
}

} // namespace

TEST_CASE("truncation")
{
    const auto t = truncate_Tm(field({5.0, -1.0, -4.0, 3.0}), 3.0);
    CHECK(t.values[0] == 3.0);
    CHECK(t.values[1] == -1.0);
    CHECK(t.values[2] == -3.0);
    CHECK(t.values[3] == 3.0);
    CHECK(t.bound == 3.0);
    CHECK_THROWS_AS(truncate_Tm(t, 0.0), ConfigError);
}

TEST_CASE("update with zero rate is the truncation")
{
    const auto q = field({0.5, -2.0, 4.0});
    const auto next = update_potential(q, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Constant(3, 2.0), 0.0, 3.0);
    CHECK(next.values[0] == 0.5);
    CHECK(next.values[1] == -2.0);
    CHECK(next.values[2] == 3.0);
}

TEST_CASE("update recovers Q from the exact rate on the floor-passing set")
{
    const auto g = SpaceTimeGrid::from_cfl(1.0, 1.3, 0.01, 1.0);
    const double a = 0.5;
    Eigen::VectorXd w0(g.N), Q(g.N), rate(g.N);
    PotentialField q;
    q.values = Eigen::VectorXd::Zero(g.N);
    for (int j = 1; j <= g.N; ++j) {
        const double x = g.x(j);
        w0[j - 1] = -a + x;
        Q[j - 1] = std::sin(2 * std::acos(-1.0) * x);
        rate[j - 1] = (Q[j - 1] - q.values[j - 1]) * w0[j - 1];
    }
    const auto next = update_potential(q, rate, w0, 1e-2, 3.0);
    int dead = 0;
    for (int j = 1; j <= g.N; ++j) {
        if (std::abs(g.x(j) - a) < 1e-2) {
            CHECK(next.values[j - 1] == 0.0);
            ++dead;
        } else {
            CHECK(next.values[j - 1] == doctest::Approx(Q[j - 1]).epsilon(1e-14).scale(1.0));
        }
    }
    CHECK(dead == 1);  // only x = 0.5 lies within 1e-2 of a on this grid

    Eigen::VectorXd zero_w0 = w0;
    zero_w0[10] = 0.0;
    CHECK_THROWS_AS(update_potential(q, rate, zero_w0, 0.0, 3.0), Error);
}

TEST_CASE("dead zone interpolation")
{
    const Eigen::VectorXd w0 = (Eigen::VectorXd(6) << 1.0, 1.0, 0.0, 0.0, 1.0, 0.0).finished();
    const Eigen::VectorXd q = (Eigen::VectorXd(6) << 1.0, 2.0, 0.0, 0.0, 5.0, 0.0).finished();
    const auto out = interpolate_dead_zone(q, w0, 0.5);
    CHECK(out[2] == doctest::Approx(3.0));
    CHECK(out[3] == doctest::Approx(4.0));
    CHECK(out[5] == 5.0);
    CHECK(out[0] == 1.0);
}

TEST_CASE("weighted error")
{
    const auto g = SpaceTimeGrid::make(1.0, 1.0, 4, 0.1);
    const auto Q = field({0.1, 0.2, 0.3, 0.4});
    const auto q = field({0.0, 0.2, 0.5, 0.4});
    CHECK(weighted_error(Q, Q, table1, g) == 0.0);
    CHECK(weighted_error(q, Q, table1.with_s(0.0), g) == doctest::Approx(g.h * (0.01 + 0.04)));
    // At s = 1 each node carries exp(2 (phi(0, x_j) - phi(0, x_N))).
    const double top = table1.phi(0.0, g.x(4));
    const double expect = g.h * (std::exp(2 * (table1.phi(0.0, g.x(1)) - top)) * 0.01 +
                                 std::exp(2 * (table1.phi(0.0, g.x(3)) - top)) * 0.04);
    CHECK(weighted_error(q, Q, table1.with_s(1.0), g) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(std::isfinite(weighted_error(q, Q, table1, g)));
}

TEST_CASE("high-frequency energy")
{
    CHECK(hf_energy(Eigen::VectorXd::LinSpaced(10, -1.0, 2.0)) == doctest::Approx(0.0).scale(1.0));
    const Eigen::VectorXd alt = (Eigen::VectorXd(4) << 1.0, -1.0, 1.0, -1.0).finished();
    CHECK(hf_energy(alt) == 32.0);
}

TEST_CASE("nu tilde")
{
    const auto g = SpaceTimeGrid::make(1.0, 1.3, 10, 0.1);
    Trajectory still{g, Eigen::MatrixXd::Constant(g.Nt + 1, g.N + 2, 2.0)};
    CHECK(compute_nu_tilde(still, table1, [](double) { return 1.0; }).cwiseAbs().maxCoeff() == 0.0);

    Trajectory moving{g, Eigen::MatrixXd(g.Nt + 1, g.N + 2)};
    for (int n = 0; n <= g.Nt; ++n)
        for (int j = 0; j <= g.N + 1; ++j)
            moving.values(n, j) = g.t(n) * g.t(n) * g.x(j) * g.x(j);
    CHECK(compute_nu_tilde(moving, table1, [](double) { return 0.0; }).cwiseAbs().maxCoeff() == 0.0);
    // With cutoff 1: d_tau^+ d_h^+ of 2 t x^2 (exact centered derivative of t^2) is 2 (2 x + h).
    const auto nu = compute_nu_tilde(moving, table1, [](double) { return 1.0; });
    for (int n = 1; n + 1 < g.Nt; ++n)
        for (int j = 0; j <= g.N; ++j)
            CHECK(nu(n, j) == doctest::Approx(2.0 * (2.0 * g.x(j) + g.h)).epsilon(1e-9));
}

TEST_CASE("config validation")
{
    InversionConfig c;
    c.grid = SpaceTimeGrid::from_cfl(1.0, 1.3, 0.01, 1.0);
    CHECK_NOTHROW(c.validate());
    c.m = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.m = 3.0;
    c.eps_stop = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(parse_variant("alg3") == Variant::alg3);
    CHECK_THROWS_AS(parse_variant("alg5"), ConfigError);
}

TEST_CASE("inverse crime started at the truth is a fixed point")
{
    RunConfig cfg;
    const auto r = inverse_crime(cfg, cfg.Q);
    REQUIRE(r.history.size() == 1);
    CHECK(r.converged);
    CHECK(r.stop_reason == "converged");
    CHECK(r.history[0].sup_update <= 1e-8 * 2.0);
    CHECK(r.history[0].weighted_error == 0.0);
}

TEST_CASE("inverse crime: weighted error decreases monotonically")
{
    RunConfig cfg;
    cfg.max_iter = 8;
    const auto r = inverse_crime(cfg, "0");
    for (std::size_t k = 1; k < r.history.size(); ++k)
        CHECK(r.history[k].weighted_error <= r.history[k - 1].weighted_error);
}

TEST_CASE("clean reconstruction at CFL 0.9 and s = 10")
{
    RunConfig cfg;
    cfg.cfl = 0.9;
    cfg.s = 10.0;
    cfg.Q = "sin(pi*x)";
    const auto r = dual_grid(cfg);
    CHECK(r.converged);
    CHECK(relative_error(cfg, r) < 0.01);
    for (const auto& q : r.iterates)
        CHECK(q.cwiseAbs().maxCoeff() <= cfg.m);
    CHECK(r.history.front().rel_change > 1e20);  // q^0 = 0, relative to the 1e-30 floor
}

TEST_CASE("determinism")
{
    RunConfig cfg;
    cfg.cfl = 0.9;
    cfg.s = 10.0;
    cfg.noise = 0.03;
    cfg.seed = 5;
    cfg.max_iter = 3;
    const auto a = dual_grid(cfg);
    const auto b = dual_grid(cfg);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t k = 0; k < a.history.size(); ++k) {
        CHECK(a.history[k].rel_change == b.history[k].rel_change);
        CHECK(a.history[k].weighted_error == b.history[k].weighted_error);
    }
    CHECK(a.q.values == b.q.values);
}

TEST_CASE("bound violation clamps every iterate")
{
    RunConfig cfg;
    cfg.m = 0.5;
    cfg.max_iter = 4;
    const auto r = dual_grid(cfg);
    for (const auto& q : r.iterates)
        CHECK(q.cwiseAbs().maxCoeff() <= 0.5);
    CHECK_FALSE(r.converged);
}

TEST_CASE("algorithm 3 runs and logs its history")
{
    RunConfig cfg;
    cfg.variant = "alg3";
    cfg.max_iter = 3;
    const auto r = dual_grid(cfg);
    CHECK(r.history.size() >= 1);
    for (const auto& h : r.history)
        CHECK(std::isfinite(h.rel_change));
}

TEST_CASE("geometry and shape checks")
{
    RunConfig cfg;
    const auto inv = cfg.inversion();
    const auto q0 = cfg.sample("0", inv.grid);
    FluxSeries data;
    data.tau = inv.grid.tau;
    data.values = Eigen::VectorXd::Zero(inv.grid.Nt + 1);
    const auto r = run_reconstruction(inv, data, cfg.problem(inv.grid, q0), q0);
    CHECK_FALSE(r.warnings.empty());  // table 1 geometry is marginal

    PotentialField short_q;
    short_q.values = Eigen::VectorXd::Zero(5);
    CHECK_THROWS_AS(run_reconstruction(inv, data, cfg.problem(inv.grid, q0), short_q), ShapeError);
}
