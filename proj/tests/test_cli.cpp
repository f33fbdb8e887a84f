#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wavepot/commands.hpp"
#include "wavepot/config.hpp"
#include "wavepot/error.hpp"
#include "wavepot/expr.hpp"
#include "wavepot/io.hpp"

using namespace wavepot;
namespace fs = std::filesystem;

namespace {

const double pi = std::acos(-1.0);

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("wavepot_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

nlohmann::ordered_json read_json(const fs::path& p)
{
    return nlohmann::ordered_json::parse(slurp(p));
}

// A cheap configuration: coarse direct grid, s = 10 on a CFL 0.9 inverse grid.
RunConfig quick(const fs::path& out)
{
    RunConfig c;
    c.direct_tau = 0.002;
    c.direct_h = 0.0025;
    c.s = 10.0;
    c.cfl = 0.9;
    c.Q = "sin(pi*x)";
    c.max_iter = 3;
    c.out = out.string();
    return c;
}

int run_binary(const std::string& args)
{
    const char* bin = std::getenv("WAVEPOT_BIN");
    REQUIRE(bin != nullptr);
    const int status = std::system((std::string(bin) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("expressions")
{
    CHECK(Expression::parse("2 + sin(pi*x)")(0.5) == doctest::Approx(3.0));
    CHECK(Expression::parse("-2^2")(0.0) == -4.0);
    CHECK(Expression::parse("2^3^2")(0.0) == 512.0);
    CHECK(Expression::parse("(2^3)^2")(0.0) == 64.0);
    CHECK(Expression::parse("1 - 2 - 3")(0.0) == -4.0);
    CHECK(Expression::parse("8 / 4 / 2")(0.0) == 1.0);
    CHECK(Expression::parse("x*(1-x)*t^2")(0.5, 2.0) == doctest::Approx(1.0));
    CHECK(Expression::parse("exp(0) + sqrt(4) + abs(-3) + cos(0)")(0.0) == 7.0);
    CHECK(Expression::parse("1.5e-1")(0.0) == 0.15);
    CHECK(Expression::parse("x*t").uses_t());
    CHECK_FALSE(Expression::parse("sin(x)").uses_t());
    CHECK(Expression::parse(" 2*x ").text() == " 2*x ");
    for (const char* bad : {"", "sin(", "2 +", "foo(x)", "x y", "(1", "1)", "2**3", "y"})
        CHECK_THROWS_AS(Expression::parse(bad), ConfigError);
}

TEST_CASE("config defaults")
{
    RunConfig c;
    CHECK(c.L == 1.0);
    CHECK(c.T == 1.3);
    CHECK(c.x0 == -0.3);
    CHECK(c.beta == 0.99);
    CHECK(c.s == 100.0);
    CHECK(c.m == 3.0);
    CHECK(c.f_partial == "2");
    CHECK(c.w0 == "2 + sin(pi*x)");
    CHECK(c.direct_grid().N == 3999);
    CHECK(c.direct_grid().Nt == 3940);
    CHECK(c.inverse_grid().N == 99);
    CHECK(c.inverse_grid().Nt == 130);
    CHECK(c.effective_reg_passes() == 0);
    c.noise = 0.05;
    CHECK(c.effective_reg_passes() == 5);
    c.reg_passes = 2;
    CHECK(c.effective_reg_passes() == 2);
}

TEST_CASE("config text round trip")
{
    RunConfig a;
    a.load_text("# comment\n s = 12.5 \nQ = x*(1-x)  # trailing\n\npenalty = off\nseed = 77\nvariant=alg3\n");
    CHECK(a.s == 12.5);
    CHECK(a.Q == "x*(1-x)");
    CHECK_FALSE(a.penalty);
    CHECK(a.seed == 77u);
    CHECK(a.variant == "alg3");

    RunConfig b;
    b.load_text(a.dump());
    CHECK(b.dump() == a.dump());
    for (const auto& key : RunConfig::keys())
        CHECK(b.get(key) == a.get(key));
    CHECK(RunConfig().get("eps_stop") == "1e-05");
}

TEST_CASE("config errors")
{
    RunConfig c;
    CHECK_THROWS_AS(c.load_text("nonsense = 1\n"), ConfigError);
    CHECK_THROWS_AS(c.load_text("s 10\n"), ConfigError);
    CHECK_THROWS_AS(c.load_text("s = ten\n"), ConfigError);
    CHECK_THROWS_AS(c.load_text("max_iter = 2.5\n"), ConfigError);
    CHECK_THROWS_AS(c.load_text("penalty = maybe\n"), ConfigError);
    CHECK_THROWS_AS(c.load("/nonexistent/wavepot.cfg"), ConfigError);
    try {
        c.load_text("s = 1\nbogus = 2\n", "run.cfg");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("run.cfg:2") != std::string::npos);
    }
}

TEST_CASE("problem data from expressions")
{
    RunConfig c;
    const auto g = SpaceTimeGrid::from_cfl(1.0, 1.3, 0.01, 1.0);
    const auto p = c.problem(g, c.sample("0", g));
    CHECK(p.w0[0] == 2.0);
    CHECK(p.w0[g.N + 1] == 2.0);
    CHECK(p.w0[50] == doctest::Approx(2.0 + std::sin(pi * g.x(50))));
    CHECK(p.boundary_right(0.7) == 2.0);
    CHECK_FALSE(p.source);

    c.f = "x*t";
    CHECK(c.problem(g, c.sample("0", g)).source(2.0, 0.25) == doctest::Approx(0.5));

    c.w0 = "x";
    CHECK_THROWS_AS(c.problem(g, c.sample("0", g)), ConfigError);
}

TEST_CASE("potential from a nodal file")
{
    const auto dir = scratch("nodal");
    fs::create_directories(dir);
    const auto file = dir / "q.csv";
    write_csv(file.string(), {"x", "q"},
              {Eigen::VectorXd::LinSpaced(3, 0.0, 1.0), (Eigen::VectorXd(3) << 0.0, 2.0, 0.0).finished()});
    RunConfig c;
    const auto g = SpaceTimeGrid::make(1.0, 1.0, 3, 0.1);
    const auto q = c.sample("file:" + file.string(), g);
    CHECK(q.values[0] == doctest::Approx(1.0));
    CHECK(q.values[1] == doctest::Approx(2.0));
    CHECK(q.values[2] == doctest::Approx(1.0));
    fs::remove_all(dir);
}

TEST_CASE("CSV schema and full precision")
{
    const auto dir = scratch("csv");
    fs::create_directories(dir);
    FluxSeries s;
    s.tau = 0.00033;
    s.values = Eigen::VectorXd::LinSpaced(7, 0.1, 1.0 / 3.0);
    write_flux_csv((dir / "f.csv").string(), s);
    const auto text = slurp(dir / "f.csv");
    CHECK(text.rfind("t,flux\n", 0) == 0);
    const auto back = read_flux_csv((dir / "f.csv").string());
    CHECK(back.tau == doctest::Approx(s.tau).epsilon(1e-15));
    CHECK(back.values == s.values);

    const auto g = SpaceTimeGrid::make(1.0, 0.2, 2, 0.1);
    Trajectory tr{g, Eigen::MatrixXd::Random(g.Nt + 1, g.N + 2)};
    write_trajectory_csv((dir / "w.csv").string(), tr);
    const auto table = read_csv((dir / "w.csv").string());
    CHECK(table.header == std::vector<std::string>{"t", "x", "w"});
    CHECK(table.rows() == (g.Nt + 1) * (g.N + 2));
    CHECK(table.column("w")[5] == tr.values(1, 1));

    std::ofstream((dir / "bad.csv").string()) << "t,flux\n0,1\n0.1,2\n0.25,3\n";
    CHECK_THROWS_AS(read_flux_csv((dir / "bad.csv").string()), ConfigError);
    std::ofstream((dir / "nan.csv").string()) << "t,flux\n0,1\n0.1,abc\n";
    CHECK_THROWS_AS(read_flux_csv((dir / "nan.csv").string()), ConfigError);
    CHECK_THROWS_AS(table.column("flux"), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("simulate writes the measurement files")
{
    const auto dir = scratch("simulate");
    auto c = quick(dir);
    c.noise = 0.02;
    c.seed = 3;
    const auto doc = cmd_simulate(c);
    const auto clean = read_flux_csv((dir / "measurement_clean.csv").string());
    CHECK(clean.size() == c.direct_grid().Nt + 1);
    CHECK(fs::exists(dir / "measurement_noisy.csv"));
    CHECK(fs::exists(dir / "measurement_regularized.csv"));
    CHECK(fs::exists(dir / "config.txt"));

    const auto side = read_json(dir / "measurement.json");
    CHECK(side["alpha"] == 0.02);
    CHECK(side["seed"] == 3);
    CHECK(side["passes"] == 2);
    CHECK(side["config"]["Q"] == "sin(pi*x)");
    CHECK(side["files"]["regularized"]["provenance"][2]["passes"] == 2);

    // Same seed, identical noisy file.
    const auto first = slurp(dir / "measurement_noisy.csv");
    cmd_simulate(c);
    CHECK(slurp(dir / "measurement_noisy.csv") == first);

    // The config echo regenerates the run.
    RunConfig echo;
    echo.load((dir / "config.txt").string());
    CHECK(echo.dump() == c.dump());
    fs::remove_all(dir);
}

TEST_CASE("simulate table 1 defaults has one row per fine time level")
{
    const auto dir = scratch("table1");
    RunConfig c;
    c.out = dir.string();
    cmd_simulate(c);
    const auto table = read_csv((dir / "measurement_clean.csv").string());
    CHECK(table.rows() == 3941);
    fs::remove_all(dir);
}

TEST_CASE("zero potential with constant data gives zero flux")
{
    const auto dir = scratch("zero");
    auto c = quick(dir);
    c.Q = "0";
    c.w0 = "2";
    cmd_simulate(c);
    const auto flux = read_flux_csv((dir / "measurement_clean.csv").string());
    CHECK(flux.values.cwiseAbs().maxCoeff() <= 1e-9);
    fs::remove_all(dir);
}

TEST_CASE("invert writes history, potentials and summary")
{
    const auto dir = scratch("invert");
    auto c = quick(dir);
    cmd_simulate(c);
    const auto doc = cmd_invert(c, {"", true});
    const auto summary = read_json(dir / "summary.json");
    CHECK(summary["iterations"] == 3);
    CHECK(summary.contains("converged"));
    CHECK(summary.contains("timings"));
    CHECK(summary["config"]["s"] == "10");
    CHECK(summary["rel_l2_error"].get<double>() < 0.05);

    const auto history = read_csv((dir / "history.csv").string());
    CHECK(history.header ==
          std::vector<std::string>{"k", "rel_change", "weighted_error", "sup_update", "hf_energy", "seconds"});
    CHECK(history.rows() == 3);
    for (int k = 0; k <= 3; ++k) {
        const auto p = read_csv((dir / ("potential_" + std::to_string(k) + ".csv")).string());
        CHECK(p.header == std::vector<std::string>{"x", "q"});
        CHECK(p.rows() == c.inverse_grid().N);
    }
    CHECK(fs::exists(dir / "potential_exact.csv"));
    CHECK(fs::exists(dir / "matrix_q0.txt"));
    fs::remove_all(dir);
}

TEST_CASE("invert rejects a measurement that stops before T")
{
    const auto dir = scratch("short");
    fs::create_directories(dir);
    FluxSeries s;
    s.tau = 0.01;
    s.values = Eigen::VectorXd::Zero(50);
    write_flux_csv((dir / "m.csv").string(), s);
    auto c = quick(dir);
    CHECK_THROWS_AS(cmd_invert(c, {(dir / "m.csv").string(), false}), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("verify report")
{
    const auto dir = scratch("verify");
    RunConfig c;
    c.out = dir.string();
    const auto report = cmd_verify(c);
    CHECK(report.passed());
    CHECK(read_json(dir / "verify.json")["passed"] == true);

    // Broken region-O coefficient: only the functional comparison notices.
    c.oterm_coeff = 0.0;
    const auto broken = cmd_verify(c);
    CHECK_FALSE(broken.passed());
    for (const auto& check : broken.checks)
        CHECK(check.passed == (check.name != "form_matches_functional"));

    // s h above the bound produces the admissibility warning.
    c.oterm_coeff = 2.0;
    c.tau = 0.02;
    bool warned = false;
    for (const auto& w : cmd_verify(c).warnings)
        warned = warned || w.find("admissibility") != std::string::npos;
    CHECK(warned);
    fs::remove_all(dir);
}

TEST_CASE("sweep")
{
    const auto dir = scratch("sweep");
    auto c = quick(dir);
    c.max_iter = 2;
    cmd_sweep(c, SweepAxis::noise, {0.01, 0.05, 0.1});
    const auto table = read_csv((dir / "sweep.csv").string());
    CHECK(table.rows() == 3);
    CHECK(table.column("value")[1] == 0.05);
    CHECK(table.column("rel_l2_error").allFinite());
    CHECK_THROWS_AS(cmd_sweep(c, SweepAxis::s, {}), ConfigError);
    CHECK_THROWS_AS(parse_sweep_axis("tau"), ConfigError);
    CHECK(parse_sweep_axis("CFL") == SweepAxis::cfl);

    cmd_sweep(c, SweepAxis::N, {29, 59});
    const auto byn = read_csv((dir / "sweep.csv").string());
    CHECK(byn.rows() == 2);
    CHECK(read_csv((dir / "sweep_1_potential.csv").string()).rows() == 59);
    fs::remove_all(dir);
}

TEST_CASE("command-line exit codes")
{
    const auto dir = scratch("exit");
    const std::string out = " --out " + dir.string();
    CHECK(run_binary("--help") == 0);
    CHECK(run_binary("verify" + out) == 0);
    CHECK(run_binary("verify --break-oterm" + out) == 2);
    CHECK(run_binary("invert --no-such-flag" + out) == 1);
    CHECK(run_binary("sweep --axis s" + out) == 1);
    CHECK(run_binary("simulate --x0 0.5" + out) == 1);
    CHECK(run_binary("simulate --s 10 --direct_tau 0.002 --direct_h 0.0025" + out) == 0);
    CHECK(fs::exists(dir / "measurement_clean.csv"));
    fs::remove_all(dir);
}
