#include "wavepot/wave.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wavepot/error.hpp"

namespace wavepot {

namespace {

constexpr double kCornerTolerance = 1e-8;

// Constant tridiagonal system (1 + 2 a) u_j - a (u_{j-1} + u_{j+1}) = r_j
// with homogeneous ends, factored once.
class ConstantTridiagonal {
public:
    ConstantTridiagonal(int n, double a) : a_(a), cprime_(n), denom_(n)
    {
        const double diag = 1.0 + 2.0 * a;
        const double off = -a;
        for (int i = 0; i < n; ++i) {
            const double d = i == 0 ? diag : diag - off * cprime_[i - 1];
            denom_[i] = d;
            cprime_[i] = off / d;
        }
    }

    void solve(Eigen::Ref<Eigen::VectorXd> r) const
    {
        const double off = -a_;
        const int n = static_cast<int>(r.size());
        r[0] /= denom_[0];
        for (int i = 1; i < n; ++i)
            r[i] = (r[i] - off * r[i - 1]) / denom_[i];
        for (int i = n - 2; i >= 0; --i)
            r[i] -= cprime_[i] * r[i + 1];
    }

private:
    double a_;
    std::vector<double> cprime_;
    std::vector<double> denom_;
};

double source_at(const WaveProblem& p, double t, double x)
{
    return p.source ? p.source(t, x) : 0.0;
}

// Runs the scheme and hands every completed time level to sink(n, w).
template <class Sink>
void march(const WaveProblem& p, const SpaceTimeGrid& g, double theta, Sink&& sink)
{
    p.validate(g);
    if (!(theta >= 0.0 && theta <= 1.0))
        throw ConfigError("solve_wave: theta must lie in [0, 1]");
    if (theta < 0.25) {
        const double limit = 1.0 / std::sqrt(1.0 - 4.0 * theta);
        if (g.cfl > limit * (1.0 + 1e-12))
            throw StabilityError("solve_wave: CFL ratio " + std::to_string(g.cfl) +
                                 " exceeds the stability limit " + std::to_string(limit) +
                                 " of the theta = " + std::to_string(theta) + " scheme");
    }

    const int N = g.N;
    const double h2 = g.h * g.h;
    const double tau2 = g.tau * g.tau;
    const Eigen::VectorXd& q = p.q.values;

    auto laplacian = [&](const Eigen::VectorXd& w, int j) {
        return (w[j + 1] - 2.0 * w[j] + w[j - 1]) / h2;
    };
    auto check_finite = [&](const Eigen::VectorXd& w, int n) {
        if (!w.allFinite())
            throw NonFiniteError("solve_wave: non-finite value at time step " + std::to_string(n));
    };

    Eigen::VectorXd prev = p.w0;
    prev[0] = p.boundary_left(0.0);
    prev[N + 1] = p.boundary_right(0.0);
    sink(0, prev);

    Eigen::VectorXd cur(N + 2);
    cur[0] = p.boundary_left(g.t(1));
    cur[N + 1] = p.boundary_right(g.t(1));
    for (int j = 1; j <= N; ++j) {
        const double acc = laplacian(prev, j) - q[j - 1] * prev[j] + source_at(p, 0.0, g.x(j));
        cur[j] = prev[j] + g.tau * p.w1[j] + 0.5 * tau2 * acc;
    }
    check_finite(cur, 1);
    sink(1, cur);

    const double a = theta * tau2 / h2;
    const ConstantTridiagonal system(N, a);
    Eigen::VectorXd next(N + 2);
    Eigen::VectorXd rhs(N);
    for (int n = 1; n < g.Nt; ++n) {
        const double t = g.t(n);
        next[0] = p.boundary_left(g.t(n + 1));
        next[N + 1] = p.boundary_right(g.t(n + 1));
        for (int j = 1; j <= N; ++j) {
            double r = 2.0 * cur[j] - prev[j];
            r += tau2 * ((1.0 - 2.0 * theta) * laplacian(cur, j) + theta * laplacian(prev, j) -
                         q[j - 1] * cur[j] + source_at(p, t, g.x(j)));
            rhs[j - 1] = r;
        }
        if (theta > 0.0) {
            rhs[0] += a * next[0];
            rhs[N - 1] += a * next[N + 1];
            system.solve(rhs);
        }
        next.segment(1, N) = rhs;
        check_finite(next, n + 1);
        sink(n + 1, next);
        std::swap(prev, cur);
        std::swap(cur, next);
    }
}

} // namespace

PotentialField sample_potential(const SpaceTimeGrid& g, const std::function<double(double)>& fn, double bound)
{
    PotentialField q;
    q.bound = bound;
    q.values.resize(g.N);
    for (int j = 1; j <= g.N; ++j)
        q.values[j - 1] = fn(g.x(j));
    return q;
}

void WaveProblem::validate(const SpaceTimeGrid& g) const
{
    if (q.size() != g.N)
        throw ShapeError("wave problem: potential has " + std::to_string(q.size()) +
                         " values, grid has " + std::to_string(g.N) + " interior nodes");
    if (w0.size() != g.N + 2 || w1.size() != g.N + 2)
        throw ShapeError("wave problem: initial data must cover all N + 2 nodes");
    if (!boundary_left || !boundary_right)
        throw ConfigError("wave problem: boundary data missing");
    if (std::abs(boundary_left(0.0) - w0[0]) > kCornerTolerance ||
        std::abs(boundary_right(0.0) - w0[g.N + 1]) > kCornerTolerance)
        throw ConfigError("wave problem: boundary data incompatible with w0 at t = 0");
}

Trajectory solve_wave(const WaveProblem& p, const SpaceTimeGrid& g, double theta)
{
    Trajectory tr;
    tr.grid = g;
    tr.values.resize(g.Nt + 1, g.N + 2);
    march(p, g, theta, [&](int n, const Eigen::VectorXd& w) { tr.values.row(n) = w.transpose(); });
    return tr;
}

FluxSeries solve_wave_flux(const WaveProblem& p, const SpaceTimeGrid& g, double theta)
{
    FluxSeries out;
    out.tau = g.tau;
    out.values.resize(g.Nt + 1);
    march(p, g, theta, [&](int n, const Eigen::VectorXd& w) {
        out.values[n] = (w[g.N + 1] - w[g.N]) / g.h;
    });
    return out;
}

FluxSeries extract_flux(const Trajectory& tr)
{
    const auto& g = tr.grid;
    FluxSeries out;
    out.tau = g.tau;
    out.values = (tr.values.col(g.N + 1) - tr.values.col(g.N)) / g.h;
    return out;
}

FluxSeries time_derivative(const FluxSeries& series)
{
    const int n = series.size();
    if (n < 3)
        throw ShapeError("time_derivative: need at least 3 samples");
    const auto& m = series.values;
    const double inv = 1.0 / (2.0 * series.tau);
    FluxSeries d;
    d.tau = series.tau;
    d.values.resize(n);
    d.values[0] = (-3.0 * m[0] + 4.0 * m[1] - m[2]) * inv;
    for (int i = 1; i < n - 1; ++i)
        d.values[i] = (m[i + 1] - m[i - 1]) * inv;
    d.values[n - 1] = (3.0 * m[n - 1] - 4.0 * m[n - 2] + m[n - 3]) * inv;
    return d;
}

FluxSeries resample(const FluxSeries& series, const SpaceTimeGrid& target)
{
    if (series.size() < 2)
        throw ShapeError("resample: source series too short");
    const double end = target.t(target.Nt);
    const double source_end = series.end_time();
    if (end > source_end * (1.0 + 1e-12) + 1e-14)
        throw ShapeError("resample: target range exceeds the source range");

    FluxSeries out;
    out.tau = target.tau;
    out.values.resize(target.Nt + 1);
    const int last = series.size() - 1;
    for (int n = 0; n <= target.Nt; ++n) {
        const double pos = target.t(n) / series.tau;
        int i = static_cast<int>(std::floor(pos));
        i = std::clamp(i, 0, last - 1);
        const double frac = std::clamp(pos - i, 0.0, 1.0);
        out.values[n] = series.values[i] + frac * (series.values[i + 1] - series.values[i]);
    }
    return out;
}

FluxSeries operator-(const FluxSeries& a, const FluxSeries& b)
{
    if (a.size() != b.size() || std::abs(a.tau - b.tau) > 1e-12 * a.tau)
        throw ShapeError("flux series on different time grids");
    FluxSeries d;
    d.tau = a.tau;
    d.values = a.values - b.values;
    return d;
}

} // namespace wavepot
