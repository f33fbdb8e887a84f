#include "wavepot/conjugate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include "wavepot/error.hpp"

namespace wavepot {

namespace {

void check_shape(const Field& y, const ConjugateOperator& op, const char* who)
{
    if (y.rows() != op.grid.Nt + 1 || y.cols() != op.grid.N + 2)
        throw ShapeError(std::string(who) + ": field shape does not match the grid");
    if (op.q.size() != op.grid.N)
        throw ShapeError(std::string(who) + ": potential size does not match the grid");
}

// exp(s (phi(n, j) - phi(m, k))) without forming either exponential alone.
double ratio(const ConjugateOperator& op, int n, int j, int m, int k)
{
    return std::exp(op.s() * (op.phi(n, j) - op.phi(m, k)));
}

} // namespace

Field apply_L(const Field& y, const ConjugateOperator& op)
{
    check_shape(y, op, "apply_L");
    const auto& g = op.grid;
    const double it2 = 1.0 / (g.tau * g.tau);
    const double ih2 = 1.0 / (g.h * g.h);
    Field out = Field::Zero(y.rows(), y.cols());
    for (int n = 1; n < g.Nt; ++n) {
        for (int j = 1; j <= g.N; ++j) {
            const double time = (ratio(op, n, j, n + 1, j) * y(n + 1, j) - 2.0 * y(n, j) +
                                 ratio(op, n, j, n - 1, j) * y(n - 1, j)) * it2;
            const double space = (ratio(op, n, j, n, j + 1) * y(n, j + 1) - 2.0 * y(n, j) +
                                  ratio(op, n, j, n, j - 1) * y(n, j - 1)) * ih2;
            out(n, j) = time - space + op.q[j - 1] * y(n, j);
        }
    }
    return out;
}

Field apply_L_naive(const Field& y, const ConjugateOperator& op)
{
    check_shape(y, op, "apply_L_naive");
    const auto& g = op.grid;
    const double s = op.s();
    const double beta = op.weight.beta();
    const double x0 = op.weight.x0();
    const double it2 = 1.0 / (g.tau * g.tau);
    const double ih2 = 1.0 / (g.h * g.h);
    Field out = Field::Zero(y.rows(), y.cols());
    for (int n = 1; n < g.Nt; ++n) {
        const double t = g.t(n);
        for (int j = 1; j <= g.N; ++j) {
            const double x = g.x(j);
            const double dtt = (y(n + 1, j) - 2.0 * y(n, j) + y(n - 1, j)) * it2;
            const double dxx = (y(n, j + 1) - 2.0 * y(n, j) + y(n, j - 1)) * ih2;
            const double dt = (y(n + 1, j) - y(n - 1, j)) / (2.0 * g.tau);
            const double dx = (y(n, j + 1) - y(n, j - 1)) / (2.0 * g.h);
            out(n, j) = dtt - dxx + op.q[j - 1] * y(n, j) + 4.0 * s * beta * t * dt +
                        4.0 * s * (x - x0) * dx + 2.0 * s * (beta + 1.0) * y(n, j) +
                        4.0 * s * s * (beta * beta * t * t - (x - x0) * (x - x0)) * y(n, j);
        }
    }
    return out;
}

Field apply_wave_operator(const Field& z, const ConjugateOperator& op)
{
    check_shape(z, op, "apply_wave_operator");
    const auto& g = op.grid;
    const double it2 = 1.0 / (g.tau * g.tau);
    const double ih2 = 1.0 / (g.h * g.h);
    Field out = Field::Zero(z.rows(), z.cols());
    for (int n = 1; n < g.Nt; ++n)
        for (int j = 1; j <= g.N; ++j)
            out(n, j) = (z(n + 1, j) - 2.0 * z(n, j) + z(n - 1, j)) * it2 -
                        (z(n, j + 1) - 2.0 * z(n, j) + z(n, j - 1)) * ih2 + op.q[j - 1] * z(n, j);
    return out;
}

struct QuadraticSystem::Factorization {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

QuadraticSystem::QuadraticSystem(ConjugateOperator op, SystemOptions options)
    : op_(std::move(op)), options_(options)
{
}

QuadraticSystem assemble_system(const ConjugateOperator& op, const SystemOptions& options)
{
    const auto& g = op.grid;
    if (op.q.size() != g.N)
        throw ShapeError("assemble_system: potential size does not match the grid");

    QuadraticSystem sys(op, options);
    const double s = op.s();
    if (s * g.h > options.sh_bound) {
        std::ostringstream os;
        os << "s*h = " << s * g.h << " exceeds the admissibility bound " << options.sh_bound
           << "; the discrete functional may lose coercivity";
        sys.warnings_.push_back(os.str());
    }

    const int N = g.N;
    const int unknowns = g.Nt * N;
    auto idx = [&](int n, int j) { return (n - 1) * N + (j - 1); };
    auto in_trial = [&](int n, int j) { return n >= 1 && n <= g.Nt && j >= 1 && j <= N; };

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(unknowns) * 14);
    int row = 0;

    // Interior residual rows, weight h tau.
    {
        const double w = std::sqrt(g.h * g.tau);
        const double it2 = 1.0 / (g.tau * g.tau);
        const double ih2 = 1.0 / (g.h * g.h);
        for (int n = 1; n < g.Nt; ++n) {
            for (int j = 1; j <= N; ++j, ++row) {
                entries.emplace_back(row, idx(n, j), w * (-2.0 * it2 + 2.0 * ih2 + op.q[j - 1]));
                entries.emplace_back(row, idx(n + 1, j), w * it2 * ratio(op, n, j, n + 1, j));
                if (n - 1 >= 1)
                    entries.emplace_back(row, idx(n - 1, j), w * it2 * ratio(op, n, j, n - 1, j));
                if (j - 1 >= 1)
                    entries.emplace_back(row, idx(n, j - 1), -w * ih2 * ratio(op, n, j, n, j - 1));
                if (j + 1 <= N)
                    entries.emplace_back(row, idx(n, j + 1), -w * ih2 * ratio(op, n, j, n, j + 1));
            }
        }
    }

    // Boundary observation rows Y_N / h, weight s tau.
    {
        const double w = std::sqrt(s * g.tau) / g.h;
        for (int n = 1; n <= g.Nt; ++n, ++row)
            entries.emplace_back(row, idx(n, N), w);
    }

    // Region O, weight oterm_coeff s^3 h tau.
    if (options.oterm_coeff > 0.0 && s > 0.0) {
        const double w = std::sqrt(options.oterm_coeff * s * s * s * g.h * g.tau);
        for (int n = 1; n <= g.Nt; ++n)
            for (int j = 1; j <= N; ++j)
                if (op.weight.in_region_O(g.t(n), g.x(j)))
                    entries.emplace_back(row++, idx(n, j), w);
    }

    // High-frequency penalty (d_tau^+ d_h^+ Y)^2 over n = 0..Nt-1, j = 0..N, weight s h^2 h tau.
    if (options.penalty && s > 0.0) {
        const double w = std::sqrt(s * g.h * g.h * g.h * g.tau) / (g.tau * g.h);
        for (int n = 0; n < g.Nt; ++n) {
            for (int j = 0; j <= N; ++j, ++row) {
                const int nodes[4][2] = {{n + 1, j + 1}, {n + 1, j}, {n, j + 1}, {n, j}};
                const double signs[4] = {1.0, -1.0, -1.0, 1.0};
                for (int k = 0; k < 4; ++k)
                    if (in_trial(nodes[k][0], nodes[k][1]))
                        entries.emplace_back(row, idx(nodes[k][0], nodes[k][1]), w * signs[k]);
            }
        }
    }

    Eigen::SparseMatrix<double> C(row, unknowns);
    C.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseMatrix<double> A = C.transpose() * C;
    Eigen::SparseMatrix<double> At = A.transpose();
    sys.matrix_ = 0.5 * (A + At);
    sys.matrix_.makeCompressed();

    auto f = std::make_shared<QuadraticSystem::Factorization>();
    f->llt.compute(sys.matrix_);
    sys.factored_ = f->llt.info() == Eigen::Success;
    if (sys.factored_)
        sys.factor_ = std::move(f);
    else
        sys.warnings_.push_back("Cholesky factorization failed: the assembled form is not positive definite");
    return sys;
}

Eigen::VectorXd QuadraticSystem::pack(const Field& y) const
{
    const auto& g = op_.grid;
    if (y.rows() != g.Nt + 1 || y.cols() != g.N + 2)
        throw ShapeError("pack: field shape does not match the grid");
    Eigen::VectorXd v(unknowns());
    for (int n = 1; n <= g.Nt; ++n)
        for (int j = 1; j <= g.N; ++j)
            v[index(n, j)] = y(n, j);
    return v;
}

Field QuadraticSystem::unpack(const Eigen::VectorXd& v) const
{
    const auto& g = op_.grid;
    if (v.size() != unknowns())
        throw ShapeError("unpack: vector size does not match the system");
    Field y = Field::Zero(g.Nt + 1, g.N + 2);
    for (int n = 1; n <= g.Nt; ++n)
        for (int j = 1; j <= g.N; ++j)
            y(n, j) = v[index(n, j)];
    return y;
}

double QuadraticSystem::form(const Field& a, const Field& b) const
{
    return pack(a).dot(matrix_ * pack(b));
}

Eigen::VectorXd QuadraticSystem::rhs(const FluxSeries& mu, double shift, const Field* nu) const
{
    const auto& g = op_.grid;
    if (mu.size() != g.Nt + 1)
        throw ShapeError("rhs: boundary target is not on the time grid");
    const double s = op_.s();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(unknowns());
    for (int n = 1; n <= g.Nt; ++n) {
        if (mu.values[n] == 0.0)
            continue;
        const double scale = std::exp(s * (op_.phi(n, g.N) - shift));
        b[index(n, g.N)] += -s * scale * mu.values[n] * g.tau / g.h;
    }
    if (nu && options_.penalty) {
        if (nu->rows() != g.Nt + 1 || nu->cols() != g.N + 2)
            throw ShapeError("rhs: penalty target shape does not match the grid");
        const double w = s * g.h * g.h * g.h * g.tau / (g.tau * g.h);
        for (int n = 0; n < g.Nt; ++n) {
            for (int j = 0; j <= g.N; ++j) {
                const double target = (*nu)(n, j);
                if (target == 0.0)
                    continue;
                const double c = w * std::exp(s * (op_.phi(n, j) - shift)) * target;
                const int nodes[4][2] = {{n + 1, j + 1}, {n + 1, j}, {n, j + 1}, {n, j}};
                const double signs[4] = {1.0, -1.0, -1.0, 1.0};
                for (int k = 0; k < 4; ++k) {
                    const int m = nodes[k][0], i = nodes[k][1];
                    if (m >= 1 && i >= 1 && i <= g.N)
                        b[index(m, i)] += c * signs[k];
                }
            }
        }
    }
    return b;
}

QuadraticSystem::Solution QuadraticSystem::solve(const Eigen::VectorXd& b, double tol) const
{
    Solution out;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        out.y = Eigen::VectorXd::Zero(unknowns());
        return out;
    }
    if (!b.allFinite())
        throw NonFiniteError("solve: right-hand side is not finite");

    if (factored_) {
        out.y = factor_->llt.solve(b);
        for (int refine = 0; refine < 3; ++refine) {
            const Eigen::VectorXd r = b - matrix_ * out.y;
            out.residual = r.norm() / bnorm;
            if (out.residual <= tol)
                return out;
            out.y += factor_->llt.solve(r);
        }
        out.residual = (b - matrix_ * out.y).norm() / bnorm;
        if (out.residual <= tol)
            return out;
    } else {
        out.y = Eigen::VectorXd::Zero(unknowns());
    }

    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(std::max(1000, 20 * unknowns()));
    cg.compute(matrix_);
    out.y = cg.solveWithGuess(b, out.y);
    out.used_fallback = true;
    out.residual = (b - matrix_ * out.y).norm() / bnorm;
    if (!(out.residual <= tol)) {
        std::ostringstream os;
        os << "solve: linear solver did not reach relative residual " << tol << " (got " << out.residual << ")";
        throw SolverError(os.str());
    }
    return out;
}

MinimizerResult solve_min(const QuadraticSystem& sys, const FluxSeries& target, double shift, const Field* nu)
{
    const auto b = sys.rhs(target, shift, nu);
    auto sol = sys.solve(b);
    MinimizerResult r;
    r.Y = sys.unpack(sol.y);
    r.residual = sol.residual;
    r.block_shift = shift;
    return r;
}

Eigen::VectorXd initial_rate(const ConjugateOperator& op, const Field& Y, double shift)
{
    const auto& g = op.grid;
    Eigen::VectorXd rate(g.N);
    for (int j = 1; j <= g.N; ++j) {
        const double v = Y(1, j) / g.tau;
        if (v == 0.0) {
            rate[j - 1] = 0.0;
            continue;
        }
        const double exponent = std::log(std::abs(v)) + op.s() * (shift - op.phi(0, j));
        rate[j - 1] = std::copysign(std::exp(exponent), v);
    }
    return rate;
}

bool block_shift(const ConjugateOperator& op, const CutoffFamily& cut, int j, double& shift)
{
    const auto& g = op.grid;
    bool found = false;
    double best = -std::numeric_limits<double>::infinity();
    for (int n = 0; n <= g.Nt; ++n) {
        if (cut.eta_j(j, op.weight.phi(g.t(n), g.L)) == 0.0)
            continue;
        found = true;
        best = std::max(best, op.phi(n, g.N));
    }
    shift = found ? best : 0.0;
    return found;
}

ProgressiveResult progressive_minimize(const QuadraticSystem& sys, const BlockTargets& targets,
                                       const CutoffFamily& cut, const std::vector<Field>& nu_blocks,
                                       bool keep_partial)
{
    const auto& op = sys.op();
    const int blocks = static_cast<int>(targets.blocks.size());
    if (blocks != cut.ncut())
        throw ShapeError("progressive_minimize: block count does not match the cut-off family");
    if (!nu_blocks.empty() && static_cast<int>(nu_blocks.size()) != blocks)
        throw ShapeError("progressive_minimize: penalty targets do not match the block count");

    struct Partial {
        BlockReport report;
        Eigen::VectorXd rate;
    };
    auto run_block = [&](int j) {
        Partial p;
        p.report.block = j;
        p.rate = Eigen::VectorXd::Zero(op.grid.N);
        double shift = 0.0;
        if (!block_shift(op, cut, j, shift))
            return p;
        p.report.active = true;
        p.report.shift = shift;
        const Field* nu = nu_blocks.empty() ? nullptr : &nu_blocks[j - 1];
        const auto r = solve_min(sys, targets.blocks[j - 1], shift, nu);
        p.report.residual = r.residual;
        p.rate = initial_rate(op, r.Y, shift);
        return p;
    };

    std::vector<Partial> parts(blocks);
    const unsigned workers = std::thread::hardware_concurrency();
    if (workers > 1 && blocks > 1) {
        std::vector<std::future<Partial>> futures;
        futures.reserve(blocks);
        for (int j = 1; j <= blocks; ++j)
            futures.push_back(std::async(std::launch::async, run_block, j));
        for (int j = 0; j < blocks; ++j)
            parts[j] = futures[j].get();
    } else {
        for (int j = 1; j <= blocks; ++j)
            parts[j - 1] = run_block(j);
    }

    // Fixed summation order keeps the result independent of scheduling.
    ProgressiveResult out;
    out.rate = Eigen::VectorXd::Zero(op.grid.N);
    for (auto& p : parts) {
        out.rate += p.rate;
        out.blocks.push_back(p.report);
        if (keep_partial)
            out.partial_rates.push_back(out.rate);
    }
    return out;
}

Eigen::VectorXd direct_minimize(const QuadraticSystem& sys, const FluxSeries& target)
{
    const auto r = solve_min(sys, target, 0.0);
    return initial_rate(sys.op(), r.Y, 0.0);
}

void write_matrix_coordinates(const QuadraticSystem& sys, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open " + path + " for writing");
    const auto& A = sys.matrix();
    out << "# rows " << A.rows() << " cols " << A.cols() << " nnz " << A.nonZeros() << "\n";
    char buf[96];
    for (int k = 0; k < A.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
            std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(it.row()),
                          static_cast<long>(it.col()), it.value());
            out << buf;
        }
    }
}

} // namespace wavepot
