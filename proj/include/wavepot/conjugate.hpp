#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "wavepot/cutoff.hpp"
#include "wavepot/grid.hpp"
#include "wavepot/measurement.hpp"
#include "wavepot/wave.hpp"
#include "wavepot/weight.hpp"

namespace wavepot {

/// Space-time field, rows n = 0..Nt and columns j = 0..N+1.
using Field = Eigen::MatrixXd;

/// Discrete conjugated wave operator
///   L y = exp(s phi) (Delta_tau - Delta_h + q) (exp(-s phi) y)
/// on the interior nodes n = 1..Nt-1, j = 1..N.
struct ConjugateOperator {
    SpaceTimeGrid grid;
    CarlemanWeight weight;
    Eigen::VectorXd q;  // interior nodes

    double s() const { return weight.s(); }
    double phi(int n, int j) const { return weight.phi(grid.t(n), grid.x(j)); }
};

/// Applies the operator using only exponentials of phi differences between
/// neighbouring nodes. Rows 0 and Nt and the space boundary columns of the
/// result are zero.
Field apply_L(const Field& y, const ConjugateOperator& op);

/// Direct discretization of the expanded conjugated operator (centered
/// first differences, s-dependent coefficients evaluated pointwise).
Field apply_L_naive(const Field& y, const ConjugateOperator& op);

/// (Delta_tau - Delta_h + q) z on the interior nodes.
Field apply_wave_operator(const Field& z, const ConjugateOperator& op);

struct SystemOptions {
    bool penalty = true;        // high-frequency term s h^2 |d_t d_h^+ y|^2
    double oterm_coeff = 2.0;   // weight of s^3 sum over the region O
    double sh_bound = 1.0;      // admissibility window on s h
};

class QuadraticSystem;

/// Builds the symmetric form of the discrete variational problem over the
/// trial space {Y^0 = 0, Y_0 = Y_{N+1} = 0}; unknowns are Y^n_j with
/// n = 1..Nt and j = 1..N. The matrix is factored on construction.
QuadraticSystem assemble_system(const ConjugateOperator& op, const SystemOptions& options = {});

class QuadraticSystem {
public:
    const ConjugateOperator& op() const { return op_; }
    const SystemOptions& options() const { return options_; }
    bool penalty_enabled() const { return options_.penalty; }
    double oterm_coeff() const { return options_.oterm_coeff; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Full symmetric matrix.
    const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }
    int unknowns() const { return static_cast<int>(matrix_.rows()); }
    bool factorization_ok() const { return factored_; }

    int index(int n, int j) const { return (n - 1) * op_.grid.N + (j - 1); }
    Eigen::VectorXd pack(const Field& y) const;
    Field unpack(const Eigen::VectorXd& v) const;

    /// A(Y, y) for fields in the trial space.
    double form(const Field& a, const Field& b) const;

    /// Right-hand side for a boundary target mu (on the time grid) scaled by
    /// exp(-s shift):
    ///   b(y) = s sum_n exp(s (phi(t^n, x_N) - shift)) mu^n (-y^n_N / h) tau
    /// plus, when nu is given, the matching cross term of the penalty.
    Eigen::VectorXd rhs(const FluxSeries& mu, double shift, const Field* nu = nullptr) const;

    struct Solution {
        Eigen::VectorXd y;
        double residual = 0.0;
        bool used_fallback = false;
    };

    /// Solves A y = b to relative residual tol; direct factorization first,
    /// preconditioned conjugate gradients as fallback.
    Solution solve(const Eigen::VectorXd& b, double tol = 1e-10) const;

private:
    friend QuadraticSystem assemble_system(const ConjugateOperator&, const SystemOptions&);
    struct Factorization;

    QuadraticSystem(ConjugateOperator op, SystemOptions options);

    ConjugateOperator op_;
    SystemOptions options_;
    std::vector<std::string> warnings_;
    Eigen::SparseMatrix<double> matrix_;
    std::shared_ptr<const Factorization> factor_;
    bool factored_ = false;
};

struct MinimizerResult {
    Field Y;              // minimizer in the scale exp(-s shift)
    double residual = 0.0;
    double block_shift = 0.0;
};

/// Minimizer of the discrete functional for one boundary target, expressed
/// in the scale exp(-s shift) so that exp(s (phi - shift)) <= 1 on the
/// target's support.
MinimizerResult solve_min(const QuadraticSystem& sys, const FluxSeries& target, double shift,
                          const Field* nu = nullptr);

struct BlockReport {
    int block = 0;
    double shift = 0.0;
    double residual = 0.0;
    bool active = false;
};

struct ProgressiveResult {
    Eigen::VectorXd rate;  // d_t Z(0, x_j), j = 1..N
    std::vector<BlockReport> blocks;
    std::vector<Eigen::VectorXd> partial_rates;  // running sum after each block
};

/// Shift used for block j: the largest boundary weight exponent
/// phi(t^n, x_N) over the time nodes where eta_j(phi(t^n, L)) is nonzero.
/// Returns false when the block does not meet the time grid.
bool block_shift(const ConjugateOperator& op, const CutoffFamily& cut, int j, double& shift);

/// Solves one system per block and accumulates the physical initial rate
///   sum_j exp(s (shift_j - phi(0, x))) Y_j^1 / tau.
/// nu_blocks, when non-empty, supplies a penalty target per block.
ProgressiveResult progressive_minimize(const QuadraticSystem& sys, const BlockTargets& targets,
                                       const CutoffFamily& cut, const std::vector<Field>& nu_blocks = {},
                                       bool keep_partial = false);

/// Single unshifted solve for the full target; only usable while
/// exp(s phi) stays representable and well scaled.
Eigen::VectorXd direct_minimize(const QuadraticSystem& sys, const FluxSeries& target);

/// Physical initial rate exp(-s (phi(0, x) - shift)) Y^1 / tau.
Eigen::VectorXd initial_rate(const ConjugateOperator& op, const Field& Y, double shift);

/// Coordinate dump "row col value" (0-based) of the assembled matrix.
void write_matrix_coordinates(const QuadraticSystem& sys, const std::string& path);

} // namespace wavepot
