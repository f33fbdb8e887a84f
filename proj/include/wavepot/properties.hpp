#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavepot/config.hpp"
#include "wavepot/conjugate.hpp"
#include "wavepot/cutoff.hpp"

namespace wavepot {

// Numerical property checks shared by `wavepot verify` and the acceptance
// suite. Each returns the measured quantity; callers compare it with their
// own tolerance.

/// max |sum_{j>=1} eta_j(tau) - (eta(tau) - eta_0(tau))| over uniform random
/// tau in [min phi - eps0, max phi + eps0] of the weight on [0, T] x [0, L].
double partition_of_unity_error(const CarlemanWeight& w, const CutoffFamily& cut, double T, int samples,
                                std::uint64_t seed);

/// max relative error between apply_L(exp(s (phi - ref)) z) and
/// exp(s (phi - ref)) (Delta_tau - Delta_h + q) z over random fields z,
/// with ref = max phi on the grid.
double conjugation_identity_error(const ConjugateOperator& op, int trials, std::uint64_t seed);

/// Smallest eigenvalue of the dense copy of the assembled matrix.
double smallest_eigenvalue(const QuadraticSystem& sys);

/// The discrete functional evaluated term by term from the unconjugated
/// wave operator, with the region-O coefficient fixed at `oterm_coeff`.
double functional_value(const ConjugateOperator& op, const Eigen::MatrixXd& y, bool penalty, double oterm_coeff);

/// max over random trial fields of |A(y, y) - J(y)| / J(y), J from
/// functional_value with the nominal coefficient 2.
double form_consistency_error(const QuadraticSystem& sys, int trials, std::uint64_t seed);

/// ||rate_progressive - rate_direct|| / ||rate_direct|| for a random smooth
/// boundary target; block j of the progressive process receives
/// eta_j(phi(t, L)) mu(t).
double progressive_direct_discrepancy(const QuadraticSystem& sys, const CutoffFamily& cut, std::uint64_t seed);

struct OrderStudy {
    std::vector<int> N;
    std::vector<double> error;  // max nodal error at the final time
    std::vector<double> rate;   // log2 of successive error ratios
};

/// Manufactured solution w = cos(t) sin(pi x) + x with q = 1 + x on
/// (0, 1) x (0, 1); levels N + 1 = n0, 2 n0, 4 n0, ...
OrderStudy scheme_order_study(double theta, double cfl, int n0, int levels);

/// Sup norm of the first update q^1 - q^0 in an inverse-crime run started at
/// the true potential: data and iterates share the grid and scheme.
double fixed_point_update(const RunConfig& cfg);

struct VerifyCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    std::vector<std::string> warnings;
    double oterm_coeff = 2.0;

    bool passed() const;
};

/// Runs the property suite on small grids derived from cfg. The region-O
/// coefficient of the assembled systems is cfg.oterm_coeff; only the form
/// consistency check compares it with the nominal value. Admissibility and
/// geometry warnings refer to cfg's own inverse grid.
VerifyReport run_verify_suite(const RunConfig& cfg);

} // namespace wavepot
