#pragma once

#include <string>

namespace wavepot {

/// Carleman weight phi(t, x) = |x - x0|^2 - beta t^2 on [0, L].
///
/// The observation point x0 lies outside the closed interval; the flux is
/// observed at x = L, which requires x0 < 0 for the multiplier condition.
/// Every exponential exposed here is shifted by a reference level so that
/// s * phi never has to be exponentiated on its own.
class CarlemanWeight {
public:
    CarlemanWeight(double L, double x0, double beta, double s);

    double L() const { return L_; }
    double x0() const { return x0_; }
    double beta() const { return beta_; }
    double s() const { return s_; }
    double d0sq() const { return d0sq_; }  // inf |x - x0|^2 over [0, L]
    double L0sq() const { return L0sq_; }  // sup |x - x0|^2 over [0, L]

    CarlemanWeight with_s(double s) const { return {L_, x0_, beta_, s}; }

    double phi(double t, double x) const
    {
        const double d = x - x0_;
        return d * d - beta_ * t * t;
    }

    /// exp(s (phi(t, x) - phi_ref)).
    double exp_shifted(double t, double x, double phi_ref) const;

    /// True iff beta t > |x - x0| (the strict inequality of the region).
    bool in_region_O(double t, double x) const;

private:
    double L_;
    double x0_;
    double beta_;
    double s_;
    double d0sq_;
    double L0sq_;
};

double phi(double t, double x, const CarlemanWeight& w);
bool in_region_O(double t, double x, const CarlemanWeight& w);

enum class Verdict { strict, marginal, fail };

std::string to_string(Verdict v);

struct GeometryReport {
    bool cond_gamma = false;  // x0 outside [0, L]
    Verdict cond_T = Verdict::fail;      // T vs sup |x - x0|
    Verdict cond_betaT = Verdict::fail;  // beta T vs sup |x - x0|
    double sup_dist = 0.0;

    bool hard_failure() const { return !cond_gamma; }
    bool has_warnings() const
    {
        return cond_T != Verdict::strict || cond_betaT != Verdict::strict;
    }
    std::string describe() const;
};

/// Classifies the observability conditions. Equality within a relative
/// 1e-12 is reported as marginal, never upgraded to strict.
GeometryReport check_geometry(double L, double T, double x0, double beta);
GeometryReport check_geometry(double L, double T, const CarlemanWeight& w);

} // namespace wavepot
