#include "wavepot/weight.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wavepot/error.hpp"

namespace wavepot {

namespace {

constexpr double kMarginalTolerance = 1e-12;

Verdict classify(double lhs, double rhs)
{
    const double rel = (lhs - rhs) / std::max(std::abs(rhs), 1e-300);
    if (std::abs(rel) <= kMarginalTolerance)
        return Verdict::marginal;
    return rel > 0.0 ? Verdict::strict : Verdict::fail;
}

} // namespace

CarlemanWeight::CarlemanWeight(double L, double x0, double beta, double s)
    : L_(L), x0_(x0), beta_(beta), s_(s)
{
    if (!(L > 0.0))
        throw GeometryError("weight: domain length must be positive");
    if (x0 >= 0.0 && x0 <= L)
        throw GeometryError("weight: observation point x0 must lie outside [0, L]");
    if (!(beta > 0.0 && beta < 1.0))
        throw GeometryError("weight: beta must lie in (0, 1)");
    if (!(s >= 0.0))
        throw GeometryError("weight: Carleman parameter s must be non-negative");
    if (x0 < 0.0) {
        d0sq_ = x0 * x0;
        L0sq_ = (L - x0) * (L - x0);
    } else {
        d0sq_ = (x0 - L) * (x0 - L);
        L0sq_ = x0 * x0;
    }
}

double CarlemanWeight::exp_shifted(double t, double x, double phi_ref) const
{
    return std::exp(s_ * (phi(t, x) - phi_ref));
}

bool CarlemanWeight::in_region_O(double t, double x) const
{
    return beta_ * t > std::abs(x - x0_);
}

double phi(double t, double x, const CarlemanWeight& w) { return w.phi(t, x); }

bool in_region_O(double t, double x, const CarlemanWeight& w) { return w.in_region_O(t, x); }

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::strict: return "strict";
    case Verdict::marginal: return "marginal";
    case Verdict::fail: return "fail";
    }
    return "unknown";
}

std::string GeometryReport::describe() const
{
    std::ostringstream os;
    os << "x0 outside domain: " << (cond_gamma ? "pass" : "fail")
       << "; T > sup|x-x0|: " << to_string(cond_T)
       << "; beta*T > sup|x-x0|: " << to_string(cond_betaT)
       << " (sup|x-x0| = " << sup_dist << ")";
    return os.str();
}

GeometryReport check_geometry(double L, double T, double x0, double beta)
{
    if (!(L > 0.0) || !(T > 0.0))
        throw GeometryError("check_geometry: L and T must be positive");
    GeometryReport r;
    r.cond_gamma = x0 < 0.0 || x0 > L;
    r.sup_dist = std::max(std::abs(x0), std::abs(L - x0));
    r.cond_T = classify(T, r.sup_dist);
    r.cond_betaT = classify(beta * T, r.sup_dist);
    return r;
}

GeometryReport check_geometry(double L, double T, const CarlemanWeight& w)
{
    return check_geometry(L, T, w.x0(), w.beta());
}

} // namespace wavepot
