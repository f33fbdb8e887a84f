#include "wavepot/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "wavepot/error.hpp"
#include "wavepot/io.hpp"
#include "wavepot/measurement.hpp"

namespace wavepot {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || !std::isfinite(d))
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    return d;
}

long long to_integer(const std::string& key, const std::string& v)
{
    long long out = 0;
    const auto* first = v.data();
    const auto* last = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (v.empty() || ec != std::errc() || ptr != last)
        throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "on" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "off" || v == "no")
        return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::string format_double(double d)
{
    // Shortest text that reads back to the same double.
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, res.ptr);
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class M>
Field field(const std::string& key, M RunConfig::*member)
{
    Field f;
    f.set = [key, member](RunConfig& c, const std::string& v) {
        if constexpr (std::is_same_v<M, double>)
            c.*member = to_double(key, v);
        else if constexpr (std::is_same_v<M, bool>)
            c.*member = to_bool(key, v);
        else if constexpr (std::is_same_v<M, std::string>)
            c.*member = v;
        else
            c.*member = static_cast<M>(to_integer(key, v));
    };
    f.get = [member](const RunConfig& c) {
        if constexpr (std::is_same_v<M, double>)
            return format_double(c.*member);
        else if constexpr (std::is_same_v<M, bool>)
            return std::string(c.*member ? "true" : "false");
        else if constexpr (std::is_same_v<M, std::string>)
            return c.*member;
        else
            return std::to_string(c.*member);
    };
    return f;
}

const std::vector<std::pair<std::string, Field>>& table()
{
    static const std::vector<std::pair<std::string, Field>> t = {
        {"L", field("L", &RunConfig::L)},
        {"T", field("T", &RunConfig::T)},
        {"x0", field("x0", &RunConfig::x0)},
        {"beta", field("beta", &RunConfig::beta)},
        {"s", field("s", &RunConfig::s)},
        {"m", field("m", &RunConfig::m)},
        {"f", field("f", &RunConfig::f)},
        {"f_partial", field("f_partial", &RunConfig::f_partial)},
        {"w0", field("w0", &RunConfig::w0)},
        {"w1", field("w1", &RunConfig::w1)},
        {"Q", field("Q", &RunConfig::Q)},
        {"q0", field("q0", &RunConfig::q0)},
        {"direct_tau", field("direct_tau", &RunConfig::direct_tau)},
        {"direct_h", field("direct_h", &RunConfig::direct_h)},
        {"direct_theta", field("direct_theta", &RunConfig::direct_theta)},
        {"tau", field("tau", &RunConfig::tau)},
        {"cfl", field("cfl", &RunConfig::cfl)},
        {"theta", field("theta", &RunConfig::theta)},
        {"noise", field("noise", &RunConfig::noise)},
        {"seed", field("seed", &RunConfig::seed)},
        {"reg_passes", field("reg_passes", &RunConfig::reg_passes)},
        {"variant", field("variant", &RunConfig::variant)},
        {"penalty", field("penalty", &RunConfig::penalty)},
        {"ncut", field("ncut", &RunConfig::ncut)},
        {"alpha_floor", field("alpha_floor", &RunConfig::alpha_floor)},
        {"eps_stop", field("eps_stop", &RunConfig::eps_stop)},
        {"max_iter", field("max_iter", &RunConfig::max_iter)},
        {"oterm_coeff", field("oterm_coeff", &RunConfig::oterm_coeff)},
        {"sh_bound", field("sh_bound", &RunConfig::sh_bound)},
        {"interpolate_dead_zone", field("interpolate_dead_zone", &RunConfig::interpolate_dead_zone)},
        {"out", field("out", &RunConfig::out)},
    };
    return t;
}

const Field& lookup(const std::string& key)
{
    for (const auto& [name, f] : table())
        if (name == key)
            return f;
    throw ConfigError("unknown configuration key '" + key + "'");
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value)
{
    lookup(key).set(*this, trim(value));
}

std::string RunConfig::get(const std::string& key) const
{
    return lookup(key).get(*this);
}

const std::vector<std::string>& RunConfig::keys()
{
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const auto& [name, f] : table())
            out.push_back(name);
        return out;
    }();
    return k;
}

void RunConfig::load_text(const std::string& text, const std::string& origin)
{
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        try {
            set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void RunConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read configuration file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    load_text(buf.str(), path);
}

std::string RunConfig::dump() const
{
    std::string out;
    for (const auto& key : keys())
        out += key + " = " + get(key) + "\n";
    return out;
}

int RunConfig::effective_reg_passes() const
{
    return reg_passes >= 0 ? reg_passes : default_regularization_passes(noise);
}

SpaceTimeGrid RunConfig::direct_grid() const
{
    return SpaceTimeGrid::from_steps(L, T, direct_h, direct_tau);
}

SpaceTimeGrid RunConfig::inverse_grid() const
{
    return SpaceTimeGrid::from_cfl(L, T, tau, cfl);
}

InversionConfig RunConfig::inversion() const
{
    InversionConfig c;
    c.grid = inverse_grid();
    c.weight = CarlemanWeight(L, x0, beta, s);
    c.m = m;
    c.alpha_floor = alpha_floor;
    c.eps_stop = eps_stop;
    c.max_iter = max_iter;
    c.variant = parse_variant(variant);
    c.theta = theta;
    c.penalty = penalty;
    c.oterm_coeff = oterm_coeff;
    c.sh_bound = sh_bound;
    if (ncut > 0)
        c.ncut = ncut;
    c.smoothing_passes = effective_reg_passes();
    c.interpolate_dead_zone = interpolate_dead_zone;
    return c;
}

PotentialField RunConfig::sample(const std::string& expression, const SpaceTimeGrid& g) const
{
    const std::string prefix = "file:";
    if (expression.rfind(prefix, 0) == 0) {
        // Nodal values (x, q), linearly interpolated, constant beyond the ends.
        const auto table = read_csv(trim(expression.substr(prefix.size())));
        const Eigen::VectorXd xs = table.column("x");
        const Eigen::VectorXd qs = table.column("q");
        if (xs.size() == 0)
            throw ConfigError("potential file has no rows");
        for (Eigen::Index i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1]))
                throw ConfigError("potential file: x must be strictly increasing");
        return sample_potential(g, [xs, qs](double x) {
            if (x <= xs[0])
                return qs[0];
            const Eigen::Index last = xs.size() - 1;
            if (x >= xs[last])
                return qs[last];
            const auto i = std::upper_bound(xs.data(), xs.data() + xs.size(), x) - xs.data() - 1;
            const double f = (x - xs[i]) / (xs[i + 1] - xs[i]);
            return qs[i] + f * (qs[i + 1] - qs[i]);
        });
    }
    const auto e = Expression::parse(expression);
    return sample_potential(g, [&e](double x) { return e(x); });
}

WaveProblem RunConfig::problem(const SpaceTimeGrid& g, const PotentialField& q) const
{
    const auto source = Expression::parse(f);
    const auto boundary = Expression::parse(f_partial);
    const auto init = Expression::parse(w0);
    const auto rate = Expression::parse(w1);

    WaveProblem p;
    p.q = q;
    if (f != "0")
        p.source = [source](double t, double x) { return source(x, t); };
    const double len = g.L;
    p.boundary_left = [boundary](double t) { return boundary(0.0, t); };
    p.boundary_right = [boundary, len](double t) { return boundary(len, t); };
    p.w0.resize(g.N + 2);
    p.w1.resize(g.N + 2);
    for (int j = 0; j <= g.N + 1; ++j) {
        p.w0[j] = init(g.x(j));
        p.w1[j] = rate(g.x(j));
    }
    // Corner nodes carry the boundary data so that rounding in w0 (e.g.
    // sin(pi) != 0) never trips the compatibility check.
    p.w0[0] = p.boundary_left(0.0);
    p.w0[g.N + 1] = p.boundary_right(0.0);
    if (std::abs(init(0.0) - p.w0[0]) > 1e-8 || std::abs(init(len) - p.w0[g.N + 1]) > 1e-8)
        throw ConfigError("w0 is incompatible with the boundary data at a corner");
    return p;
}

} // namespace wavepot
