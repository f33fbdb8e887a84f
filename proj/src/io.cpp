#include "wavepot/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "wavepot/error.hpp"

namespace wavepot {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

std::unique_ptr<std::FILE, FileCloser> open_for_write(const std::string& path)
{
    std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "w"));
    if (!f)
        throw Error("cannot write " + path);
    return f;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    for (auto& c : out) {
        const auto b = c.find_first_not_of(" \t\r");
        const auto e = c.find_last_not_of(" \t\r");
        c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
    }
    return out;
}

} // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Eigen::VectorXd>& columns)
{
    if (header.size() != columns.size())
        throw ShapeError("write_csv: header and column counts differ");
    const Eigen::Index rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows)
            throw ShapeError("write_csv: columns of unequal length");

    auto f = open_for_write(path);
    for (std::size_t c = 0; c < header.size(); ++c)
        std::fprintf(f.get(), c ? ",%s" : "%s", header[c].c_str());
    std::fputc('\n', f.get());
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c)
            std::fprintf(f.get(), c ? ",%.17g" : "%.17g", columns[c][r]);
        std::fputc('\n', f.get());
    }
    if (std::ferror(f.get()))
        throw Error("write error on " + path);
}

const Eigen::VectorXd& CsvTable::column(const std::string& name) const
{
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == name)
            return columns[c];
    throw ConfigError("CSV has no column '" + name + "'");
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError(path + ": empty file");
    table.header = split(line);

    std::vector<std::vector<double>> cols(table.header.size());
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const auto cells = split(line);
        if (cells.size() != cols.size())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(cols.size()) + " fields");
        for (std::size_t c = 0; c < cells.size(); ++c) {
            char* end = nullptr;
            const double v = std::strtod(cells[c].c_str(), &end);
            if (cells[c].empty() || *end != '\0')
                throw ConfigError(path + ":" + std::to_string(lineno) + ": not a number: '" + cells[c] + "'");
            cols[c].push_back(v);
        }
    }
    for (const auto& c : cols)
        table.columns.push_back(Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())));
    return table;
}

void write_flux_csv(const std::string& path, const FluxSeries& series)
{
    Eigen::VectorXd t(series.size());
    for (int n = 0; n < series.size(); ++n)
        t[n] = series.t(n);
    write_csv(path, {"t", "flux"}, {t, series.values});
}

FluxSeries read_flux_csv(const std::string& path)
{
    const auto table = read_csv(path);
    const auto& t = table.column("t");
    const auto& v = table.column("flux");
    if (t.size() < 2)
        throw ConfigError(path + ": need at least two samples");
    const double tau = (t[t.size() - 1] - t[0]) / static_cast<double>(t.size() - 1);
    if (!(tau > 0) || std::abs(t[0]) > 1e-9 * tau)
        throw ConfigError(path + ": time column must start at 0 and increase");
    for (Eigen::Index n = 0; n < t.size(); ++n)
        if (std::abs(t[n] - static_cast<double>(n) * tau) > 1e-9 * tau * std::max<double>(1.0, static_cast<double>(n)))
            throw ConfigError(path + ": time column is not uniform at row " + std::to_string(n + 1));
    FluxSeries out;
    out.tau = tau;
    out.values = v;
    return out;
}

void write_potential_csv(const std::string& path, const SpaceTimeGrid& g, const Eigen::VectorXd& q)
{
    if (q.size() != g.N)
        throw ShapeError("write_potential_csv: expected N interior values");
    Eigen::VectorXd x(g.N);
    for (int j = 1; j <= g.N; ++j)
        x[j - 1] = g.x(j);
    write_csv(path, {"x", "q"}, {x, q});
}

void write_trajectory_csv(const std::string& path, const Trajectory& tr)
{
    const auto& g = tr.grid;
    const Eigen::Index rows = tr.values.rows() * tr.values.cols();
    Eigen::VectorXd t(rows), x(rows), w(rows);
    Eigen::Index r = 0;
    for (Eigen::Index n = 0; n < tr.values.rows(); ++n)
        for (Eigen::Index j = 0; j < tr.values.cols(); ++j, ++r) {
            t[r] = g.t(static_cast<int>(n));
            x[r] = g.x(static_cast<int>(j));
            w[r] = tr.values(n, j);
        }
    write_csv(path, {"t", "x", "w"}, {t, x, w});
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out || !(out << text))
        throw Error("cannot write " + path);
}

} // namespace wavepot
