#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "wavepot/grid.hpp"
#include "wavepot/measurement.hpp"
#include "wavepot/wave.hpp"

namespace wavepot {

/// Writes a CSV with a header row; every value is printed with 17
/// significant digits. All columns must have the same length.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Eigen::VectorXd>& columns);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<Eigen::VectorXd> columns;

    /// Column by header name; throws ConfigError when absent.
    const Eigen::VectorXd& column(const std::string& name) const;
    int rows() const { return columns.empty() ? 0 : static_cast<int>(columns.front().size()); }
};

/// Reads a numeric CSV with a header row.
CsvTable read_csv(const std::string& path);

/// Columns (t, flux).
void write_flux_csv(const std::string& path, const FluxSeries& series);

/// Reads columns (t, flux); the time column must start at 0 and be uniform
/// to a relative 1e-9 of the step.
FluxSeries read_flux_csv(const std::string& path);

/// Columns (x, q) over the interior nodes.
void write_potential_csv(const std::string& path, const SpaceTimeGrid& g, const Eigen::VectorXd& q);

/// Long format (t, x, w), time-major.
void write_trajectory_csv(const std::string& path, const Trajectory& tr);

void write_text(const std::string& path, const std::string& text);

} // namespace wavepot
