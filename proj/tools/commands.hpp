#pragma once

#include "config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rslimits::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Shortest round-trip decimal form, locale independent.
std::string format_double(double x);

/// Executes the configured command; returns the list of files written.
std::vector<std::string> run(const RunConfig &config, std::ostream &log);

/// Grids used by the figures command.
std::vector<double> figure1_lambdas(); ///< 0.05, 0.10, ..., 3.00
std::vector<double> figure2_ps();      ///< 0.01, 0.02, ..., 0.50
inline constexpr double kFigure2Lambda = 0.95;

} // namespace rslimits::cli
