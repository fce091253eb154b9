#pragma once

#include <string>
#include <vector>

#include "fpk/diagnostics.hpp"

namespace fpk {

/// Writes the diagnostics time series.  Column order is part of the output
/// contract and values use %.17g, so identical runs produce identical bytes.
void write_series_csv(const RunHistory& h, const std::string& path);

/// One row per report: name,status,measured,threshold,t_worst.
void write_reports_csv(const std::vector<PropertyReport>& reports, const std::string& path);

/// Two-column `t value` data files under `dir`, one per monitored column.
void write_plot_data(const RunHistory& h, const std::string& dir);

/// Self-contained line charts for a few headline columns under `dir`.
void write_plot_svgs(const RunHistory& h, const std::string& dir);

}  // namespace fpk
