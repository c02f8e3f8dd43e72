#pragma once

// Deterministic SVG rendering of harness outputs. Output bytes depend only
// on the input table.

#include <string>

#include "coinflip/io.hpp"

namespace coinflip {

enum class PlotKind {
    SampleSweep,  // KL and energy vs sample size
    Histogram,    // empirical frequencies vs target
    WeightSweep,  // best KL and energy vs each omega
};

/// Infers the plot kind from the CSV header. Throws DataError if unknown.
PlotKind detect_plot_kind(const CsvTable& table);

/// Renders the table. Throws DataError on empty or malformed data.
std::string render_svg(const CsvTable& table, PlotKind kind);

std::string render_sample_sweep_svg(const CsvTable& table);
std::string render_histogram_svg(const CsvTable& table);
std::string render_weight_sweep_svg(const CsvTable& table);

}  // namespace coinflip
