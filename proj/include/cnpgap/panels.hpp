#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cnpgap/harness.hpp"
#include "cnpgap/io/serialization.hpp"

namespace cnpgap {

/// Options shared by the figure presets.
struct PanelOptions {
    std::uint64_t seed = 0;
    std::size_t trials = 300;
    unsigned workers = 0;
    std::pair<std::size_t, std::size_t> n_range{2, 300};
    std::pair<std::size_t, std::size_t> fit_range = kDefaultFitRange;
    bool figures = false;
};

struct PanelFile {
    std::string name;  // relative file name
    std::string content;
};

struct PanelOutput {
    std::vector<PanelFile> files;  // CSVs first, then the summary, then figures
    io::Json summary;
};

/// Presets reproducing the experiment figures:
///   fig1a  random linear trials vs bound, plus the tight construction
///   fig1b  worst-case curves of the six Lipschitz catalog decoders
///   fig1c  ratio of the Lipschitz construction's gap to its bound
///   fig2a  sqrt decoder, worst case
///   fig2b  exp decoder, worst case
///   fig2c  sqrt decoder at the singularity (r_C = 0)
///   fig2d  steep sigmoid scan over k in {1, 4, 16, 64}
const std::vector<std::string>& panel_names();

/// Throws ConfigError for an unknown panel.
PanelOutput run_panel(std::string_view panel, const PanelOptions& opts);

/// Figure for a single sweep's CSV: log-log gap (max and mean per n) with the bound.
std::string gap_figure(const std::string& csv, const std::string& title);

/// Ratio-to-bound figure for a single sweep's CSV; empty when no finite positive bounds.
std::string ratio_figure(const std::string& csv, const std::string& title);

}  // namespace cnpgap
