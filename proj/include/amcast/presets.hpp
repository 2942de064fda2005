#pragma once

#include "amcast/latency.hpp"
#include "amcast/overlay.hpp"

#include <string>
#include <vector>

namespace amcast::presets
{
    /// Twelve AWS regions, west to east.
    const std::vector<std::string> &aws_regions();

    /// Approximate one-way delays (half the public round-trip measurements)
    /// between the twelve regions. Client links default to 1 ms.
    LatencyMatrix aws12(double client_link_ms = 1.0);

    /// C-DAG ranking built greedily: start at `first`, then repeatedly append the
    /// unranked region nearest to the last one appended (ties by name order).
    overlay::OverlaySpec nearest_neighbour_chain(const LatencyMatrix &m, const std::string &first, std::string name);

    /// Named overlays: o1, o2 (C-DAGs) and t1, t2, t3 (trees) over aws_regions().
    /// All are transcriptions of drawings and therefore flagged approximate.
    overlay::OverlaySpec overlay_preset(const std::string &name);
    std::vector<std::string> overlay_preset_names();

    /// A preset name, or else a path to an overlay file.
    overlay::OverlaySpec resolve_overlay(const std::string &name_or_path);
} // namespace amcast::presets
