#pragma once

#include "amcast/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace amcast
{
    /// One-way latencies between regions plus the client-to-home link of each
    /// region. Stored in microseconds; files use milliseconds.
    class LatencyMatrix
    {
    public:
        LatencyMatrix() = default;
        /// `one_way_ms[i][j]` is the delay from region i to region j.
        LatencyMatrix(std::vector<std::string> regions, const std::vector<std::vector<double>> &one_way_ms,
                      double client_link_ms = 1.0);

        /// n regions named g0.., every off-diagonal link `ms`.
        static LatencyMatrix uniform(std::size_t n, double ms, double client_link_ms = 1.0);

        std::size_t size() const noexcept { return regions_.size(); }
        const std::vector<std::string> &regions() const noexcept { return regions_; }

        /// Throws std::out_of_range("no route ...") for an unknown pair.
        SimTime latency(GroupId from, GroupId to) const;
        SimTime client_link(GroupId region) const;
        const std::vector<SimTime> &row(GroupId from) const;

        void set_latency(GroupId from, GroupId to, double ms);
        void set_client_link(GroupId region, double ms);
        void set_client_links(double ms);

        /// Reorders/selects regions by name, e.g. to follow an overlay's ranking.
        LatencyMatrix select(const std::vector<std::string> &regions) const;

    private:
        std::vector<std::string> regions_;
        std::vector<std::vector<SimTime>> one_way_;
        std::vector<SimTime> client_link_;
    };

    /// CSV: a header of region names, then n rows of one-way milliseconds.
    LatencyMatrix parse_matrix(std::istream &in, double client_link_ms = 1.0);
    LatencyMatrix load_matrix(const std::string &path, double client_link_ms = 1.0);
    void write_matrix(std::ostream &out, const LatencyMatrix &m);
} // namespace amcast
