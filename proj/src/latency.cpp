#include "amcast/latency.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace amcast
{
    namespace
    {
        SimTime checked_ms(double ms)
        {
            if (!std::isfinite(ms) || ms < 0)
            {
                throw std::invalid_argument("latency must be finite and non-negative, got " + std::to_string(ms));
            }
            return from_ms(ms);
        }

        std::vector<std::string> split_csv(const std::string &line)
        {
            std::vector<std::string> out;
            std::stringstream in(line);
            for (std::string cell; std::getline(in, cell, ',');)
            {
                auto b = cell.find_first_not_of(" \t\r");
                auto e = cell.find_last_not_of(" \t\r");
                out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
            }
            return out;
        }
    }

    LatencyMatrix::LatencyMatrix(std::vector<std::string> regions, const std::vector<std::vector<double>> &one_way_ms,
                                 double client_link_ms)
        : regions_(std::move(regions))
    {
        const std::size_t n = regions_.size();
        if (n == 0 || one_way_ms.size() != n)
        {
            throw std::invalid_argument("latency matrix must be n x n with n = region count");
        }
        one_way_.assign(n, std::vector<SimTime>(n, 0));
        for (std::size_t i = 0; i < n; ++i)
        {
            if (one_way_ms[i].size() != n)
            {
                throw std::invalid_argument("latency matrix row " + std::to_string(i) + " has " +
                                            std::to_string(one_way_ms[i].size()) + " entries, expected " +
                                            std::to_string(n));
            }
            for (std::size_t j = 0; j < n; ++j)
            {
                one_way_[i][j] = checked_ms(one_way_ms[i][j]);
            }
        }
        client_link_.assign(n, checked_ms(client_link_ms));
    }

    LatencyMatrix LatencyMatrix::uniform(std::size_t n, double ms, double client_link_ms)
    {
        std::vector<std::string> names;
        std::vector<std::vector<double>> rows(n, std::vector<double>(n, ms));
        for (std::size_t i = 0; i < n; ++i)
        {
            names.push_back("g" + std::to_string(i));
            rows[i][i] = 0;
        }
        return LatencyMatrix(std::move(names), rows, client_link_ms);
    }

    SimTime LatencyMatrix::latency(GroupId from, GroupId to) const
    {
        if (from >= size() || to >= size())
        {
            throw std::out_of_range("no route from " + std::to_string(from) + " to " + std::to_string(to));
        }
        return one_way_[from][to];
    }

    SimTime LatencyMatrix::client_link(GroupId region) const
    {
        if (region >= size())
        {
            throw std::out_of_range("no route from clients to " + std::to_string(region));
        }
        return client_link_[region];
    }

    const std::vector<SimTime> &LatencyMatrix::row(GroupId from) const
    {
        if (from >= size())
        {
            throw std::out_of_range("no route from " + std::to_string(from));
        }
        return one_way_[from];
    }

    void LatencyMatrix::set_latency(GroupId from, GroupId to, double ms)
    {
        if (from >= size() || to >= size())
        {
            throw std::out_of_range("no route from " + std::to_string(from) + " to " + std::to_string(to));
        }
        one_way_[from][to] = checked_ms(ms);
    }

    void LatencyMatrix::set_client_link(GroupId region, double ms)
    {
        client_link_.at(region) = checked_ms(ms);
    }

    void LatencyMatrix::set_client_links(double ms)
    {
        client_link_.assign(size(), checked_ms(ms));
    }

    LatencyMatrix LatencyMatrix::select(const std::vector<std::string> &regions) const
    {
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < regions_.size(); ++i)
        {
            index.emplace(regions_[i], i);
        }
        std::vector<std::size_t> pick;
        for (const auto &r : regions)
        {
            auto it = index.find(r);
            if (it == index.end())
            {
                throw std::invalid_argument("region '" + r + "' is not in the latency matrix");
            }
            pick.push_back(it->second);
        }
        LatencyMatrix out;
        out.regions_ = regions;
        out.one_way_.assign(pick.size(), std::vector<SimTime>(pick.size(), 0));
        for (std::size_t i = 0; i < pick.size(); ++i)
        {
            for (std::size_t j = 0; j < pick.size(); ++j)
            {
                out.one_way_[i][j] = one_way_[pick[i]][pick[j]];
            }
            out.client_link_.push_back(client_link_[pick[i]]);
        }
        return out;
    }

    LatencyMatrix parse_matrix(std::istream &in, double client_link_ms)
    {
        std::vector<std::string> lines;
        for (std::string line; std::getline(in, line);)
        {
            if (line.find_first_not_of(" \t\r") == std::string::npos || line.front() == '#')
            {
                continue;
            }
            lines.push_back(line);
        }
        if (lines.empty())
        {
            throw std::invalid_argument("latency matrix file is empty");
        }
        auto regions = split_csv(lines[0]);
        if (lines.size() != regions.size() + 1)
        {
            throw std::invalid_argument("latency matrix has " + std::to_string(regions.size()) + " regions but " +
                                        std::to_string(lines.size() - 1) + " rows");
        }
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 1; i < lines.size(); ++i)
        {
            std::vector<double> row;
            for (const auto &cell : split_csv(lines[i]))
            {
                std::size_t used = 0;
                double v = 0;
                try
                {
                    v = std::stod(cell, &used);
                }
                catch (const std::exception &)
                {
                    used = 0;
                }
                if (used == 0 || used != cell.size())
                {
                    throw std::invalid_argument("latency matrix row " + std::to_string(i) + ": bad value '" + cell + "'");
                }
                row.push_back(v);
            }
            rows.push_back(std::move(row));
        }
        return LatencyMatrix(std::move(regions), rows, client_link_ms);
    }

    LatencyMatrix load_matrix(const std::string &path, double client_link_ms)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw std::invalid_argument("cannot open latency matrix '" + path + "'");
        }
        return parse_matrix(in, client_link_ms);
    }

    void write_matrix(std::ostream &out, const LatencyMatrix &m)
    {
        for (std::size_t i = 0; i < m.size(); ++i)
        {
            out << (i ? "," : "") << m.regions()[i];
        }
        out << '\n';
        for (GroupId i = 0; i < m.size(); ++i)
        {
            for (GroupId j = 0; j < m.size(); ++j)
            {
                out << (j ? "," : "") << to_ms(m.latency(i, j));
            }
            out << '\n';
        }
    }
} // namespace amcast
