#include "amcast/presets.hpp"

#include <algorithm>
#include <array>
#include <map>

namespace amcast::presets
{
    namespace
    {
        // Round-trip milliseconds, upper triangle in aws_regions() order.
        constexpr std::array<std::array<double, 12>, 12> kRtt{{
            {0, 22, 50, 60, 67, 120, 130, 140, 215, 165, 97, 140},
            {0, 0, 50, 75, 62, 135, 140, 147, 225, 170, 107, 138},
            {0, 0, 0, 25, 12, 85, 85, 95, 200, 210, 140, 190},
            {0, 0, 0, 0, 15, 70, 80, 90, 195, 215, 145, 200},
            {0, 0, 0, 0, 0, 68, 76, 90, 185, 215, 150, 198},
            {0, 0, 0, 0, 0, 0, 12, 25, 120, 175, 205, 255},
            {0, 0, 0, 0, 0, 0, 0, 15, 112, 165, 210, 265},
            {0, 0, 0, 0, 0, 0, 0, 0, 110, 160, 225, 250},
            {0, 0, 0, 0, 0, 0, 0, 0, 0, 58, 125, 145},
            {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 70, 92},
            {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 105},
            {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
        }};

        overlay::OverlaySpec tree_preset(std::string name, const std::vector<std::pair<int, int>> &child_parent)
        {
            // Region numbers are 1-based positions in aws_regions().
            const auto &regions = aws_regions();
            overlay::OverlaySpec spec;
            spec.name = std::move(name);
            spec.regions = regions;
            spec.approximate = true;
            std::vector<std::optional<GroupId>> parent(regions.size());
            for (auto [child, par] : child_parent)
            {
                parent[child - 1] = static_cast<GroupId>(par - 1);
            }
            spec.parent = std::move(parent);
            if (auto e = overlay::validate(*spec.parent))
            {
                throw std::logic_error("preset " + spec.name + ": " + *e);
            }
            return spec;
        }
    }

    const std::vector<std::string> &aws_regions()
    {
        static const std::vector<std::string> regions{
            "us-west-2",    "us-west-1",  "us-east-2",  "ca-central-1",   "us-east-1",      "eu-west-1",
            "eu-west-2",    "eu-central-1", "ap-south-1", "ap-southeast-1", "ap-northeast-1", "ap-southeast-2",
        };
        return regions;
    }

    LatencyMatrix aws12(double client_link_ms)
    {
        std::vector<std::vector<double>> one_way(12, std::vector<double>(12, 0.0));
        for (std::size_t i = 0; i < 12; ++i)
        {
            for (std::size_t j = i + 1; j < 12; ++j)
            {
                one_way[i][j] = one_way[j][i] = kRtt[i][j] / 2.0;
            }
        }
        return LatencyMatrix(aws_regions(), one_way, client_link_ms);
    }

    overlay::OverlaySpec nearest_neighbour_chain(const LatencyMatrix &m, const std::string &first, std::string name)
    {
        const auto &regions = m.regions();
        auto start = std::find(regions.begin(), regions.end(), first);
        if (start == regions.end())
        {
            throw std::invalid_argument("region '" + first + "' is not in the latency matrix");
        }
        std::vector<bool> used(regions.size(), false);
        std::vector<GroupId> order{static_cast<GroupId>(start - regions.begin())};
        used[order.back()] = true;
        while (order.size() < regions.size())
        {
            std::optional<GroupId> best;
            for (GroupId j = 0; j < regions.size(); ++j)
            {
                if (used[j])
                {
                    continue;
                }
                if (!best || m.latency(order.back(), j) < m.latency(order.back(), *best) ||
                    (m.latency(order.back(), j) == m.latency(order.back(), *best) && regions[j] < regions[*best]))
                {
                    best = j;
                }
            }
            used[*best] = true;
            order.push_back(*best);
        }
        overlay::OverlaySpec spec;
        spec.name = std::move(name);
        for (GroupId g : order)
        {
            spec.regions.push_back(regions[g]);
        }
        return spec;
    }

    overlay::OverlaySpec overlay_preset(const std::string &name)
    {
        std::string key = name;
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
        if (key == "o1" || key == "o2")
        {
            auto spec = nearest_neighbour_chain(aws12(), key == "o1" ? "eu-central-1" : "us-west-2", key);
            spec.approximate = true;
            return spec;
        }
        if (key == "t1")
        {
            return tree_preset(key, {{5, 8}, {9, 8}, {6, 8}, {7, 8}, {3, 5}, {4, 5}, {2, 5}, {1, 2}, {10, 9}, {11, 10}, {12, 10}});
        }
        if (key == "t2")
        {
            return tree_preset(key, {{5, 6}, {7, 6}, {1, 5}, {2, 5}, {3, 5}, {4, 5}, {8, 7}, {9, 7}, {10, 9}, {11, 9}, {12, 9}});
        }
        if (key == "t3")
        {
            std::vector<std::pair<int, int>> star;
            for (int r = 1; r <= 12; ++r)
            {
                if (r != 6)
                {
                    star.emplace_back(r, 6);
                }
            }
            return tree_preset(key, star);
        }
        throw std::invalid_argument("unknown overlay preset '" + name + "'");
    }

    std::vector<std::string> overlay_preset_names()
    {
        return {"o1", "o2", "t1", "t2", "t3"};
    }

    overlay::OverlaySpec resolve_overlay(const std::string &name_or_path)
    {
        auto names = overlay_preset_names();
        std::string key = name_or_path;
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
        if (std::find(names.begin(), names.end(), key) != names.end())
        {
            return overlay_preset(key);
        }
        return overlay::load_overlay(name_or_path);
    }
} // namespace amcast::presets
