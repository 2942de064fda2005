#include "amcast/overlay.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace amcast::overlay
{
    namespace
    {
        std::vector<std::string> default_regions(std::size_t n)
        {
            std::vector<std::string> out;
            out.reserve(n);
            for (std::size_t i = 0; i < n; ++i)
            {
                out.push_back("g" + std::to_string(i));
            }
            return out;
        }

        void require_valid(const std::optional<std::string> &error)
        {
            if (error)
            {
                throw std::invalid_argument(*error);
            }
        }
    }

    CDagOverlay::CDagOverlay(std::size_t n) : CDagOverlay(default_regions(n)) {}

    CDagOverlay::CDagOverlay(std::vector<std::string> regions) : n_(regions.size()), regions_(std::move(regions))
    {
        require_valid(validate(n_));
    }

    GroupSet CDagOverlay::ancestors(GroupId g) const
    {
        if (g >= n_)
        {
            throw std::out_of_range("group " + std::to_string(g) + " outside overlay of " + std::to_string(n_));
        }
        return GroupSet::below(g);
    }

    GroupSet CDagOverlay::descendants(GroupId g) const
    {
        if (g >= n_)
        {
            throw std::out_of_range("group " + std::to_string(g) + " outside overlay of " + std::to_string(n_));
        }
        return GroupSet::above(g, n_);
    }

    GroupId dag_lca(GroupSet dst)
    {
        if (dst.empty())
        {
            throw std::invalid_argument("empty destination set");
        }
        return dst.min();
    }

    std::optional<std::string> validate(std::size_t n_groups)
    {
        if (n_groups == 0)
        {
            return "overlay needs at least one group";
        }
        if (n_groups > kMaxGroups)
        {
            return "overlay exceeds " + std::to_string(kMaxGroups) + " groups";
        }
        return std::nullopt;
    }

    std::optional<std::string> validate(const std::vector<std::optional<GroupId>> &parent)
    {
        if (auto e = validate(parent.size()))
        {
            return e;
        }
        std::size_t roots = 0;
        for (std::size_t g = 0; g < parent.size(); ++g)
        {
            if (!parent[g])
            {
                ++roots;
            }
            else if (*parent[g] >= parent.size())
            {
                return "group " + std::to_string(g) + " has unknown parent " + std::to_string(*parent[g]);
            }
            else if (*parent[g] == g)
            {
                return "cycle: group " + std::to_string(g) + " is its own parent";
            }
        }
        // Walk up from every node; a walk longer than n revisits a node.
        for (std::size_t g = 0; g < parent.size(); ++g)
        {
            std::size_t steps = 0;
            std::optional<GroupId> at = static_cast<GroupId>(g);
            while (at && parent[*at])
            {
                at = parent[*at];
                if (++steps > parent.size())
                {
                    return "cycle: parent links from group " + std::to_string(g) + " never reach a root";
                }
            }
        }
        if (roots == 0)
        {
            return "cycle: no parentless root";
        }
        if (roots > 1)
        {
            return "multiple roots: " + std::to_string(roots) + " parentless groups (unreachable from a single root)";
        }
        return std::nullopt;
    }

    TreeOverlay::TreeOverlay(std::vector<std::optional<GroupId>> parent, std::vector<std::string> regions)
        : parent_(std::move(parent)), regions_(std::move(regions))
    {
        require_valid(validate(parent_));
        const std::size_t n = parent_.size();
        if (regions_.empty())
        {
            regions_ = default_regions(n);
        }
        if (regions_.size() != n)
        {
            throw std::invalid_argument("tree region list does not match group count");
        }
        children_.assign(n, {});
        depth_.assign(n, 0);
        subtree_.assign(n, GroupSet{});
        for (GroupId g = 0; g < n; ++g)
        {
            if (parent_[g])
            {
                children_[*parent_[g]].push_back(g);
            }
            else
            {
                root_ = g;
            }
        }
        for (GroupId g = 0; g < n; ++g)
        {
            std::size_t d = 0;
            for (auto at = parent_[g]; at; at = parent_[*at])
            {
                ++d;
                subtree_[*at].insert(g);
            }
            depth_[g] = d;
            subtree_[g].insert(g);
        }
    }

    GroupId tree_lca(const TreeOverlay &tree, GroupSet dst)
    {
        if (dst.empty())
        {
            throw std::invalid_argument("empty destination set");
        }
        // Descend from the root while a single child covers every destination.
        GroupId at = tree.root();
        for (;;)
        {
            if (dst.contains(at))
            {
                return at;
            }
            std::optional<GroupId> next;
            for (GroupId c : tree.children(at))
            {
                if (dst.is_subset_of(tree.subtree(c)))
                {
                    next = c;
                    break;
                }
            }
            if (!next)
            {
                return at;
            }
            at = *next;
        }
    }

    CDagOverlay OverlaySpec::cdag() const
    {
        if (is_tree())
        {
            throw std::invalid_argument("overlay '" + name + "' is a tree, not a C-DAG");
        }
        return CDagOverlay(regions);
    }

    TreeOverlay OverlaySpec::tree() const
    {
        if (!is_tree())
        {
            throw std::invalid_argument("overlay '" + name + "' is a C-DAG, not a tree");
        }
        return TreeOverlay(*parent, regions);
    }

    OverlaySpec parse_overlay(std::istream &in, std::string name)
    {
        enum class Section
        {
            None,
            CDag,
            Tree
        };
        Section section = Section::None;
        OverlaySpec spec;
        spec.name = std::move(name);
        std::vector<std::pair<std::string, std::string>> pairs;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos)
            {
                line.erase(hash);
            }
            std::istringstream words(line);
            std::vector<std::string> tokens;
            for (std::string w; words >> w;)
            {
                tokens.push_back(w);
            }
            if (tokens.empty())
            {
                continue;
            }
            if (tokens.size() == 1 && tokens[0].front() == '[')
            {
                if (section != Section::None)
                {
                    throw std::invalid_argument("overlay line " + std::to_string(lineno) + ": only one section allowed");
                }
                if (tokens[0] == "[cdag]")
                {
                    section = Section::CDag;
                }
                else if (tokens[0] == "[tree]")
                {
                    section = Section::Tree;
                }
                else
                {
                    throw std::invalid_argument("overlay line " + std::to_string(lineno) + ": unknown section " + tokens[0]);
                }
                continue;
            }
            if (section == Section::None)
            {
                throw std::invalid_argument("overlay line " + std::to_string(lineno) + ": entry before [cdag] or [tree]");
            }
            if (section == Section::CDag)
            {
                if (tokens.size() != 1)
                {
                    throw std::invalid_argument("overlay line " + std::to_string(lineno) + ": expected one region name");
                }
                spec.regions.push_back(tokens[0]);
            }
            else
            {
                if (tokens.size() > 2)
                {
                    throw std::invalid_argument("overlay line " + std::to_string(lineno) + ": expected `child parent`");
                }
                pairs.emplace_back(tokens[0], tokens.size() == 2 ? tokens[1] : std::string{});
            }
        }
        if (section == Section::None)
        {
            throw std::invalid_argument("overlay has no [cdag] or [tree] section");
        }
        if (section == Section::Tree)
        {
            std::map<std::string, GroupId> index;
            auto intern = [&](const std::string &r) {
                auto [it, fresh] = index.emplace(r, static_cast<GroupId>(spec.regions.size()));
                if (fresh)
                {
                    spec.regions.push_back(r);
                }
                return it->second;
            };
            for (auto &[child, parent] : pairs)
            {
                intern(child);
            }
            for (auto &[child, parent] : pairs)
            {
                if (!parent.empty())
                {
                    intern(parent);
                }
            }
            std::vector<std::optional<GroupId>> links(spec.regions.size());
            for (auto &[child, parent] : pairs)
            {
                GroupId c = index.at(child);
                if (!parent.empty())
                {
                    if (links[c] && *links[c] != index.at(parent))
                    {
                        throw std::invalid_argument("overlay: region " + child + " has two parents");
                    }
                    links[c] = index.at(parent);
                }
            }
            spec.parent = std::move(links);
            require_valid(validate(*spec.parent));
        }
        else
        {
            std::map<std::string, int> seen;
            for (auto &r : spec.regions)
            {
                if (++seen[r] > 1)
                {
                    throw std::invalid_argument("overlay: region " + r + " listed twice");
                }
            }
            require_valid(validate(spec.regions.size()));
        }
        return spec;
    }

    OverlaySpec load_overlay(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw std::invalid_argument("cannot open overlay file '" + path + "'");
        }
        return parse_overlay(in, path);
    }

    void write_overlay(std::ostream &out, const OverlaySpec &spec)
    {
        if (!spec.is_tree())
        {
            out << "[cdag]\n";
            for (auto &r : spec.regions)
            {
                out << r << '\n';
            }
            return;
        }
        out << "[tree]\n";
        for (std::size_t g = 0; g < spec.regions.size(); ++g)
        {
            out << spec.regions[g];
            if (auto p = (*spec.parent)[g])
            {
                out << ' ' << spec.regions[*p];
            }
            out << '\n';
        }
    }
} // namespace amcast::overlay
