#pragma once

#include "amcast/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace amcast::overlay
{
    /// Complete DAG over ranked groups: an edge i -> j exists iff i < j.
    /// Group ids are ranks; region names are labels only.
    class CDagOverlay
    {
    public:
        explicit CDagOverlay(std::size_t n);
        explicit CDagOverlay(std::vector<std::string> regions);

        std::size_t size() const noexcept { return n_; }
        const std::vector<std::string> &regions() const noexcept { return regions_; }

        GroupSet ancestors(GroupId g) const;
        GroupSet descendants(GroupId g) const;
        bool has_edge(GroupId from, GroupId to) const noexcept { return from < to && to < n_; }

    private:
        std::size_t n_;
        std::vector<std::string> regions_;
    };

    /// Minimum-rank member of dst. Throws std::invalid_argument on an empty set.
    GroupId dag_lca(GroupSet dst);

    /// Rooted tree overlay. Group ids index `regions()`.
    class TreeOverlay
    {
    public:
        /// parent[g] is nullopt for the root. Throws std::invalid_argument if the
        /// links do not form a single rooted tree.
        TreeOverlay(std::vector<std::optional<GroupId>> parent, std::vector<std::string> regions = {});

        std::size_t size() const noexcept { return parent_.size(); }
        GroupId root() const noexcept { return root_; }
        std::optional<GroupId> parent(GroupId g) const { return parent_.at(g); }
        const std::vector<GroupId> &children(GroupId g) const { return children_.at(g); }
        std::size_t depth(GroupId g) const { return depth_.at(g); }
        /// g together with everything below it.
        GroupSet subtree(GroupId g) const { return subtree_.at(g); }
        bool is_leaf(GroupId g) const { return children_.at(g).empty(); }
        const std::vector<std::string> &regions() const noexcept { return regions_; }

    private:
        std::vector<std::optional<GroupId>> parent_;
        std::vector<std::string> regions_;
        std::vector<std::vector<GroupId>> children_;
        std::vector<std::size_t> depth_;
        std::vector<GroupSet> subtree_;
        GroupId root_ = 0;
    };

    /// Deepest node that is an ancestor-or-self of every member of dst.
    GroupId tree_lca(const TreeOverlay &tree, GroupSet dst);

    /// Returns a description of the first violated invariant, or nullopt.
    std::optional<std::string> validate(std::size_t n_groups);
    std::optional<std::string> validate(const std::vector<std::optional<GroupId>> &parent);

    /// Either overlay kind, as loaded from a file or preset.
    struct OverlaySpec
    {
        std::string name;
        std::vector<std::string> regions; // group id -> region
        std::optional<std::vector<std::optional<GroupId>>> parent; // set for trees
        bool approximate = false;

        bool is_tree() const noexcept { return parent.has_value(); }
        CDagOverlay cdag() const;
        TreeOverlay tree() const;
    };

    /// Overlay file format:
    ///
    ///   [cdag]              [tree]
    ///   eu-central-1        eu-central-1
    ///   eu-west-2           us-east-1 eu-central-1
    ///   ...                 ...
    ///
    /// A cdag section lists regions from lowest to highest rank. A tree section
    /// lists `child parent` pairs; a line with a single name declares a parentless
    /// node. Blank lines and `#` comments are ignored.
    OverlaySpec parse_overlay(std::istream &in, std::string name = "custom");
    OverlaySpec load_overlay(const std::string &path);
    void write_overlay(std::ostream &out, const OverlaySpec &spec);
} // namespace amcast::overlay
