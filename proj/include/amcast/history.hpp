#pragma once

#include "amcast/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace amcast::history
{
    struct Edge
    {
        MessageId from;
        MessageId to;

        friend auto operator<=>(const Edge &, const Edge &) = default;
    };

    /// What travels on the wire: the part of a history the receiver has not
    /// been sent before. Edges may reference vertices shipped in earlier deltas.
    struct HistoryDelta
    {
        std::vector<MessageRecord> vertices;
        std::vector<Edge> edges;

        bool empty() const noexcept { return vertices.empty() && edges.empty(); }
        /// Wire size model: 24-byte header plus 16 bytes per vertex and per edge.
        std::size_t serialized_size() const noexcept { return 24 + 16 * vertices.size() + 16 * edges.size(); }
    };

    struct MergeResult
    {
        std::vector<MessageRecord> added; // vertices that were not known before
        std::size_t dangling_edges = 0;   // edges skipped because an endpoint was pruned here
        /// Sources of skipped edges whose target was pruned: they precede a
        /// pruned message, so they are as old as it is.
        std::vector<MessageId> stale;
    };

    /// A group's knowledge of the delivery order: a DAG over multicast records
    /// plus a pointer to the last message this group delivered.
    ///
    /// Every vertex and edge carries an insertion stamp, so "everything learned
    /// since the last send to d" is a range query on the stamp log.
    class History
    {
    public:
        History() = default;
        History(const History &other);
        History &operator=(const History &other);
        History(History &&) noexcept = default;
        History &operator=(History &&) noexcept = default;

        bool contains(const MessageId &id) const { return vertices_.count(id) != 0; }
        std::optional<GroupSet> dst_of(const MessageId &id) const;
        bool has_edge(const MessageId &from, const MessageId &to) const;

        std::size_t vertex_count() const noexcept { return vertices_.size(); }
        std::size_t edge_count() const noexcept { return edge_count_; }
        /// Retained size under the wire model.
        std::size_t serialized_size() const noexcept { return 24 + 16 * vertices_.size() + 16 * edge_count_; }

        const std::optional<MessageId> &last_delivered() const noexcept { return last_delivered_; }

        /// Highest stamp handed out so far; a watermark for delta_since.
        std::uint64_t stamp() const noexcept { return next_stamp_ - 1; }

        /// Returns false if the vertex was already present.
        bool add_vertex(const MessageRecord &rec);
        /// Both endpoints must be present. Returns false if the edge already existed.
        /// Throws ProtocolError if the edge would close a cycle.
        bool add_edge(const MessageId &from, const MessageId &to);

        /// Appends a locally delivered message: adds the vertex, links it after the
        /// previous local delivery and advances last_delivered.
        void append_delivery(const MessageRecord &rec);

        /// Union with a received delta. Edges whose endpoints are unknown here
        /// (pruned earlier) are skipped and counted.
        MergeResult merge(const HistoryDelta &delta);

        /// Everything stamped after `watermark`.
        HistoryDelta delta_since(std::uint64_t watermark) const;
        HistoryDelta full() const { return delta_since(0); }

        /// True iff a non-empty path from -> ... -> to exists.
        bool has_path(const MessageId &from, const MessageId &to) const;

        /// True iff some open message reaches `target` by a non-empty path.
        /// Searches backwards from `target` through its ancestors.
        bool any_reaches(const std::unordered_set<MessageId> &open, const MessageId &target) const;

        /// Number of retained vertices whose destination set includes g.
        std::size_t addressed_to(GroupId g) const { return addressed_.at(g); }
        bool contains_msg_to(GroupId g) const { return addressed_to(g) != 0; }

        /// Drops every vertex with a path to `keep` (keep itself stays) unless
        /// `retain` says otherwise, together with incident edges. Returns the
        /// number of vertices removed.
        std::size_t prune_ancestors_of(const MessageId &keep,
                                       const std::function<bool(const MessageRecord &)> &retain = {});
        /// Like prune_ancestors_of, but `root` goes too.
        std::size_t prune_through(const MessageId &root, const std::function<bool(const MessageRecord &)> &retain);

        std::vector<MessageRecord> records() const;
        std::vector<Edge> edges() const;
        const std::vector<MessageId> &preds(const MessageId &id) const;

        /// Checks the structural invariants: edges join retained vertices,
        /// last_delivered is retained, and the graph is acyclic.
        std::optional<std::string> check() const;

    private:
        std::size_t prune_closure(const MessageId &root, bool include_root,
                                  const std::function<bool(const MessageRecord &)> &retain);
        struct Vertex;
        struct Succ
        {
            MessageId to;
            std::uint64_t stamp;
            Vertex *target; // node addresses in vertices_ are stable
        };
        struct Vertex
        {
            GroupSet dst;
            std::uint64_t stamp = 0;
            std::uint64_t ord = 0; // position in a topological order of the DAG
            std::vector<MessageId> preds;
            std::vector<Succ> succs;
            mutable std::uint64_t visited = 0; // traversal epoch
            mutable std::uint64_t visited_back = 0;
        };
        struct LogEntry
        {
            MessageId a;
            std::optional<MessageId> b; // set for edges
        };

        void insert_edge(Vertex &from_v, const MessageId &from, Vertex &to_v, const MessageId &to);
        void relink();
        /// Restores the topological order before inserting x -> y when
        /// ord(y) < ord(x). The ancestors of x ordered after y move into the
        /// gap below y when it is wide enough; otherwise both affected regions
        /// share their positions (Pearce-Kelly). False iff y already reaches x.
        bool reorder(Vertex &x, Vertex &y);
        void set_ord(Vertex &v, std::uint64_t ord);
        std::unordered_map<MessageId, Vertex> vertices_;
        std::map<std::uint64_t, LogEntry> log_;
        std::array<std::size_t, kMaxGroups> addressed_{};
        std::size_t edge_count_ = 0;
        std::uint64_t next_stamp_ = 1;
        std::uint64_t next_ord_ = 0;
        std::map<std::uint64_t, Vertex *> by_ord_; // positions are unique
        std::optional<MessageId> last_delivered_;
        mutable std::uint64_t epoch_ = 0;
        mutable std::vector<const Vertex *> stack_;
    };

    /// Per-descendant record of what has already been shipped.
    struct Watermark
    {
        std::uint64_t stamp = 0;
    };

    /// Set union of `incoming` into `local`; last_delivered is untouched.
    inline MergeResult update_hst(History &local, const HistoryDelta &incoming) { return local.merge(incoming); }

    inline void hst_add(History &h, const MessageRecord &m) { h.append_delivery(m); }

    /// The part of h not yet shipped under `sent`; advances `sent` to h's current stamp.
    inline HistoryDelta diff_hst(const History &h, Watermark &sent)
    {
        HistoryDelta delta = h.delta_since(sent.stamp);
        sent.stamp = h.stamp();
        return delta;
    }

    inline bool contains_msg_to(const History &h, GroupId d) { return h.contains_msg_to(d); }

    /// Messages in h addressed to g that g has not delivered yet.
    std::vector<MessageId> open_dependencies(const History &h, GroupId g, const std::unordered_set<MessageId> &delivered);

    /// Garbage collection at flush delivery: drops every record that precedes the
    /// flush, except records addressed to g that g has not delivered. Throws
    /// std::invalid_argument("unknown flush") if the flush is not in h.
    std::size_t prune_before_flush(History &h, const MessageId &flush, const std::unordered_set<MessageId> &delivered,
                                   GroupId g);

    /// Reference definition: m depends on earlier iff a path earlier -> m exists.
    inline bool depend(const History &h, const MessageId &m, const MessageId &earlier)
    {
        return h.has_path(earlier, m);
    }
} // namespace amcast::history
