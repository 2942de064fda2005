#pragma once

#include "amcast/overlay.hpp"
#include "amcast/protocol.hpp"

#include <map>
#include <set>
#include <unordered_map>

namespace amcast::baselines
{
    /// Skeen's protocol with Lamport clocks. The entry group piggybacks its
    /// local timestamp on the forwarded message; every other destination
    /// answers with its own timestamp to all the others.
    class SkeenState final : public GroupNode
    {
    public:
        SkeenState(GroupId g, std::size_t n_groups);

        Transition on_client(const MessageRecord &msg) override;
        Transition on_packet(GroupId from, const Packet &packet) override;

        std::uint64_t clock() const noexcept { return clock_; }
        std::optional<std::uint64_t> final_timestamp(const MessageId &id) const;
        std::size_t pending() const noexcept { return pending_.size(); }

    private:
        struct Pending
        {
            MessageRecord msg;
            std::map<GroupId, std::uint64_t> stamps;
            std::optional<std::uint64_t> local;
            std::optional<std::uint64_t> final_ts;
        };

        Pending &pending_for(const MessageRecord &msg);
        void record(Pending &p, GroupId from, std::uint64_t ts);
        void assign_local(Pending &p);
        void try_deliver(Transition &out);

        GroupId g_;
        std::size_t n_;
        std::uint64_t clock_ = 0;
        std::unordered_map<MessageId, Pending> pending_;
        std::set<std::pair<std::uint64_t, MessageId>> unfinished_; // (local ts, id)
        std::set<std::pair<std::uint64_t, MessageId>> finished_;   // (final ts, id)
        std::unordered_map<MessageId, std::uint64_t> finals_;
    };

    class Skeen final : public Protocol
    {
    public:
        explicit Skeen(std::size_t n_groups);

        std::string_view name() const noexcept override { return "skeen"; }
        bool genuine() const noexcept override { return true; }
        std::size_t group_count() const noexcept override { return n_; }
        /// The destination nearest to the client's home (ties by lower id).
        GroupId entry_group(GroupSet dst, GroupId home, const std::vector<SimTime> &distance) const override;
        std::unique_ptr<GroupNode> make_node(GroupId g) const override;

    private:
        std::size_t n_;
    };

    /// Tree-ordered multicast: each node sequences messages in arrival order,
    /// delivers the ones addressed to it and forwards to the children whose
    /// subtree holds a destination.
    class HierState final : public GroupNode
    {
    public:
        HierState(GroupId g, overlay::TreeOverlay tree);

        Transition on_client(const MessageRecord &msg) override;
        Transition on_packet(GroupId from, const Packet &packet) override;

        std::uint64_t sequenced() const noexcept { return seq_; }

    private:
        Transition sequence(const MessageRecord &msg);

        GroupId g_;
        overlay::TreeOverlay tree_;
        std::uint64_t seq_ = 0;
    };

    class Hierarchical final : public Protocol
    {
    public:
        explicit Hierarchical(overlay::TreeOverlay tree);

        std::string_view name() const noexcept override { return "hierarchical"; }
        bool genuine() const noexcept override { return false; }
        std::size_t group_count() const noexcept override { return tree_.size(); }
        /// The tree lca of the destinations, which need not be a destination.
        GroupId entry_group(GroupSet dst, GroupId home, const std::vector<SimTime> &distance) const override;
        std::unique_ptr<GroupNode> make_node(GroupId g) const override;
        const overlay::TreeOverlay &tree() const noexcept { return tree_; }

    private:
        overlay::TreeOverlay tree_;
    };
} // namespace amcast::baselines
