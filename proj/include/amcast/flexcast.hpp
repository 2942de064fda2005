#pragma once

#include "amcast/history.hpp"
#include "amcast/protocol.hpp"

#include <deque>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace amcast::flexcast
{
    /// A message waiting in the queue of its lca.
    using TokenSet = std::set<NotifToken>;

    struct PendingEntry
    {
        MessageRecord msg;
        GroupSet acks;       // destination ancestors that acked
        TokenSet notif_list; // notifications known to be outstanding for msg
        TokenSet answered;   // notifications whose ACK arrived
    };

    /// One FlexCast group over a C-DAG of `n_groups` ranked groups.
    class GroupState final : public GroupNode
    {
    public:
        GroupState(GroupId g, std::size_t n_groups);

        Transition on_client(const MessageRecord &msg) override;
        Transition on_packet(GroupId from, const Packet &packet) override;
        std::size_t retained_history() const override { return hst_.serialized_size(); }

        Transition on_msg(GroupId from, const Packet &packet);
        Transition on_ack(GroupId from, const Packet &packet);
        Transition on_notif(GroupId from, const Packet &packet);

        /// Both delivery conditions for an entry at the head of its queue.
        bool can_deliver(const PendingEntry &entry) const;
        /// Ancestors whose ACK the entry still needs (empty when condition 1 holds).
        /// A group notified twice about the message owes one ACK per notification.
        GroupSet missing_acks(const PendingEntry &entry) const;

        GroupId id() const noexcept { return g_; }
        const history::History &history() const noexcept { return hst_; }
        bool delivered(const MessageId &id) const { return delivered_.count(id) != 0; }
        std::size_t queued() const noexcept { return index_.size(); }
        std::size_t parked_notifs() const noexcept { return pend_notif_.size(); }
        const std::deque<PendingEntry> &queue(GroupId ancestor) const { return queues_.at(ancestor); }

    private:
        struct ParkedNotif
        {
            MessageRecord msg;
            NotifToken token;
            std::unordered_set<MessageId> deps;
        };

        void update(const history::HistoryDelta &delta);
        void a_deliver(const MessageRecord &msg, bool at_lca, TokenSet notif_list, Transition &out);
        void send_descendants(const MessageRecord &msg, PacketKind kind, TokenSet notif_list,
                              std::optional<NotifToken> answers, Transition &out);
        void send_notifs(const MessageRecord &msg, TokenSet &notif_list, Transition &out);
        void reprocess_queues(Transition &out);

        GroupId g_;
        std::size_t n_;
        std::vector<std::deque<PendingEntry>> queues_; // one per ancestor
        std::unordered_map<MessageId, PendingEntry *> index_;
        std::unordered_map<MessageId, PendingEntry> early_; // ACKs that overtook their MSG
        history::History hst_;
        std::unordered_set<MessageId> delivered_;
        std::unordered_set<MessageId> open_; // in hst_, addressed here, not delivered
        std::vector<ParkedNotif> pend_notif_;
        std::uint64_t notif_seq_ = 0;
        std::vector<history::Watermark> sent_; // per descendant
    };

    class FlexCast final : public Protocol
    {
    public:
        explicit FlexCast(std::size_t n_groups);

        std::string_view name() const noexcept override { return "flexcast"; }
        bool genuine() const noexcept override { return true; }
        bool uses_flush() const noexcept override { return true; }
        std::size_t group_count() const noexcept override { return n_; }
        /// Clients submit to the lowest-ranked destination.
        GroupId entry_group(GroupSet dst, GroupId home, const std::vector<SimTime> &distance) const override;
        std::unique_ptr<GroupNode> make_node(GroupId g) const override;

    private:
        std::size_t n_;
    };
} // namespace amcast::flexcast
