#include "amcast/flexcast.hpp"

#include "amcast/overlay.hpp"

namespace amcast::flexcast
{
    GroupState::GroupState(GroupId g, std::size_t n_groups)
        : g_(g), n_(n_groups), queues_(g), sent_(n_groups)
    {
        if (g >= n_groups)
        {
            throw std::invalid_argument("group " + std::to_string(g) + " outside overlay of " + std::to_string(n_groups));
        }
    }

    Transition GroupState::on_client(const MessageRecord &msg)
    {
        if (overlay::dag_lca(msg.dst) != g_)
        {
            throw ProtocolError("misrouted client message " + msg.id.to_string() + " at group " + std::to_string(g_));
        }
        Transition out;
        a_deliver(msg, true, TokenSet{}, out);
        return out;
    }

    Transition GroupState::on_packet(GroupId from, const Packet &packet)
    {
        switch (packet.kind)
        {
        case PacketKind::Msg:
            return on_msg(from, packet);
        case PacketKind::Ack:
            return on_ack(from, packet);
        case PacketKind::Notif:
            return on_notif(from, packet);
        default:
            throw ProtocolError("flexcast group received a " + std::string(to_string(packet.kind)) + " packet");
        }
    }

    void GroupState::update(const history::HistoryDelta &delta)
    {
        auto merged = history::update_hst(hst_, delta);
        for (const auto &rec : merged.added)
        {
            if (rec.dst.contains(g_) && !delivered_.count(rec.id))
            {
                open_.insert(rec.id);
            }
        }
        // Old news from an ancestor that has not flushed as far as this group:
        // anything preceding an already pruned message is dropped again.
        for (const auto &id : merged.stale)
        {
            hst_.prune_through(id, [&](const MessageRecord &rec) {
                return rec.dst.contains(g_) && !delivered_.count(rec.id);
            });
        }
    }

    Transition GroupState::on_msg(GroupId from, const Packet &packet)
    {
        const MessageRecord &msg = packet.msg;
        if (!msg.dst.contains(g_))
        {
            throw ProtocolError("misdelivered MSG " + msg.id.to_string() + " at group " + std::to_string(g_));
        }
        const GroupId lca = overlay::dag_lca(msg.dst);
        if (lca == g_ || from != lca)
        {
            throw ProtocolError("MSG " + msg.id.to_string() + " from " + std::to_string(from) + " is not from its lca");
        }
        if (delivered_.count(msg.id) || index_.count(msg.id))
        {
            throw ProtocolError("integrity violation: duplicate MSG " + msg.id.to_string());
        }
        Transition out;
        update(packet.history);
        PendingEntry entry{msg, {}, {}, {}};
        if (auto it = early_.find(msg.id); it != early_.end())
        {
            entry = std::move(it->second);
            entry.msg = msg;
            early_.erase(it);
        }
        entry.notif_list.insert(packet.notif_list.begin(), packet.notif_list.end());
        auto &queue = queues_[lca];
        queue.push_back(entry);
        index_[msg.id] = &queue.back();
        reprocess_queues(out);
        return out;
    }

    Transition GroupState::on_ack(GroupId from, const Packet &packet)
    {
        const MessageRecord &msg = packet.msg;
        if (from >= g_)
        {
            throw ProtocolError("ACK for " + msg.id.to_string() + " from non-ancestor " + std::to_string(from));
        }
        if (!msg.dst.contains(g_))
        {
            throw ProtocolError("misdelivered ACK " + msg.id.to_string() + " at group " + std::to_string(g_));
        }
        Transition out;
        update(packet.history);
        PendingEntry *entry = nullptr;
        if (delivered_.count(msg.id))
        {
            // A late ACK from a group this one no longer waits on: history only.
        }
        else if (auto it = index_.find(msg.id); it != index_.end())
        {
            entry = it->second;
        }
        else
        {
            // Overtook the MSG from the lca on a faster link.
            entry = &early_[msg.id];
        }
        if (entry)
        {
            if (packet.token)
            {
                entry->answered.insert(*packet.token);
            }
            else
            {
                entry->acks.insert(from);
            }
            entry->notif_list.insert(packet.notif_list.begin(), packet.notif_list.end());
        }
        reprocess_queues(out);
        return out;
    }

    Transition GroupState::on_notif(GroupId from, const Packet &packet)
    {
        const MessageRecord &msg = packet.msg;
        if (msg.dst.contains(g_) || from >= g_ || !packet.token || packet.token->to != g_)
        {
            throw ProtocolError("unexpected NOTIF " + msg.id.to_string() + " from " + std::to_string(from) + " at group " +
                                std::to_string(g_));
        }
        Transition out;
        update(packet.history);
        if (!open_.empty())
        {
            pend_notif_.push_back(ParkedNotif{msg, *packet.token, open_});
        }
        else
        {
            send_descendants(msg, PacketKind::Ack, {}, packet.token, out);
        }
        return out;
    }

    GroupSet GroupState::missing_acks(const PendingEntry &entry) const
    {
        const GroupSet ancestors = GroupSet::below(g_);
        GroupSet need = entry.msg.dst & ancestors;
        need.erase(overlay::dag_lca(entry.msg.dst));
        need = need - entry.acks;
        for (const auto &token : entry.notif_list)
        {
            if (ancestors.contains(token.to) && !entry.answered.count(token))
            {
                need.insert(token.to);
            }
        }
        return need;
    }

    bool GroupState::can_deliver(const PendingEntry &entry) const
    {
        if (!missing_acks(entry).empty())
        {
            return false;
        }
        if (open_.size() <= 1)
        {
            return true; // at most the entry itself is open
        }
        return !hst_.any_reaches(open_, entry.msg.id);
    }

    void GroupState::reprocess_queues(Transition &out)
    {
        bool progressed = true;
        while (progressed)
        {
            progressed = false;
            for (auto &queue : queues_)
            {
                while (!queue.empty() && can_deliver(queue.front()))
                {
                    PendingEntry entry = std::move(queue.front());
                    queue.pop_front();
                    index_.erase(entry.msg.id);
                    a_deliver(entry.msg, false, entry.notif_list, out);
                    progressed = true;
                }
            }
        }
    }

    void GroupState::a_deliver(const MessageRecord &msg, bool at_lca, TokenSet notif_list, Transition &out)
    {
        if (!delivered_.insert(msg.id).second)
        {
            throw ProtocolError("integrity violation: " + msg.id.to_string() + " delivered twice at group " +
                                std::to_string(g_));
        }
        history::hst_add(hst_, msg);
        open_.erase(msg.id);
        out.delivered.push_back(msg.id);
        send_descendants(msg, at_lca ? PacketKind::Msg : PacketKind::Ack, std::move(notif_list), std::nullopt, out);

        std::vector<ParkedNotif> fire;
        for (auto it = pend_notif_.begin(); it != pend_notif_.end();)
        {
            it->deps.erase(msg.id);
            if (it->deps.empty())
            {
                fire.push_back(std::move(*it));
                it = pend_notif_.erase(it);
            }
            else
            {
                ++it;
            }
        }
        for (const auto &parked : fire)
        {
            send_descendants(parked.msg, PacketKind::Ack, {}, parked.token, out);
        }

        if (is_flush(msg.id))
        {
            history::prune_before_flush(hst_, msg.id, delivered_, g_);
        }
    }

    void GroupState::send_descendants(const MessageRecord &msg, PacketKind kind, TokenSet notif_list,
                                      std::optional<NotifToken> answers, Transition &out)
    {
        send_notifs(msg, notif_list, out);
        const std::vector<NotifToken> carried(notif_list.begin(), notif_list.end());
        for (GroupId d : msg.dst & GroupSet::above(g_, n_))
        {
            Packet p;
            p.kind = kind;
            p.msg = msg;
            p.history = history::diff_hst(hst_, sent_[d]);
            p.notif_list = carried;
            p.token = answers;
            out.sends.push_back(Outbound{d, std::move(p)});
        }
    }

    void GroupState::send_notifs(const MessageRecord &msg, TokenSet &notif_list, Transition &out)
    {
        // Non-destinations strictly between this group and the highest destination.
        const GroupSet gaps = GroupSet::above(g_, n_) & GroupSet::below(msg.dst.max());
        for (GroupId d : gaps - msg.dst)
        {
            if (history::contains_msg_to(hst_, d))
            {
                Packet p;
                p.kind = PacketKind::Notif;
                p.msg = msg;
                p.history = history::diff_hst(hst_, sent_[d]);
                p.token = NotifToken{g_, notif_seq_++, d};
                notif_list.insert(*p.token);
                out.sends.push_back(Outbound{d, std::move(p)});
            }
        }
    }

    FlexCast::FlexCast(std::size_t n_groups) : n_(n_groups)
    {
        if (auto e = overlay::validate(n_groups))
        {
            throw std::invalid_argument(*e);
        }
    }

    GroupId FlexCast::entry_group(GroupSet dst, GroupId, const std::vector<SimTime> &) const
    {
        return overlay::dag_lca(dst);
    }

    std::unique_ptr<GroupNode> FlexCast::make_node(GroupId g) const
    {
        return std::make_unique<GroupState>(g, n_);
    }
} // namespace amcast::flexcast
