#include "amcast/baselines.hpp"

#include <algorithm>

namespace amcast::baselines
{
    SkeenState::SkeenState(GroupId g, std::size_t n_groups) : g_(g), n_(n_groups)
    {
        if (g >= n_groups)
        {
            throw std::invalid_argument("group " + std::to_string(g) + " outside overlay of " + std::to_string(n_groups));
        }
    }

    std::optional<std::uint64_t> SkeenState::final_timestamp(const MessageId &id) const
    {
        auto it = finals_.find(id);
        if (it == finals_.end())
        {
            return std::nullopt;
        }
        return it->second;
    }

    SkeenState::Pending &SkeenState::pending_for(const MessageRecord &msg)
    {
        if (finals_.count(msg.id))
        {
            throw ProtocolError("protocol bug: traffic for already delivered " + msg.id.to_string());
        }
        auto [it, fresh] = pending_.try_emplace(msg.id);
        if (fresh)
        {
            it->second.msg = msg;
        }
        return it->second;
    }

    void SkeenState::record(Pending &p, GroupId from, std::uint64_t ts)
    {
        if (!p.stamps.emplace(from, ts).second)
        {
            throw ProtocolError("protocol bug: duplicate timestamp for " + p.msg.id.to_string() + " from group " +
                                std::to_string(from));
        }
        clock_ = std::max(clock_, ts);
        if (p.stamps.size() == p.msg.dst.size())
        {
            std::uint64_t ft = 0;
            for (const auto &[group, stamp] : p.stamps)
            {
                ft = std::max(ft, stamp);
            }
            p.final_ts = ft;
            if (p.local)
            {
                unfinished_.erase({*p.local, p.msg.id});
            }
            finished_.emplace(ft, p.msg.id);
        }
    }

    void SkeenState::assign_local(Pending &p)
    {
        p.local = ++clock_;
        unfinished_.emplace(*p.local, p.msg.id);
        record(p, g_, *p.local);
    }

    Transition SkeenState::on_client(const MessageRecord &msg)
    {
        if (!msg.dst.contains(g_))
        {
            throw ProtocolError("misrouted client message " + msg.id.to_string() + " at group " + std::to_string(g_));
        }
        Transition out;
        if (msg.dst.size() == 1)
        {
            // Nothing to agree on: no other group orders it.
            if (!finals_.emplace(msg.id, ++clock_).second)
            {
                throw ProtocolError("protocol bug: duplicate client message " + msg.id.to_string());
            }
            out.delivered.push_back(msg.id);
            return out;
        }
        Pending &p = pending_for(msg);
        assign_local(p);
        for (GroupId d : msg.dst)
        {
            if (d != g_)
            {
                Packet fwd;
                fwd.kind = PacketKind::Forward;
                fwd.msg = msg;
                fwd.timestamp = *p.local;
                out.sends.push_back(Outbound{d, std::move(fwd)});
            }
        }
        try_deliver(out);
        return out;
    }

    Transition SkeenState::on_packet(GroupId from, const Packet &packet)
    {
        const MessageRecord &msg = packet.msg;
        if (!msg.dst.contains(g_) || !msg.dst.contains(from) || !packet.timestamp)
        {
            throw ProtocolError("protocol bug: stray " + std::string(to_string(packet.kind)) + " for " +
                                msg.id.to_string() + " at group " + std::to_string(g_));
        }
        Transition out;
        Pending &p = pending_for(msg);
        switch (packet.kind)
        {
        case PacketKind::Forward:
            if (p.local)
            {
                throw ProtocolError("protocol bug: duplicate forward of " + msg.id.to_string());
            }
            record(p, from, *packet.timestamp);
            assign_local(p);
            for (GroupId d : msg.dst)
            {
                if (d != g_)
                {
                    Packet ts;
                    ts.kind = PacketKind::Timestamp;
                    ts.msg = msg;
                    ts.timestamp = *p.local;
                    out.sends.push_back(Outbound{d, std::move(ts)});
                }
            }
            break;
        case PacketKind::Timestamp:
            // May precede the forward from the entry group; kept until it arrives.
            record(p, from, *packet.timestamp);
            break;
        default:
            throw ProtocolError("skeen group received a " + std::string(to_string(packet.kind)) + " packet");
        }
        try_deliver(out);
        return out;
    }

    void SkeenState::try_deliver(Transition &out)
    {
        while (!finished_.empty())
        {
            auto next = *finished_.begin();
            // An unfinished message's final timestamp is at least its local one here.
            if (!unfinished_.empty() && *unfinished_.begin() < next)
            {
                return;
            }
            finished_.erase(finished_.begin());
            finals_.emplace(next.second, next.first);
            pending_.erase(next.second);
            out.delivered.push_back(next.second);
        }
    }

    Skeen::Skeen(std::size_t n_groups) : n_(n_groups)
    {
        if (auto e = overlay::validate(n_groups))
        {
            throw std::invalid_argument(*e);
        }
    }

    GroupId Skeen::entry_group(GroupSet dst, GroupId home, const std::vector<SimTime> &distance) const
    {
        if (dst.empty())
        {
            throw std::invalid_argument("empty destination set");
        }
        if (dst.contains(home))
        {
            return home;
        }
        GroupId best = dst.min();
        for (GroupId d : dst)
        {
            if (distance.at(d) < distance.at(best))
            {
                best = d;
            }
        }
        return best;
    }

    std::unique_ptr<GroupNode> Skeen::make_node(GroupId g) const
    {
        return std::make_unique<SkeenState>(g, n_);
    }

    HierState::HierState(GroupId g, overlay::TreeOverlay tree) : g_(g), tree_(std::move(tree))
    {
        if (g >= tree_.size())
        {
            throw std::invalid_argument("group " + std::to_string(g) + " outside tree of " + std::to_string(tree_.size()));
        }
    }

    Transition HierState::on_client(const MessageRecord &msg)
    {
        if (overlay::tree_lca(tree_, msg.dst) != g_)
        {
            throw ProtocolError("misrouted client message " + msg.id.to_string() + " at group " + std::to_string(g_));
        }
        return sequence(msg);
    }

    Transition HierState::on_packet(GroupId from, const Packet &packet)
    {
        if (packet.kind != PacketKind::Forward || tree_.parent(g_) != from)
        {
            throw ProtocolError("hierarchical group " + std::to_string(g_) + " received " +
                                std::string(to_string(packet.kind)) + " from " + std::to_string(from));
        }
        return sequence(packet.msg);
    }

    Transition HierState::sequence(const MessageRecord &msg)
    {
        if (!tree_.subtree(g_).intersects(msg.dst))
        {
            throw ProtocolError("routing bug: " + msg.id.to_string() + " reached group " + std::to_string(g_) +
                                " with no destination below it");
        }
        ++seq_;
        Transition out;
        if (msg.dst.contains(g_))
        {
            out.delivered.push_back(msg.id);
        }
        for (GroupId c : tree_.children(g_))
        {
            if (tree_.subtree(c).intersects(msg.dst))
            {
                Packet fwd;
                fwd.kind = PacketKind::Forward;
                fwd.msg = msg;
                out.sends.push_back(Outbound{c, std::move(fwd)});
            }
        }
        return out;
    }

    Hierarchical::Hierarchical(overlay::TreeOverlay tree) : tree_(std::move(tree)) {}

    GroupId Hierarchical::entry_group(GroupSet dst, GroupId, const std::vector<SimTime> &) const
    {
        return overlay::tree_lca(tree_, dst);
    }

    std::unique_ptr<GroupNode> Hierarchical::make_node(GroupId g) const
    {
        return std::make_unique<HierState>(g, tree_);
    }
} // namespace amcast::baselines
