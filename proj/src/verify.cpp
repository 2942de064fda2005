#include "amcast/verify.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>

namespace amcast::verify
{
    std::string Report::summary() const
    {
        if (ok())
        {
            return check + ": ok";
        }
        return check + ": " + std::to_string(violations.size()) + " violation(s), first: " + violations.front();
    }

    DeliveryView DeliveryView::from(const Trace &trace)
    {
        DeliveryView view;
        for (const auto &e : trace)
        {
            if (e.kind == EventKind::ClientSend)
            {
                view.multicasts.emplace(e.msg, e.dst);
                view.issued_at.emplace(e.msg, e.at);
            }
            else if (e.kind == EventKind::Deliver && e.node.is_group())
            {
                view.delivered[e.node.id].push_back(e.msg);
            }
        }
        return view;
    }

    Report check_validity_agreement_integrity(const Trace &trace)
    {
        Report report{"validity/agreement/integrity", {}};
        const DeliveryView view = DeliveryView::from(trace);
        std::map<std::pair<MessageId, GroupId>, std::size_t> count;
        for (const auto &[g, seq] : view.delivered)
        {
            for (const auto &m : seq)
            {
                ++count[{m, g}];
            }
        }
        for (const auto &[key, n] : count)
        {
            const auto &[m, g] = key;
            auto it = view.multicasts.find(m);
            if (it == view.multicasts.end())
            {
                report.violations.push_back("integrity: group " + std::to_string(g) + " delivered " + m.to_string() +
                                            ", which was never multicast");
            }
            else if (!it->second.contains(g))
            {
                report.violations.push_back("integrity: group " + std::to_string(g) + " delivered " + m.to_string() +
                                            " but is not among its destinations " + it->second.to_string());
            }
            if (n > 1)
            {
                report.violations.push_back("integrity: group " + std::to_string(g) + " delivered " + m.to_string() + " " +
                                            std::to_string(n) + " times");
            }
        }
        for (const auto &[m, dst] : view.multicasts)
        {
            for (GroupId g : dst)
            {
                if (!count.count({m, g}))
                {
                    report.violations.push_back("agreement: group " + std::to_string(g) + " never delivered " +
                                                m.to_string());
                }
            }
        }
        return report;
    }

    PrefixReport check_prefix_order(const Trace &trace)
    {
        PrefixReport report;
        report.check = "prefix order";
        const DeliveryView view = DeliveryView::from(trace);
        std::map<GroupId, std::unordered_map<MessageId, std::size_t>> position;
        for (const auto &[g, seq] : view.delivered)
        {
            auto &pos = position[g];
            for (std::size_t i = 0; i < seq.size(); ++i)
            {
                pos.emplace(seq[i], i);
            }
        }
        auto dst_of = [&](const MessageId &m) {
            auto it = view.multicasts.find(m);
            return it == view.multicasts.end() ? GroupSet{} : it->second;
        };
        for (auto gi = view.delivered.begin(); gi != view.delivered.end(); ++gi)
        {
            for (auto hi = std::next(gi); hi != view.delivered.end(); ++hi)
            {
                const GroupId g = gi->first;
                const GroupId h = hi->first;
                // Each group's sequence restricted to messages both delivered.
                auto restrict = [&](const std::vector<MessageId> &seq, GroupId self, GroupId other) {
                    std::vector<MessageId> out;
                    const auto &other_pos = position[other];
                    for (const auto &m : seq)
                    {
                        const GroupSet dst = dst_of(m);
                        if (dst.contains(self) && dst.contains(other) && other_pos.count(m))
                        {
                            out.push_back(m);
                        }
                    }
                    return out;
                };
                const auto at_g = restrict(gi->second, g, h);
                const auto at_h = restrict(hi->second, h, g);
                if (at_g == at_h)
                {
                    continue;
                }
                // First position where they differ names the witness pair.
                std::size_t i = 0;
                while (i < at_g.size() && i < at_h.size() && at_g[i] == at_h[i])
                {
                    ++i;
                }
                if (i >= at_g.size() || i >= at_h.size())
                {
                    continue; // duplicates only; integrity reports those
                }
                const MessageId first = at_g[i];
                const MessageId second = at_h[i];
                const GroupSet common = dst_of(first) & dst_of(second);
                const GroupId lcd = common.min();
                std::string lcd_note;
                if (position.count(lcd) && position[lcd].count(first) && position[lcd].count(second))
                {
                    const bool lcd_first = position[lcd][first] < position[lcd][second];
                    const GroupId dissenter = lcd_first ? h : g;
                    if (dissenter != lcd)
                    {
                        ++report.lcd_disagreements;
                    }
                    lcd_note = "; lcd " + std::to_string(lcd) + " orders " + (lcd_first ? first : second).to_string() +
                               " first, group " + std::to_string(dissenter) + " disagrees";
                }
                else
                {
                    lcd_note = "; lcd " + std::to_string(lcd) + " did not deliver both";
                }
                report.lcds.push_back(lcd);
                report.violations.push_back("groups " + std::to_string(g) + " and " + std::to_string(h) +
                                            " disagree: " + std::to_string(g) + " delivers " + first.to_string() +
                                            " before " + second.to_string() + ", " + std::to_string(h) +
                                            " the reverse" + lcd_note);
            }
        }
        return report;
    }

    AcyclicReport check_acyclic_order(const Trace &trace)
    {
        AcyclicReport report;
        report.check = "acyclic order";
        const DeliveryView view = DeliveryView::from(trace);
        std::unordered_map<MessageId, std::set<MessageId>> succs;
        std::unordered_map<MessageId, std::set<MessageId>> preds;
        std::set<MessageId> nodes;
        for (const auto &[g, seq] : view.delivered)
        {
            for (std::size_t i = 0; i < seq.size(); ++i)
            {
                nodes.insert(seq[i]);
                if (i + 1 < seq.size() && seq[i] != seq[i + 1])
                {
                    succs[seq[i]].insert(seq[i + 1]);
                    preds[seq[i + 1]].insert(seq[i]);
                }
            }
        }
        std::unordered_map<MessageId, std::size_t> indegree;
        std::vector<MessageId> ready;
        for (const auto &m : nodes)
        {
            indegree[m] = preds[m].size();
            if (indegree[m] == 0)
            {
                ready.push_back(m);
            }
        }
        std::size_t visited = 0;
        while (!ready.empty())
        {
            MessageId m = ready.back();
            ready.pop_back();
            ++visited;
            for (const auto &s : succs[m])
            {
                if (--indegree[s] == 0)
                {
                    ready.push_back(s);
                }
            }
        }
        if (visited == nodes.size())
        {
            return report;
        }
        // Every leftover node has a leftover predecessor; walking backwards must repeat.
        MessageId at{};
        for (const auto &m : nodes)
        {
            if (indegree[m] > 0)
            {
                at = m;
                break;
            }
        }
        std::vector<MessageId> walk;
        std::unordered_map<MessageId, std::size_t> seen_at;
        while (!seen_at.count(at))
        {
            seen_at[at] = walk.size();
            walk.push_back(at);
            for (const auto &p : preds[at])
            {
                if (indegree[p] > 0)
                {
                    at = p;
                    break;
                }
            }
        }
        std::vector<MessageId> cycle(walk.begin() + static_cast<std::ptrdiff_t>(seen_at[at]), walk.end());
        std::reverse(cycle.begin(), cycle.end());
        report.cycle = cycle;
        std::string text;
        for (const auto &m : cycle)
        {
            text += m.to_string() + " < ";
        }
        text += cycle.front().to_string();
        report.violations.push_back("delivery order has a cycle: " + text);
        return report;
    }

    MinimalityReport check_minimality(const Trace &trace, NotifRule rule)
    {
        MinimalityReport report;
        report.check = "minimality";
        constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
        // Trace position of the first multicast to h, and to both g and h. Positions
        // rather than times: a multicast and the NOTIF it justifies can share a timestamp.
        std::map<GroupId, std::size_t> first_to;
        std::map<std::pair<GroupId, GroupId>, std::size_t> first_to_both;
        for (std::size_t i = 0; i < trace.size(); ++i)
        {
            const auto &e = trace[i];
            if (e.kind != EventKind::ClientSend)
            {
                continue;
            }
            for (GroupId g : e.dst)
            {
                first_to.try_emplace(g, i);
                for (GroupId h : e.dst)
                {
                    first_to_both.try_emplace({g, h}, i);
                }
            }
        }
        auto lookup = [](const auto &map, const auto &key) {
            auto it = map.find(key);
            return it == map.end() ? kNever : it->second;
        };
        for (std::size_t i = 0; i < trace.size(); ++i)
        {
            const auto &e = trace[i];
            if (!e.packet || !e.node.is_group())
            {
                continue;
            }
            if (e.kind == EventKind::Receive && is_payload(*e.packet) && !e.dst.contains(e.node.id))
            {
                ++report.relays[e.node.id];
            }
            if (e.kind != EventKind::Send)
            {
                continue;
            }
            const GroupId g = e.node.id;
            const GroupId h = e.peer.id;
            switch (*e.packet)
            {
            case PacketKind::Msg:
            case PacketKind::Forward:
            case PacketKind::Timestamp:
                if (!e.dst.contains(g) || !e.dst.contains(h))
                {
                    ++report.ordering_outside_dst;
                    report.violations.push_back(std::string(to_string(*e.packet)) + " for " + e.msg.to_string() +
                                                " from " + std::to_string(g) + " to " + std::to_string(h) +
                                                " leaves its destinations " + e.dst.to_string());
                }
                break;
            case PacketKind::Ack:
                // Notified groups answer NOTIFs with ACKs; only the recipient must be a destination.
                if (!e.dst.contains(h))
                {
                    ++report.ordering_outside_dst;
                    report.violations.push_back("ack for " + e.msg.to_string() + " from " + std::to_string(g) + " to " +
                                                std::to_string(h) + " leaves its destinations " + e.dst.to_string());
                }
                break;
            case PacketKind::Notif:
            {
                ++report.notifs;
                const bool shared = lookup(first_to_both, std::make_pair(g, h)) < i;
                const bool learned = lookup(first_to, h) < i;
                if (!shared)
                {
                    ++report.notif_without_shared_dst;
                }
                const bool justified = (rule == NotifRule::Shared ? shared : learned) && !e.dst.contains(h);
                if (!justified)
                {
                    ++report.notif_unjustified;
                    report.violations.push_back("notif for " + e.msg.to_string() + " from " + std::to_string(g) +
                                                " to " + std::to_string(h) + " without earlier communication");
                }
                break;
            }
            case PacketKind::Client:
                break;
            }
        }
        for (const auto &[g, n] : report.relays)
        {
            report.violations.push_back("group " + std::to_string(g) + " relayed " + std::to_string(n) +
                                        " payload message(s) it is not a destination of");
        }
        return report;
    }

    namespace
    {
        struct Counts
        {
            std::size_t received = 0;
            std::size_t delivered = 0;
        };

        std::map<GroupId, Counts> payload_counts(const Trace &trace)
        {
            std::map<GroupId, Counts> counts;
            for (const auto &e : trace)
            {
                if (!e.node.is_group())
                {
                    continue;
                }
                if (e.kind == EventKind::Receive && e.packet && is_payload(*e.packet))
                {
                    ++counts[e.node.id].received;
                }
                else if (e.kind == EventKind::Deliver)
                {
                    ++counts[e.node.id].delivered;
                }
            }
            return counts;
        }

        double ratio(const Counts &c)
        {
            return c.received == 0 ? 0.0 : 1.0 - static_cast<double>(c.delivered) / static_cast<double>(c.received);
        }
    }

    double overhead(const Trace &trace, GroupId g)
    {
        auto counts = payload_counts(trace);
        auto it = counts.find(g);
        return it == counts.end() ? 0.0 : ratio(it->second);
    }

    std::vector<double> overheads(const Trace &trace, std::size_t n_groups)
    {
        auto counts = payload_counts(trace);
        std::vector<double> out(n_groups, 0.0);
        for (const auto &[g, c] : counts)
        {
            if (g < n_groups)
            {
                out[g] = ratio(c);
            }
        }
        return out;
    }

    std::vector<std::string> Verdict::lines() const
    {
        std::vector<std::string> out{safety.summary(), prefix.summary(), acyclic.summary()};
        std::string m = minimality.summary();
        if (!genuine_expected)
        {
            m += " (expected non-genuine; relaying groups: " + std::to_string(minimality.relays.size()) + ")";
        }
        out.push_back(m);
        return out;
    }

    Verdict verify_all(const Trace &trace, bool genuine_expected, bool forbid_notifs)
    {
        Verdict v;
        v.genuine_expected = genuine_expected;
        v.safety = check_validity_agreement_integrity(trace);
        v.prefix = check_prefix_order(trace);
        v.acyclic = check_acyclic_order(trace);
        v.minimality = check_minimality(trace);
        if (forbid_notifs && v.minimality.notifs > 0)
        {
            v.minimality.violations.push_back(std::to_string(v.minimality.notifs) + " NOTIF packet(s) in a protocol without notifications");
        }
        return v;
    }
} // namespace amcast::verify
