#include "amcast/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace amcast::simnet
{
    namespace
    {
        enum class EventType
        {
            Issue,
            Inject,
            ClientArrive,
            PacketArrive,
            Reply,
        };

        struct Event
        {
            SimTime at = 0;
            std::uint64_t seq = 0;
            EventType type = EventType::Issue;
            std::size_t client = 0; // index into clients
            GroupId from = 0;
            GroupId to = 0;
            Packet packet;
        };

        struct Later
        {
            bool operator()(const Event &a, const Event &b) const noexcept
            {
                return a.at != b.at ? a.at > b.at : a.seq > b.seq;
            }
        };

        struct Outstanding
        {
            MessageId id;
            SimTime issued = 0;
            GroupSet dst;
            GroupSet replied;
            std::vector<SimTime> replies;
        };

        struct Client
        {
            ClientSpec spec;
            std::uint32_t seq = 0;
            std::optional<Outstanding> pending;
        };

        class World
        {
        public:
            World(const Protocol &protocol, const LatencyMatrix &matrix, std::vector<ClientSpec> clients,
                  const SimConfig &cfg)
                : protocol_(protocol), matrix_(matrix), cfg_(cfg), jitter_rng_(cfg.jitter_seed)
            {
                const std::size_t n = protocol.group_count();
                if (matrix.size() != n)
                {
                    throw std::invalid_argument("latency matrix has " + std::to_string(matrix.size()) +
                                                " regions but the overlay has " + std::to_string(n) + " groups");
                }
                if (cfg.jitter < 0 || cfg.jitter >= 1)
                {
                    throw std::invalid_argument("jitter fraction must lie in [0,1)");
                }
                for (GroupId g = 0; g < n; ++g)
                {
                    nodes_.push_back(protocol.make_node(g));
                }
                result_.final_history.assign(n, 0);
                for (auto &spec : clients)
                {
                    if (spec.home >= n)
                    {
                        throw std::invalid_argument("client " + std::to_string(spec.id) + " has unknown home group " +
                                                    std::to_string(spec.home));
                    }
                    if (spec.id == kFlushClient || !client_index_.emplace(spec.id, clients_.size()).second)
                    {
                        throw std::invalid_argument("duplicate or reserved client id " + std::to_string(spec.id));
                    }
                    clients_.push_back(Client{std::move(spec), 0, std::nullopt});
                }
            }

            RunResult run(const std::vector<Injection> &injections)
            {
                for (const auto &inj : injections)
                {
                    GroupId entry = inj.entry ? *inj.entry : protocol_.entry_group(inj.dst, inj.home, matrix_.row(inj.home));
                    register_message(inj.id, inj.dst, false);
                    Event e;
                    e.at = inj.at;
                    e.type = EventType::Inject;
                    e.to = entry;
                    e.packet.kind = PacketKind::Client;
                    e.packet.msg = MessageRecord{inj.id, inj.dst};
                    push(std::move(e));
                }
                for (std::size_t i = 0; i < clients_.size(); ++i)
                {
                    Event e;
                    e.at = 0;
                    e.type = EventType::Issue;
                    e.client = i;
                    push(std::move(e));
                }
                while (!queue_.empty())
                {
                    std::pop_heap(queue_.begin(), queue_.end(), Later{});
                    Event e = std::move(queue_.back());
                    queue_.pop_back();
                    now_ = e.at;
                    dispatch(std::move(e));
                }
                result_.finished_at = now_;
                for (GroupId g = 0; g < nodes_.size(); ++g)
                {
                    result_.final_history[g] = nodes_[g]->retained_history();
                }
                for (const auto &c : clients_)
                {
                    result_.incomplete += c.pending ? 1 : 0;
                }
                return std::move(result_);
            }

        private:
            static std::size_t client_packet_bytes()
            {
                return Packet{}.bytes();
            }

            void push(Event e)
            {
                e.seq = next_seq_++;
                queue_.push_back(std::move(e));
                std::push_heap(queue_.begin(), queue_.end(), Later{});
            }

            void emit(SimTime at, EventKind kind, Endpoint node, Endpoint peer, const MessageId &msg,
                      std::optional<PacketKind> packet, GroupSet dst, std::size_t bytes)
            {
                if (cfg_.record_trace)
                {
                    result_.trace.push_back(TraceEvent{at, kind, node, peer, msg, packet, dst, bytes});
                }
            }

            void register_message(const MessageId &id, GroupSet dst, bool replies)
            {
                if (!registry_.emplace(id, dst).second)
                {
                    throw std::invalid_argument("message id " + id.to_string() + " used twice");
                }
                if (!replies)
                {
                    silent_.insert(id);
                }
            }

            SimTime link_delay(SimTime base)
            {
                if (cfg_.jitter == 0 || base == 0)
                {
                    return base;
                }
                const double u = std::uniform_real_distribution<double>(-1.0, 1.0)(jitter_rng_);
                return std::max<SimTime>(0, base + static_cast<SimTime>(std::llround(static_cast<double>(base) * cfg_.jitter * u)));
            }

            void dispatch(Event e)
            {
                switch (e.type)
                {
                case EventType::Issue:
                    issue(e.client);
                    break;
                case EventType::Inject:
                    emit(now_, EventKind::ClientSend, Endpoint::client(e.packet.msg.id.client), Endpoint::group(e.to),
                         e.packet.msg.id, PacketKind::Client, e.packet.msg.dst, client_packet_bytes());
                    [[fallthrough]];
                case EventType::ClientArrive:
                {
                    const MessageRecord msg = e.packet.msg;
                    emit(now_, EventKind::Receive, Endpoint::group(e.to), Endpoint::client(msg.id.client), msg.id,
                         PacketKind::Client, msg.dst, e.packet.bytes());
                    apply(e.to, nodes_[e.to]->on_client(msg));
                    break;
                }
                case EventType::PacketArrive:
                    emit(now_, EventKind::Receive, Endpoint::group(e.to), Endpoint::group(e.from), e.packet.msg.id,
                         e.packet.kind, e.packet.msg.dst, e.packet.bytes());
                    apply(e.to, nodes_[e.to]->on_packet(e.from, e.packet));
                    break;
                case EventType::Reply:
                    reply(e.client, e.from, e.packet.msg.id);
                    break;
                }
            }

            void issue(std::size_t index)
            {
                Client &c = clients_[index];
                if (now_ > cfg_.issue_until || (cfg_.max_transactions && result_.issued >= cfg_.max_transactions))
                {
                    return;
                }
                const GroupSet dst = c.spec.next();
                if (dst.empty())
                {
                    throw std::invalid_argument("client " + std::to_string(c.spec.id) + " produced an empty destination set");
                }
                const MessageId id{c.spec.id, ++c.seq};
                const GroupId entry = protocol_.entry_group(dst, c.spec.home, matrix_.row(c.spec.home));
                register_message(id, dst, true);
                c.pending = Outstanding{id, now_, dst, GroupSet{}, {}};
                emit(now_, EventKind::ClientSend, Endpoint::client(c.spec.id), Endpoint::group(entry), id,
                     PacketKind::Client, dst, client_packet_bytes());
                Event e;
                e.at = now_ + matrix_.client_link(c.spec.home) + link_delay(matrix_.latency(c.spec.home, entry));
                e.type = EventType::ClientArrive;
                e.to = entry;
                e.packet.kind = PacketKind::Client;
                e.packet.msg = MessageRecord{id, dst};
                push(std::move(e));
                ++result_.issued;

                if (cfg_.flush_every && protocol_.uses_flush() && result_.issued % cfg_.flush_every == 0)
                {
                    inject_flush();
                }
            }

            void inject_flush()
            {
                const GroupSet all = GroupSet::all(nodes_.size());
                const MessageId id{kFlushClient, static_cast<std::uint32_t>(++result_.flushes)};
                const GroupId entry = protocol_.entry_group(all, 0, matrix_.row(0));
                register_message(id, all, false);
                emit(now_, EventKind::ClientSend, Endpoint::client(kFlushClient), Endpoint::group(entry), id,
                     PacketKind::Client, all, client_packet_bytes());
                Event e;
                e.at = now_;
                e.type = EventType::ClientArrive;
                e.to = entry;
                e.packet.kind = PacketKind::Client;
                e.packet.msg = MessageRecord{id, all};
                push(std::move(e));
            }

            void apply(GroupId g, Transition tr)
            {
                for (const MessageId &id : tr.delivered)
                {
                    auto reg = registry_.find(id);
                    if (reg == registry_.end())
                    {
                        throw ProtocolError("group " + std::to_string(g) + " delivered unknown message " + id.to_string());
                    }
                    emit(now_, EventKind::Deliver, Endpoint::group(g), Endpoint::none(), id, std::nullopt, reg->second, 0);
                    if (silent_.count(id))
                    {
                        continue;
                    }
                    auto ci = client_index_.find(id.client);
                    if (ci == client_index_.end())
                    {
                        throw ProtocolError("delivery of " + id.to_string() + " has no client to reply to");
                    }
                    const GroupId home = clients_[ci->second].spec.home;
                    Event e;
                    e.at = now_;
                    if (cfg_.reply == ReplyPath::Network)
                    {
                        e.at += link_delay(matrix_.latency(g, home)) + matrix_.client_link(home);
                    }
                    e.type = EventType::Reply;
                    e.client = ci->second;
                    e.from = g;
                    e.packet.msg = MessageRecord{id, reg->second};
                    push(std::move(e));
                }
                for (auto &out : tr.sends)
                {
                    if (out.to >= nodes_.size())
                    {
                        throw std::out_of_range("no route from " + std::to_string(g) + " to " + std::to_string(out.to));
                    }
                    emit(now_, EventKind::Send, Endpoint::group(g), Endpoint::group(out.to), out.packet.msg.id,
                         out.packet.kind, out.packet.msg.dst, out.packet.bytes());
                    SimTime arrival = now_ + link_delay(matrix_.latency(g, out.to));
                    SimTime &last = channel_[(std::uint64_t{g} << 32) | out.to];
                    arrival = std::max(arrival, last);
                    last = arrival;
                    Event e;
                    e.at = arrival;
                    e.type = EventType::PacketArrive;
                    e.from = g;
                    e.to = out.to;
                    e.packet = std::move(out.packet);
                    push(std::move(e));
                }
                result_.peak_history = std::max(result_.peak_history, nodes_[g]->retained_history());
            }

            void reply(std::size_t index, GroupId from, const MessageId &id)
            {
                Client &c = clients_[index];
                if (!c.pending || c.pending->id != id)
                {
                    throw ProtocolError("reply for unknown transaction " + id.to_string() + " at client " +
                                        std::to_string(c.spec.id));
                }
                Outstanding &o = *c.pending;
                if (!o.dst.contains(from) || o.replied.contains(from))
                {
                    throw ProtocolError("unexpected reply for " + id.to_string() + " from group " + std::to_string(from));
                }
                emit(now_, EventKind::ClientReply, Endpoint::client(c.spec.id), Endpoint::group(from), id, std::nullopt,
                     o.dst, 0);
                o.replied.insert(from);
                o.replies.push_back(now_ - o.issued);
                if (o.replied != o.dst)
                {
                    return;
                }
                std::sort(o.replies.begin(), o.replies.end());
                result_.samples.push_back(LatencySample{o.id, c.spec.id, o.issued, now_, o.dst, std::move(o.replies)});
                c.pending.reset();
                Event e;
                e.at = now_;
                e.type = EventType::Issue;
                e.client = index;
                push(std::move(e));
            }

            const Protocol &protocol_;
            const LatencyMatrix &matrix_;
            SimConfig cfg_;
            std::mt19937_64 jitter_rng_;
            std::vector<std::unique_ptr<GroupNode>> nodes_;
            std::vector<Client> clients_;
            std::unordered_map<std::uint32_t, std::size_t> client_index_;
            std::unordered_map<MessageId, GroupSet> registry_;
            std::unordered_set<MessageId> silent_;
            std::unordered_map<std::uint64_t, SimTime> channel_;
            std::vector<Event> queue_;
            std::uint64_t next_seq_ = 0;
            SimTime now_ = 0;
            RunResult result_;
        };
    }

    RunResult simulate(const Protocol &protocol, const LatencyMatrix &matrix, std::vector<ClientSpec> clients,
                       const SimConfig &cfg, const std::vector<Injection> &injections)
    {
        World world(protocol, matrix, std::move(clients), cfg);
        return world.run(injections);
    }
} // namespace amcast::simnet
