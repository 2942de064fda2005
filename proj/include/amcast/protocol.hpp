#pragma once

#include "amcast/history.hpp"
#include "amcast/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace amcast
{
    enum class PacketKind
    {
        Client,    // client submission to its entry group
        Msg,       // FlexCast: lca -> other destinations
        Ack,       // FlexCast: lower destination (or notified group) -> higher destinations
        Notif,     // FlexCast: history solicitation to a non-destination
        Forward,   // Skeen entry -> other destinations; hierarchical parent -> child
        Timestamp, // Skeen local timestamp exchange
    };

    std::string_view to_string(PacketKind kind) noexcept;
    PacketKind parse_packet_kind(std::string_view text);

    /// Packets that carry the multicast payload, for overhead accounting.
    constexpr bool is_payload(PacketKind kind) noexcept
    {
        return kind == PacketKind::Client || kind == PacketKind::Msg || kind == PacketKind::Forward;
    }

    /// One NOTIF: `by` asked `to` for its history about a message. `seq` is a
    /// counter local to `by`, so a group notified twice holds two tokens.
    struct NotifToken
    {
        GroupId by = 0;
        std::uint64_t seq = 0;
        GroupId to = 0;

        auto operator<=>(const NotifToken &) const = default;
    };

    struct Packet
    {
        PacketKind kind = PacketKind::Client;
        MessageRecord msg;
        history::HistoryDelta history;
        std::vector<NotifToken> notif_list; // sorted, unique
        /// On a NOTIF, the notification itself; on an ACK from a notified group,
        /// the notification it answers.
        std::optional<NotifToken> token;
        std::optional<std::uint64_t> timestamp;

        /// Byte model: history envelope, 8 bytes for a logical timestamp and 8 per
        /// notification token. Payloads are empty.
        std::size_t bytes() const noexcept
        {
            return history.serialized_size() + (timestamp ? 8 : 0) + 8 * (notif_list.size() + (token ? 1 : 0));
        }
    };

    struct Outbound
    {
        GroupId to;
        Packet packet;
    };

    /// Result of one handler invocation. Deliveries happen before the sends in
    /// the same transition are put on the wire.
    struct Transition
    {
        std::vector<Outbound> sends;
        std::vector<MessageId> delivered;
    };

    /// One group's protocol state machine. Handlers run one event at a time.
    class GroupNode
    {
    public:
        virtual ~GroupNode() = default;

        virtual Transition on_client(const MessageRecord &msg) = 0;
        virtual Transition on_packet(GroupId from, const Packet &packet) = 0;

        /// Retained history size in bytes (zero for protocols without histories).
        virtual std::size_t retained_history() const { return 0; }
    };

    class Protocol
    {
    public:
        virtual ~Protocol() = default;

        virtual std::string_view name() const noexcept = 0;
        /// Genuine protocols involve only a message's destinations.
        virtual bool genuine() const noexcept = 0;
        virtual bool uses_flush() const noexcept { return false; }
        virtual std::size_t group_count() const noexcept = 0;

        /// Group a client at `home` submits to; `distance` is the home row of the
        /// latency matrix.
        virtual GroupId entry_group(GroupSet dst, GroupId home, const std::vector<SimTime> &distance) const = 0;

        virtual std::unique_ptr<GroupNode> make_node(GroupId g) const = 0;
    };
} // namespace amcast
