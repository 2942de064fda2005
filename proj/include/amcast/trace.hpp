#pragma once

#include "amcast/protocol.hpp"
#include "amcast/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace amcast
{
    enum class EventKind
    {
        ClientSend,
        Receive,
        Send,
        Deliver,
        ClientReply,
    };

    std::string_view to_string(EventKind kind) noexcept;
    EventKind parse_event_kind(std::string_view text);

    /// A group ("g3"), a client ("c17") or nobody ("-").
    struct Endpoint
    {
        enum class Kind
        {
            None,
            Group,
            Client,
        };
        Kind kind = Kind::None;
        std::uint32_t id = 0;

        static Endpoint none() noexcept { return {}; }
        static Endpoint group(GroupId g) noexcept { return {Kind::Group, g}; }
        static Endpoint client(std::uint32_t c) noexcept { return {Kind::Client, c}; }

        bool is_group() const noexcept { return kind == Kind::Group; }
        bool is_client() const noexcept { return kind == Kind::Client; }

        friend bool operator==(const Endpoint &, const Endpoint &) = default;
        std::string to_string() const;
    };

    Endpoint parse_endpoint(const std::string &text);

    /// One line of the trace. `node` is the entity emitting the event; `peer`
    /// the other side (sender for receives, recipient for sends).
    struct TraceEvent
    {
        SimTime at = 0;
        EventKind kind = EventKind::Send;
        Endpoint node;
        Endpoint peer;
        MessageId msg;
        std::optional<PacketKind> packet;
        GroupSet dst;
        std::size_t bytes = 0;

        friend bool operator==(const TraceEvent &, const TraceEvent &) = default;
    };

    using Trace = std::vector<TraceEvent>;

    /// `at_ms kind node peer msg packet dst bytes`, e.g.
    /// `12.000 receive g2 c5 5:1 client 2,3 24`.
    std::string format_event(const TraceEvent &e);
    TraceEvent parse_event(const std::string &line);

    void write_trace(std::ostream &out, const Trace &trace);
    Trace read_trace(std::istream &in);
    Trace load_trace(const std::string &path);
    void save_trace(const std::string &path, const Trace &trace);
} // namespace amcast
