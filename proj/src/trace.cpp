#include "amcast/trace.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace amcast
{
    namespace
    {
        constexpr std::array<std::string_view, 6> kPacketNames{"client", "msg", "ack", "notif", "forward", "timestamp"};
        constexpr std::array<std::string_view, 5> kEventNames{"client_send", "receive", "send", "deliver", "client_reply"};

        std::string format_ms(SimTime t)
        {
            char buf[32];
            const char *sign = t < 0 ? "-" : "";
            const long long a = t < 0 ? -t : t;
            std::snprintf(buf, sizeof buf, "%s%lld.%03lld", sign, a / 1000, a % 1000);
            return buf;
        }

        SimTime parse_ms(const std::string &text)
        {
            bool negative = !text.empty() && text.front() == '-';
            std::string body = negative ? text.substr(1) : text;
            auto dot = body.find('.');
            std::string whole = body.substr(0, dot);
            std::string frac = dot == std::string::npos ? "" : body.substr(dot + 1);
            if (whole.empty() || frac.size() > 3)
            {
                throw std::invalid_argument("malformed trace time '" + text + "'");
            }
            frac.resize(3, '0');
            long long w = 0;
            long long f = 0;
            auto ok = [](const std::string &s, long long &v) {
                auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
                return ec == std::errc{} && p == s.data() + s.size();
            };
            if (!ok(whole, w) || !ok(frac, f))
            {
                throw std::invalid_argument("malformed trace time '" + text + "'");
            }
            SimTime t = w * 1000 + f;
            return negative ? -t : t;
        }
    }

    std::string_view to_string(PacketKind kind) noexcept
    {
        return kPacketNames[static_cast<std::size_t>(kind)];
    }

    PacketKind parse_packet_kind(std::string_view text)
    {
        for (std::size_t i = 0; i < kPacketNames.size(); ++i)
        {
            if (kPacketNames[i] == text)
            {
                return static_cast<PacketKind>(i);
            }
        }
        throw std::invalid_argument("unknown packet kind '" + std::string(text) + "'");
    }

    std::string_view to_string(EventKind kind) noexcept
    {
        return kEventNames[static_cast<std::size_t>(kind)];
    }

    EventKind parse_event_kind(std::string_view text)
    {
        for (std::size_t i = 0; i < kEventNames.size(); ++i)
        {
            if (kEventNames[i] == text)
            {
                return static_cast<EventKind>(i);
            }
        }
        throw std::invalid_argument("unknown event kind '" + std::string(text) + "'");
    }

    std::string Endpoint::to_string() const
    {
        switch (kind)
        {
        case Kind::Group:
            return "g" + std::to_string(id);
        case Kind::Client:
            return "c" + std::to_string(id);
        default:
            return "-";
        }
    }

    Endpoint parse_endpoint(const std::string &text)
    {
        if (text == "-")
        {
            return Endpoint::none();
        }
        if (text.size() < 2 || (text[0] != 'g' && text[0] != 'c'))
        {
            throw std::invalid_argument("malformed endpoint '" + text + "'");
        }
        std::uint32_t id = 0;
        auto [p, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), id);
        if (ec != std::errc{} || p != text.data() + text.size())
        {
            throw std::invalid_argument("malformed endpoint '" + text + "'");
        }
        return text[0] == 'g' ? Endpoint::group(id) : Endpoint::client(id);
    }

    std::string format_event(const TraceEvent &e)
    {
        std::string line = format_ms(e.at);
        line += ' ';
        line += to_string(e.kind);
        line += ' ';
        line += e.node.to_string();
        line += ' ';
        line += e.peer.to_string();
        line += ' ';
        line += e.msg.to_string();
        line += ' ';
        line += e.packet ? std::string(to_string(*e.packet)) : std::string("-");
        line += ' ';
        line += e.dst.to_string();
        line += ' ';
        line += std::to_string(e.bytes);
        return line;
    }

    TraceEvent parse_event(const std::string &line)
    {
        std::istringstream in(line);
        std::string at, kind, node, peer, msg, packet, dst, bytes;
        if (!(in >> at >> kind >> node >> peer >> msg >> packet >> dst >> bytes))
        {
            throw std::invalid_argument("malformed trace line '" + line + "'");
        }
        std::string extra;
        if (in >> extra)
        {
            throw std::invalid_argument("trailing fields in trace line '" + line + "'");
        }
        TraceEvent e;
        e.at = parse_ms(at);
        e.kind = parse_event_kind(kind);
        e.node = parse_endpoint(node);
        e.peer = parse_endpoint(peer);
        e.msg = parse_message_id(msg);
        if (packet != "-")
        {
            e.packet = parse_packet_kind(packet);
        }
        e.dst = parse_group_set(dst);
        std::size_t b = 0;
        auto [p, ec] = std::from_chars(bytes.data(), bytes.data() + bytes.size(), b);
        if (ec != std::errc{} || p != bytes.data() + bytes.size())
        {
            throw std::invalid_argument("malformed byte count in '" + line + "'");
        }
        e.bytes = b;
        return e;
    }

    void write_trace(std::ostream &out, const Trace &trace)
    {
        for (const auto &e : trace)
        {
            out << format_event(e) << '\n';
        }
    }

    Trace read_trace(std::istream &in)
    {
        Trace trace;
        std::string line;
        while (std::getline(in, line))
        {
            if (line.empty() || line.front() == '#')
            {
                continue;
            }
            trace.push_back(parse_event(line));
        }
        return trace;
    }

    Trace load_trace(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw std::invalid_argument("cannot open trace '" + path + "'");
        }
        return read_trace(in);
    }

    void save_trace(const std::string &path, const Trace &trace)
    {
        std::ofstream out(path);
        if (!out)
        {
            throw std::invalid_argument("cannot write trace '" + path + "'");
        }
        write_trace(out, trace);
    }
} // namespace amcast
