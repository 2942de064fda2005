#include "amcast/types.hpp"

#include <charconv>

namespace amcast
{
    namespace
    {
        std::uint32_t parse_u32(std::string_view text, const std::string &whole)
        {
            std::uint32_t value = 0;
            const auto *first = text.data();
            const auto *last = text.data() + text.size();
            auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec != std::errc{} || ptr != last || text.empty())
            {
                throw std::invalid_argument("malformed number in '" + whole + "'");
            }
            return value;
        }
    }

    std::string GroupSet::to_string() const
    {
        if (empty())
        {
            return "-";
        }
        std::string out;
        for (GroupId g : *this)
        {
            if (!out.empty())
            {
                out += ',';
            }
            out += std::to_string(g);
        }
        return out;
    }

    MessageId parse_message_id(const std::string &text)
    {
        auto colon = text.find(':');
        if (colon == std::string::npos)
        {
            throw std::invalid_argument("malformed message id '" + text + "'");
        }
        std::string_view view(text);
        return MessageId{parse_u32(view.substr(0, colon), text), parse_u32(view.substr(colon + 1), text)};
    }

    GroupSet parse_group_set(const std::string &text)
    {
        GroupSet out;
        if (text == "-" || text.empty())
        {
            return out;
        }
        std::string_view view(text);
        while (!view.empty())
        {
            auto comma = view.find(',');
            out.insert(parse_u32(view.substr(0, comma), text));
            if (comma == std::string_view::npos)
            {
                break;
            }
            view.remove_prefix(comma + 1);
        }
        return out;
    }
} // namespace amcast
