#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace amcast
{
    /// Group rank in a C-DAG, or node index in a tree overlay.
    using GroupId = std::uint32_t;

    /// Simulated time in microseconds.
    using SimTime = std::int64_t;

    inline constexpr std::size_t kMaxGroups = 64;

    inline constexpr SimTime from_ms(double ms) noexcept
    {
        return static_cast<SimTime>(ms * 1000.0 + (ms >= 0 ? 0.5 : -0.5));
    }
    inline constexpr double to_ms(SimTime t) noexcept { return static_cast<double>(t) / 1000.0; }

    /// Raised when a protocol handler observes a state that a correct run never produces.
    class ProtocolError : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };

    /// Set of groups, stored as a bitmap (at most kMaxGroups groups).
    class GroupSet
    {
    public:
        constexpr GroupSet() noexcept = default;
        constexpr explicit GroupSet(std::uint64_t bits) noexcept : bits_(bits) {}
        GroupSet(std::initializer_list<GroupId> groups)
        {
            for (GroupId g : groups)
            {
                insert(g);
            }
        }

        static constexpr GroupSet all(std::size_t n) noexcept
        {
            return GroupSet(n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
        }
        /// Every rank strictly below g.
        static constexpr GroupSet below(GroupId g) noexcept { return all(g); }
        /// Every rank strictly above g among n groups.
        static constexpr GroupSet above(GroupId g, std::size_t n) noexcept
        {
            return GroupSet(all(n).bits_ & ~all(g + 1).bits_);
        }

        constexpr bool contains(GroupId g) const noexcept { return g < 64 && ((bits_ >> g) & 1U) != 0; }
        void insert(GroupId g)
        {
            if (g >= kMaxGroups)
            {
                throw std::out_of_range("group id " + std::to_string(g) + " exceeds the 64-group limit");
            }
            bits_ |= std::uint64_t{1} << g;
        }
        constexpr void erase(GroupId g) noexcept
        {
            if (g < 64)
            {
                bits_ &= ~(std::uint64_t{1} << g);
            }
        }

        constexpr bool empty() const noexcept { return bits_ == 0; }
        constexpr std::size_t size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }
        constexpr std::uint64_t bits() const noexcept { return bits_; }

        /// Lowest member; undefined for an empty set.
        constexpr GroupId min() const noexcept { return static_cast<GroupId>(std::countr_zero(bits_)); }
        constexpr GroupId max() const noexcept { return static_cast<GroupId>(63 - std::countl_zero(bits_)); }

        constexpr bool is_subset_of(GroupSet other) const noexcept { return (bits_ & ~other.bits_) == 0; }
        constexpr bool intersects(GroupSet other) const noexcept { return (bits_ & other.bits_) != 0; }

        friend constexpr GroupSet operator|(GroupSet a, GroupSet b) noexcept { return GroupSet(a.bits_ | b.bits_); }
        friend constexpr GroupSet operator&(GroupSet a, GroupSet b) noexcept { return GroupSet(a.bits_ & b.bits_); }
        friend constexpr GroupSet operator-(GroupSet a, GroupSet b) noexcept { return GroupSet(a.bits_ & ~b.bits_); }
        GroupSet &operator|=(GroupSet o) noexcept
        {
            bits_ |= o.bits_;
            return *this;
        }
        friend constexpr bool operator==(GroupSet, GroupSet) noexcept = default;

        class iterator
        {
        public:
            using value_type = GroupId;
            using difference_type = std::ptrdiff_t;

            constexpr iterator() noexcept = default;
            constexpr explicit iterator(std::uint64_t rest) noexcept : rest_(rest) {}
            constexpr GroupId operator*() const noexcept { return static_cast<GroupId>(std::countr_zero(rest_)); }
            constexpr iterator &operator++() noexcept
            {
                rest_ &= rest_ - 1;
                return *this;
            }
            constexpr iterator operator++(int) noexcept
            {
                iterator old = *this;
                ++*this;
                return old;
            }
            friend constexpr bool operator==(iterator, iterator) noexcept = default;

        private:
            std::uint64_t rest_ = 0;
        };

        constexpr iterator begin() const noexcept { return iterator(bits_); }
        constexpr iterator end() const noexcept { return iterator(0); }

        std::vector<GroupId> to_vector() const { return {begin(), end()}; }
        std::string to_string() const;

    private:
        std::uint64_t bits_ = 0;
    };

    /// Globally unique multicast identifier: (client, per-client sequence number).
    struct MessageId
    {
        std::uint32_t client = 0;
        std::uint32_t seq = 0;

        friend constexpr auto operator<=>(const MessageId &, const MessageId &) noexcept = default;

        std::string to_string() const { return std::to_string(client) + ":" + std::to_string(seq); }
    };

    /// Client id reserved for the periodic flush multicast.
    inline constexpr std::uint32_t kFlushClient = 0xFFFFFFFFU;

    inline constexpr bool is_flush(const MessageId &id) noexcept { return id.client == kFlushClient; }

    /// A history vertex: message id plus destination set.
    struct MessageRecord
    {
        MessageId id;
        GroupSet dst;

        friend bool operator==(const MessageRecord &, const MessageRecord &) = default;
    };

    /// Parses "a:b" into a MessageId.
    MessageId parse_message_id(const std::string &text);
    /// Parses "0,3,5" (or "-" for empty) into a GroupSet.
    GroupSet parse_group_set(const std::string &text);
} // namespace amcast

template <>
struct std::hash<amcast::MessageId>
{
    std::size_t operator()(const amcast::MessageId &id) const noexcept
    {
        return std::hash<std::uint64_t>{}((std::uint64_t{id.client} << 32) | id.seq);
    }
};
