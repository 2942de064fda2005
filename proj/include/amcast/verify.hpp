#pragma once

#include "amcast/trace.hpp"

#include <map>
#include <string>
#include <vector>

namespace amcast::verify
{
    struct Report
    {
        std::string check;
        std::vector<std::string> violations;

        bool ok() const noexcept { return violations.empty(); }
        /// "check: ok" or "check: N violation(s), first: ...".
        std::string summary() const;
    };

    /// Multicasts and per-group delivery sequences extracted from a trace.
    struct DeliveryView
    {
        std::map<MessageId, GroupSet> multicasts; // from client sends
        std::map<GroupId, std::vector<MessageId>> delivered; // per group, in order
        std::map<MessageId, SimTime> issued_at;

        static DeliveryView from(const Trace &trace);
    };

    /// Every multicast is delivered exactly once at each destination and nowhere else.
    Report check_validity_agreement_integrity(const Trace &trace);

    struct PrefixReport : Report
    {
        /// For each contradicting pair: the lowest common destination of the two
        /// messages and whether it sided with the first or second group.
        std::vector<GroupId> lcds;
        /// Groups that ordered a witness pair differently from its lcd.
        std::size_t lcd_disagreements = 0;
    };

    /// Any two messages are delivered in the same relative order at every common destination.
    PrefixReport check_prefix_order(const Trace &trace);

    struct AcyclicReport : Report
    {
        /// m1 -> m2 -> ... -> m1 when a cycle exists.
        std::vector<MessageId> cycle;
    };

    /// The union of all per-group delivery orders is acyclic.
    AcyclicReport check_acyclic_order(const Trace &trace);

    /// Which earlier communication justifies a NOTIF from g to h.
    enum class NotifRule
    {
        /// Some earlier multicast was addressed to h (g may have learned it from others).
        Learned,
        /// Some earlier multicast was addressed to both g and h.
        Shared,
    };

    struct MinimalityReport : Report
    {
        std::size_t ordering_outside_dst = 0; // MSG/ACK/forward/timestamp touching a non-destination
        std::size_t notifs = 0;
        std::size_t notif_unjustified = 0;        // under the chosen rule
        std::size_t notif_without_shared_dst = 0; // under NotifRule::Shared, always counted
        std::map<GroupId, std::size_t> relays;    // non-destination payload receptions per group
    };

    MinimalityReport check_minimality(const Trace &trace, NotifRule rule = NotifRule::Learned);

    /// 1 - delivered/received over payload packets (client submissions, MSG,
    /// forwards) received by group g; 0 when g received none.
    double overhead(const Trace &trace, GroupId g);
    std::vector<double> overheads(const Trace &trace, std::size_t n_groups);

    /// Runs every checker. Minimality is informational when `genuine` is false.
    struct Verdict
    {
        Report safety;
        PrefixReport prefix;
        AcyclicReport acyclic;
        MinimalityReport minimality;
        bool genuine_expected = true;

        bool ok() const noexcept
        {
            return safety.ok() && prefix.ok() && acyclic.ok() && (!genuine_expected || minimality.ok());
        }
        std::vector<std::string> lines() const;
    };

    Verdict verify_all(const Trace &trace, bool genuine_expected, bool forbid_notifs = false);
} // namespace amcast::verify
