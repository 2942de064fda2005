#include "amcast/history.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace amcast;
using namespace amcast::history;

namespace
{
    MessageRecord rec(std::uint32_t seq, GroupSet dst) { return {MessageId{0, seq}, dst}; }
    MessageId id(std::uint32_t seq) { return MessageId{0, seq}; }
}

TEST_SUITE("history")
{
    TEST_CASE("deliveries chain after each other")
    {
        History h;
        hst_add(h, rec(1, {0, 1}));
        hst_add(h, rec(2, {0}));
        hst_add(h, rec(3, {0, 2}));
        CHECK(h.vertex_count() == 3);
        CHECK(h.edge_count() == 2);
        CHECK(h.has_edge(id(1), id(2)));
        CHECK(h.has_edge(id(2), id(3)));
        CHECK_FALSE(h.has_edge(id(1), id(3)));
        CHECK(depend(h, id(3), id(1)));
        CHECK_FALSE(depend(h, id(1), id(3)));
        CHECK(h.last_delivered() == id(3));
        CHECK(h.serialized_size() == 24 + 16 * 3 + 16 * 2);
    }

    TEST_CASE("re-adding a known message as a delivery only links it")
    {
        History h;
        h.add_vertex(rec(1, {0, 1}));
        hst_add(h, rec(2, {0}));
        hst_add(h, rec(1, {0, 1}));
        CHECK(h.vertex_count() == 2);
        CHECK(h.has_edge(id(2), id(1)));
    }

    TEST_CASE("diff ships only what the receiver has not seen")
    {
        History h;
        Watermark to_d;
        hst_add(h, rec(1, {0, 1}));
        auto first = diff_hst(h, to_d);
        CHECK(first.vertices.size() == 1);
        CHECK(first.edges.empty());
        CHECK(first.serialized_size() == 40);

        CHECK(diff_hst(h, to_d).empty());
        CHECK(diff_hst(h, to_d).serialized_size() == 24);

        hst_add(h, rec(2, {0, 2}));
        auto second = diff_hst(h, to_d);
        REQUIRE(second.vertices.size() == 1);
        CHECK(second.vertices[0].id == id(2));
        REQUIRE(second.edges.size() == 1);
        CHECK(second.edges[0] == Edge{id(1), id(2)});

        // Another receiver starts from scratch.
        Watermark to_e;
        auto full = diff_hst(h, to_e);
        CHECK(full.vertices.size() == 2);
        CHECK(full.edges.size() == 1);
    }

    TEST_CASE("merging deltas reconstructs the sender's graph")
    {
        History a;
        hst_add(a, rec(1, {0, 1}));
        hst_add(a, rec(2, {0, 2}));
        hst_add(a, rec(3, {0, 1, 2}));
        History b;
        hst_add(b, rec(7, {1}));
        auto r = update_hst(b, a.full());
        CHECK(r.added.size() == 3);
        CHECK(r.dangling_edges == 0);
        CHECK(b.vertex_count() == 4);
        CHECK(b.has_path(id(1), id(3)));
        CHECK(b.last_delivered() == id(7)); // merges leave the local tail alone
        auto again = update_hst(b, a.full());
        CHECK(again.added.empty());
        CHECK(b.edge_count() == 2);
    }

    TEST_CASE("contains_msg_to counts retained destinations")
    {
        History h;
        CHECK_FALSE(contains_msg_to(h, 2));
        hst_add(h, rec(1, {0, 2}));
        CHECK(contains_msg_to(h, 2));
        CHECK(h.addressed_to(0) == 1);
        hst_add(h, rec(2, {0}));
        CHECK(h.addressed_to(0) == 2);
        h.prune_ancestors_of(id(2));
        CHECK_FALSE(contains_msg_to(h, 2));
        CHECK(h.addressed_to(0) == 1);
    }

    TEST_CASE("an edge closing a cycle is rejected")
    {
        History h;
        hst_add(h, rec(1, {0}));
        hst_add(h, rec(2, {0}));
        hst_add(h, rec(3, {0}));
        CHECK_THROWS_AS(h.add_edge(id(3), id(1)), ProtocolError);
        CHECK_THROWS_AS(h.add_edge(id(2), id(2)), ProtocolError);
        CHECK_THROWS_AS(h.add_edge(id(1), id(9)), std::invalid_argument);
        CHECK_FALSE(h.check().has_value());
    }

    TEST_CASE("open dependencies are undelivered records addressed here")
    {
        History h;
        hst_add(h, rec(1, {0, 1}));
        h.add_vertex(rec(2, {1, 2}));
        h.add_vertex(rec(3, {2}));
        std::unordered_set<MessageId> delivered{id(1)};
        CHECK(open_dependencies(h, 1, delivered) == std::vector<MessageId>{id(2)});
        CHECK(open_dependencies(h, 2, delivered) == std::vector<MessageId>{id(2), id(3)});
        CHECK(open_dependencies(h, 0, delivered).empty());
    }

    TEST_CASE("any_reaches looks for a path from an open message")
    {
        History h;
        hst_add(h, rec(1, {0, 1}));
        hst_add(h, rec(2, {0, 1}));
        h.add_vertex(rec(5, {1}));
        std::unordered_set<MessageId> open{id(1), id(2)};
        CHECK(h.any_reaches(open, id(2)));
        CHECK_FALSE(h.any_reaches({id(2)}, id(2)));
        CHECK_FALSE(h.any_reaches({id(5)}, id(2)));
        CHECK_FALSE(h.any_reaches({id(9)}, id(2)));
    }

    TEST_CASE("flush pruning drops its ancestors but keeps open records")
    {
        History h;
        hst_add(h, rec(1, {0, 1}));
        h.add_vertex(rec(2, {0, 1}));
        h.add_edge(id(1), id(2));
        const MessageRecord flush{MessageId{kFlushClient, 1}, GroupSet::all(2)};
        hst_add(h, flush);
        h.add_edge(id(2), flush.id);
        h.add_vertex(rec(4, {1}));
        h.add_edge(flush.id, id(4));

        std::unordered_set<MessageId> delivered_at_0{id(1), id(2), flush.id};
        History at0 = h;
        CHECK(prune_before_flush(at0, flush.id, delivered_at_0, 0) == 2);
        CHECK(at0.vertex_count() == 2);
        CHECK(at0.contains(flush.id));
        CHECK(at0.contains(id(4)));
        CHECK(at0.has_path(flush.id, id(4)));
        CHECK_FALSE(at0.check().has_value());

        // m2 is addressed to group 1 and not yet delivered there: it survives.
        std::unordered_set<MessageId> delivered_at_1{id(1), flush.id};
        History at1 = h;
        CHECK(prune_before_flush(at1, flush.id, delivered_at_1, 1) == 1);
        CHECK(at1.contains(id(2)));
        CHECK(at1.has_edge(id(2), flush.id));

        CHECK_THROWS_WITH_AS(prune_before_flush(h, MessageId{kFlushClient, 9}, delivered_at_0, 0), "unknown flush",
                             std::invalid_argument);
    }

    TEST_CASE("edges into pruned vertices are skipped and reported stale")
    {
        History sender;
        hst_add(sender, rec(1, {0, 1}));
        hst_add(sender, rec(2, {0, 1}));
        History receiver;
        receiver.merge(sender.full());
        receiver.prune_ancestors_of(id(2));
        REQUIRE_FALSE(receiver.contains(id(1)));

        HistoryDelta late;
        late.vertices = {rec(0, {0})};
        late.edges = {Edge{id(0), id(1)}};
        auto r = receiver.merge(late);
        CHECK(r.dangling_edges == 1);
        REQUIRE(r.stale.size() == 1);
        CHECK(r.stale[0] == id(0));
        CHECK(receiver.prune_through(id(0), {}) == 1);
        CHECK_FALSE(receiver.contains(id(0)));
    }

    TEST_CASE("copies are independent")
    {
        History a;
        hst_add(a, rec(1, {0}));
        hst_add(a, rec(2, {0}));
        History b = a;
        hst_add(b, rec(3, {0}));
        CHECK(a.vertex_count() == 2);
        CHECK(b.has_path(id(1), id(3)));
        a = History{};
        CHECK(b.has_path(id(1), id(3)));
        CHECK_FALSE(b.check().has_value());
    }

    TEST_CASE("depend agrees with a transitive closure on random DAGs")
    {
        // Independent oracle: Floyd-Warshall closure over the same edge list.
        std::mt19937_64 rng(42);
        for (int round = 0; round < 300; ++round)
        {
            const std::size_t n = 2 + rng() % 7;
            std::vector<std::uint32_t> order(n);
            for (std::size_t i = 0; i < n; ++i)
            {
                order[i] = static_cast<std::uint32_t>(i + 1);
            }
            std::shuffle(order.begin(), order.end(), rng);
            History h;
            for (auto v : order)
            {
                h.add_vertex(rec(v, {0}));
            }
            std::vector<std::vector<bool>> reach(n + 1, std::vector<bool>(n + 1, false));
            for (std::size_t i = 0; i < n; ++i)
            {
                for (std::size_t j = i + 1; j < n; ++j)
                {
                    if (rng() % 3 == 0)
                    {
                        h.add_edge(id(order[i]), id(order[j]));
                        reach[order[i]][order[j]] = true;
                    }
                }
            }
            for (std::size_t k = 1; k <= n; ++k)
                for (std::size_t i = 1; i <= n; ++i)
                    for (std::size_t j = 1; j <= n; ++j)
                        if (reach[i][k] && reach[k][j])
                            reach[i][j] = true;
            for (std::uint32_t a = 1; a <= n; ++a)
            {
                for (std::uint32_t b = 1; b <= n; ++b)
                {
                    CHECK(depend(h, id(b), id(a)) == reach[a][b]);
                }
            }
        }
    }

    TEST_CASE("edges against arrival order: reachability and cycle rejection")
    {
        // Vertices arrive in id order while edges follow a hidden random order,
        // so most insertions have to reorder. Oracle: closure recomputed from
        // the accepted edges after every insertion.
        std::mt19937_64 rng(7);
        for (int round = 0; round < 200; ++round)
        {
            const std::size_t n = 3 + rng() % 10;
            History h;
            for (std::uint32_t v = 1; v <= n; ++v)
            {
                h.add_vertex(rec(v, {0}));
            }
            std::vector<std::vector<bool>> adj(n + 1, std::vector<bool>(n + 1, false));
            auto closure = [&] {
                auto reach = adj;
                for (std::size_t k = 1; k <= n; ++k)
                    for (std::size_t i = 1; i <= n; ++i)
                        for (std::size_t j = 1; j <= n; ++j)
                            if (reach[i][k] && reach[k][j])
                                reach[i][j] = true;
                return reach;
            };
            for (int attempt = 0; attempt < 3 * static_cast<int>(n); ++attempt)
            {
                const auto a = static_cast<std::uint32_t>(1 + rng() % n);
                const auto b = static_cast<std::uint32_t>(1 + rng() % n);
                if (a == b || adj[a][b])
                {
                    continue;
                }
                const bool closes_cycle = closure()[b][a];
                CAPTURE(round);
                CAPTURE(a);
                CAPTURE(b);
                if (closes_cycle)
                {
                    CHECK_THROWS_AS(h.add_edge(id(a), id(b)), ProtocolError);
                }
                else
                {
                    CHECK(h.add_edge(id(a), id(b)));
                    adj[a][b] = true;
                }
            }
            const auto reach = closure();
            for (std::uint32_t a = 1; a <= n; ++a)
            {
                for (std::uint32_t b = 1; b <= n; ++b)
                {
                    CHECK(h.has_path(id(a), id(b)) == reach[a][b]);
                }
            }
            CHECK_FALSE(h.check().has_value());
        }
    }

    TEST_CASE("a long chain built backwards exhausts the gaps and stays ordered")
    {
        // Each edge k -> k-1 pushes k below the previous one, halving the free
        // positions until whole regions have to be reshuffled.
        History h;
        const std::uint32_t n = 64;
        for (std::uint32_t v = 1; v <= n; ++v)
        {
            h.add_vertex(rec(v, {0}));
        }
        for (std::uint32_t k = 2; k <= n; ++k)
        {
            REQUIRE(h.add_edge(id(k), id(k - 1)));
        }
        for (std::uint32_t a = 1; a <= n; ++a)
        {
            for (std::uint32_t b = 1; b <= n; ++b)
            {
                CHECK(h.has_path(id(a), id(b)) == (a > b));
            }
        }
        CHECK_THROWS_AS(h.add_edge(id(1), id(n)), ProtocolError);
        CHECK(h.add_edge(id(n), id(1)) == true); // a shortcut, not a cycle
        History copy = h;
        CHECK(copy.has_path(id(n), id(2)));
        CHECK_THROWS_AS(copy.add_edge(id(3), id(40)), ProtocolError);
    }
}
