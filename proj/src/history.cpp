#include "amcast/history.hpp"

#include <algorithm>

namespace
{
    // Fresh vertices are spaced out so that reordering can usually slot a few
    // vertices into a gap instead of shifting a whole region.
    constexpr std::uint64_t kOrdStride = std::uint64_t{1} << 20;
}

namespace amcast::history
{
    std::optional<GroupSet> History::dst_of(const MessageId &id) const
    {
        auto it = vertices_.find(id);
        if (it == vertices_.end())
        {
            return std::nullopt;
        }
        return it->second.dst;
    }

    bool History::has_edge(const MessageId &from, const MessageId &to) const
    {
        auto it = vertices_.find(from);
        if (it == vertices_.end())
        {
            return false;
        }
        const auto &succs = it->second.succs;
        return std::any_of(succs.begin(), succs.end(), [&](const Succ &s) { return s.to == to; });
    }

    bool History::add_vertex(const MessageRecord &rec)
    {
        auto [it, fresh] = vertices_.try_emplace(rec.id);
        if (!fresh)
        {
            if (it->second.dst != rec.dst)
            {
                throw ProtocolError("inconsistent histories: message " + rec.id.to_string() + " seen with two destination sets");
            }
            return false;
        }
        it->second.dst = rec.dst;
        it->second.stamp = next_stamp_;
        next_ord_ += kOrdStride;
        it->second.ord = next_ord_;
        by_ord_.emplace(next_ord_, &it->second);
        log_.emplace(next_stamp_++, LogEntry{rec.id, std::nullopt});
        for (GroupId g : rec.dst)
        {
            ++addressed_[g];
        }
        return true;
    }

    void History::insert_edge(Vertex &from_v, const MessageId &from, Vertex &to_v, const MessageId &to)
    {
        from_v.succs.push_back(Succ{to, next_stamp_, &to_v});
        to_v.preds.push_back(from);
        log_.emplace(next_stamp_++, LogEntry{from, to});
        ++edge_count_;
    }

    bool History::add_edge(const MessageId &from, const MessageId &to)
    {
        auto fi = vertices_.find(from);
        auto ti = vertices_.find(to);
        if (fi == vertices_.end() || ti == vertices_.end())
        {
            throw std::invalid_argument("edge " + from.to_string() + "->" + to.to_string() + " references an unknown vertex");
        }
        if (from == to)
        {
            throw ProtocolError("inconsistent histories: self loop on " + from.to_string());
        }
        if (has_edge(from, to))
        {
            return false;
        }
        if (fi->second.ord > ti->second.ord && !reorder(fi->second, ti->second))
        {
            throw ProtocolError("inconsistent histories: edge " + from.to_string() + "->" + to.to_string() + " closes a cycle");
        }
        insert_edge(fi->second, from, ti->second, to);
        return true;
    }

    void History::append_delivery(const MessageRecord &rec)
    {
        add_vertex(rec);
        if (last_delivered_ && *last_delivered_ != rec.id)
        {
            add_edge(*last_delivered_, rec.id);
        }
        last_delivered_ = rec.id;
    }

    MergeResult History::merge(const HistoryDelta &delta)
    {
        MergeResult result;
        for (const auto &rec : delta.vertices)
        {
            if (add_vertex(rec))
            {
                result.added.push_back(rec);
            }
        }
        for (const auto &e : delta.edges)
        {
            if (!contains(e.from) || !contains(e.to))
            {
                ++result.dangling_edges;
                if (contains(e.from))
                {
                    result.stale.push_back(e.from);
                }
                continue;
            }
            add_edge(e.from, e.to);
        }
        return result;
    }

    HistoryDelta History::delta_since(std::uint64_t watermark) const
    {
        HistoryDelta out;
        for (auto it = log_.upper_bound(watermark); it != log_.end(); ++it)
        {
            const LogEntry &entry = it->second;
            if (entry.b)
            {
                out.edges.push_back(Edge{entry.a, *entry.b});
            }
            else
            {
                out.vertices.push_back(MessageRecord{entry.a, vertices_.at(entry.a).dst});
            }
        }
        return out;
    }

    History::History(const History &other)
        : vertices_(other.vertices_), log_(other.log_), addressed_(other.addressed_), edge_count_(other.edge_count_),
          next_stamp_(other.next_stamp_), next_ord_(other.next_ord_), last_delivered_(other.last_delivered_)
    {
        relink();
    }

    History &History::operator=(const History &other)
    {
        if (this != &other)
        {
            History copy(other);
            *this = std::move(copy);
        }
        return *this;
    }

    void History::relink()
    {
        by_ord_.clear();
        for (auto &[id, v] : vertices_)
        {
            by_ord_.emplace(v.ord, &v);
            for (Succ &s : v.succs)
            {
                s.target = &vertices_.at(s.to);
            }
        }
    }

    void History::set_ord(Vertex &v, std::uint64_t ord)
    {
        by_ord_.erase(v.ord);
        v.ord = ord;
        by_ord_.emplace(ord, &v);
    }

    bool History::reorder(Vertex &x, Vertex &y)
    {
        const std::uint64_t lb = y.ord, ub = x.ord;
        ++epoch_;
        // Ancestors of x ordered after y; a path y -> x would have to pass
        // through them, so this search alone decides the cycle question.
        std::vector<Vertex *> backward{&x};
        x.visited_back = epoch_;
        for (std::size_t i = 0; i < backward.size(); ++i)
        {
            for (const MessageId &p : backward[i]->preds)
            {
                Vertex &pv = vertices_.at(p);
                if (&pv == &y)
                {
                    return false;
                }
                if (pv.ord > lb && pv.visited_back != epoch_)
                {
                    pv.visited_back = epoch_;
                    backward.push_back(&pv);
                }
            }
        }
        auto by_position = [](const Vertex *a, const Vertex *b) { return a->ord < b->ord; };
        std::sort(backward.begin(), backward.end(), by_position);

        // Their other predecessors all sit below y, so the free positions
        // between y and whatever precedes it are enough.
        auto below = by_ord_.find(lb);
        const std::uint64_t lo = below == by_ord_.begin() ? 0 : std::prev(below)->first;
        const std::uint64_t step = (lb - lo) / (backward.size() + 1);
        if (step > 0)
        {
            for (std::size_t i = 0; i < backward.size(); ++i)
            {
                set_ord(*backward[i], lo + step * (i + 1));
            }
            return true;
        }

        std::vector<Vertex *> forward{&y};
        y.visited = epoch_;
        for (std::size_t i = 0; i < forward.size(); ++i)
        {
            for (Succ &s : forward[i]->succs)
            {
                if (s.target->ord < ub && s.target->visited != epoch_)
                {
                    s.target->visited = epoch_;
                    forward.push_back(s.target);
                }
            }
        }
        std::sort(forward.begin(), forward.end(), by_position);
        // Everything that reaches x now goes before everything y reaches,
        // reusing the same pool of positions.
        std::vector<std::uint64_t> pool;
        pool.reserve(forward.size() + backward.size());
        for (const auto *group : {&backward, &forward})
        {
            for (const Vertex *v : *group)
            {
                pool.push_back(v->ord);
                by_ord_.erase(v->ord);
            }
        }
        std::sort(pool.begin(), pool.end());
        std::size_t i = 0;
        for (auto *group : {&backward, &forward})
        {
            for (Vertex *v : *group)
            {
                v->ord = pool[i++];
                by_ord_.emplace(v->ord, v);
            }
        }
        return true;
    }

    bool History::has_path(const MessageId &from, const MessageId &to) const
    {
        auto fi = vertices_.find(from);
        auto ti = vertices_.find(to);
        if (fi == vertices_.end() || ti == vertices_.end() || fi->second.ord >= ti->second.ord)
        {
            return false;
        }
        // Only vertices ordered before `to` can lie on a path into it.
        const Vertex *target = &ti->second;
        ++epoch_;
        stack_.assign(1, &fi->second);
        while (!stack_.empty())
        {
            const Vertex *at = stack_.back();
            stack_.pop_back();
            for (const Succ &s : at->succs)
            {
                if (s.target == target)
                {
                    return true;
                }
                if (s.target->ord < target->ord && s.target->visited != epoch_)
                {
                    s.target->visited = epoch_;
                    stack_.push_back(s.target);
                }
            }
        }
        return false;
    }

    bool History::any_reaches(const std::unordered_set<MessageId> &open, const MessageId &target) const
    {
        auto ti = vertices_.find(target);
        if (ti == vertices_.end())
        {
            return false;
        }
        // Walk backwards: the ancestors of one message are far fewer than the
        // descendants of every open one.
        ++epoch_;
        stack_.clear();
        stack_.push_back(&ti->second);
        while (!stack_.empty())
        {
            const Vertex *at = stack_.back();
            stack_.pop_back();
            for (const MessageId &p : at->preds)
            {
                if (open.count(p))
                {
                    return true;
                }
                const Vertex &pv = vertices_.at(p);
                if (pv.visited != epoch_)
                {
                    pv.visited = epoch_;
                    stack_.push_back(&pv);
                }
            }
        }
        return false;
    }

    std::size_t History::prune_ancestors_of(const MessageId &keep,
                                            const std::function<bool(const MessageRecord &)> &retain)
    {
        return prune_closure(keep, false, retain);
    }

    std::size_t History::prune_through(const MessageId &root, const std::function<bool(const MessageRecord &)> &retain)
    {
        return prune_closure(root, true, retain);
    }

    std::size_t History::prune_closure(const MessageId &root, bool include_root,
                                       const std::function<bool(const MessageRecord &)> &retain)
    {
        if (!contains(root))
        {
            return 0;
        }
        std::unordered_set<MessageId> ancestors;
        if (include_root)
        {
            ancestors.insert(root);
        }
        std::vector<MessageId> stack{root};
        while (!stack.empty())
        {
            MessageId at = stack.back();
            stack.pop_back();
            for (const MessageId &p : vertices_.at(at).preds)
            {
                if (ancestors.insert(p).second)
                {
                    stack.push_back(p);
                }
            }
        }
        std::vector<MessageId> doomed;
        std::unordered_set<MessageId> doomed_set;
        for (const MessageId &id : ancestors)
        {
            if (id == last_delivered_)
            {
                continue;
            }
            if (!retain || !retain(MessageRecord{id, vertices_.at(id).dst}))
            {
                doomed.push_back(id);
                doomed_set.insert(id);
            }
        }
        auto drop_succ = [&](const MessageId &from, const MessageId &to) {
            auto &succs = vertices_.at(from).succs;
            for (auto it = succs.begin(); it != succs.end(); ++it)
            {
                if (it->to == to)
                {
                    log_.erase(it->stamp);
                    --edge_count_;
                    succs.erase(it);
                    return;
                }
            }
        };
        for (const MessageId &id : doomed)
        {
            Vertex &v = vertices_.at(id);
            for (const Succ &s : v.succs)
            {
                log_.erase(s.stamp);
                --edge_count_;
                if (!doomed_set.count(s.to))
                {
                    auto &preds = vertices_.at(s.to).preds;
                    preds.erase(std::remove(preds.begin(), preds.end(), id), preds.end());
                }
            }
            v.succs.clear();
            for (const MessageId &p : v.preds)
            {
                if (!doomed_set.count(p))
                {
                    drop_succ(p, id);
                }
            }
            log_.erase(v.stamp);
            for (GroupId g : v.dst)
            {
                --addressed_[g];
            }
        }
        for (const MessageId &id : doomed)
        {
            by_ord_.erase(vertices_.at(id).ord);
            vertices_.erase(id);
        }
        return doomed.size();
    }

    std::vector<MessageId> open_dependencies(const History &h, GroupId g, const std::unordered_set<MessageId> &delivered)
    {
        std::vector<MessageId> out;
        for (const auto &rec : h.records())
        {
            if (rec.dst.contains(g) && !delivered.count(rec.id))
            {
                out.push_back(rec.id);
            }
        }
        return out;
    }

    std::size_t prune_before_flush(History &h, const MessageId &flush, const std::unordered_set<MessageId> &delivered,
                                   GroupId g)
    {
        if (!h.contains(flush))
        {
            throw std::invalid_argument("unknown flush");
        }
        return h.prune_ancestors_of(flush, [&](const MessageRecord &rec) {
            return rec.dst.contains(g) && !delivered.count(rec.id);
        });
    }

    std::vector<MessageRecord> History::records() const
    {
        std::vector<MessageRecord> out;
        out.reserve(vertices_.size());
        for (const auto &[id, v] : vertices_)
        {
            out.push_back(MessageRecord{id, v.dst});
        }
        std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.id < b.id; });
        return out;
    }

    std::vector<Edge> History::edges() const
    {
        std::vector<Edge> out;
        out.reserve(edge_count_);
        for (const auto &[id, v] : vertices_)
        {
            for (const Succ &s : v.succs)
            {
                out.push_back(Edge{id, s.to});
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    const std::vector<MessageId> &History::preds(const MessageId &id) const
    {
        return vertices_.at(id).preds;
    }

    std::optional<std::string> History::check() const
    {
        if (last_delivered_ && !contains(*last_delivered_))
        {
            return "last delivered " + last_delivered_->to_string() + " is not retained";
        }
        std::unordered_map<MessageId, std::size_t> indegree;
        std::size_t edges = 0;
        for (const auto &[id, v] : vertices_)
        {
            indegree.try_emplace(id, 0);
            for (const Succ &s : v.succs)
            {
                if (!contains(s.to))
                {
                    return "edge " + id.to_string() + "->" + s.to.to_string() + " leaves the vertex set";
                }
                ++indegree[s.to];
                ++edges;
            }
        }
        if (edges != edge_count_)
        {
            return "edge count out of sync";
        }
        std::vector<MessageId> ready;
        for (const auto &[id, d] : indegree)
        {
            if (d == 0)
            {
                ready.push_back(id);
            }
        }
        std::size_t visited = 0;
        while (!ready.empty())
        {
            MessageId at = ready.back();
            ready.pop_back();
            ++visited;
            for (const Succ &s : vertices_.at(at).succs)
            {
                if (--indegree[s.to] == 0)
                {
                    ready.push_back(s.to);
                }
            }
        }
        if (visited != vertices_.size())
        {
            return "history contains a cycle";
        }
        return std::nullopt;
    }
} // namespace amcast::history
