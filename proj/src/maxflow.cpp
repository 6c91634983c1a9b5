#include "cmclab/maxflow.hpp"

#include "cmclab/errors.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace cmclab {

MaxFlow::MaxFlow(std::size_t node_count)
    : n_(node_count + 2),
      source_(node_count),
      sink_(node_count + 1),
      pending_(node_count + 2),
      source_caps_(node_count, 0),
      sink_caps_(node_count, 0)
{
}

void MaxFlow::add_arc(std::size_t a, std::size_t b, std::int64_t cap_ab, std::int64_t cap_ba)
{
    pending_[a].push_back(arcs_.size());
    arcs_.push_back({b, cap_ab});
    pending_[b].push_back(arcs_.size());
    arcs_.push_back({a, cap_ba});
}

void MaxFlow::add_edge(std::size_t a, std::size_t b, std::int64_t cap_ab, std::int64_t cap_ba)
{
    if (finalized_) throw UsageError("MaxFlow: edges added after solve()");
    if (cap_ab < 0 || cap_ba < 0) throw UsageError("MaxFlow: negative capacity");
    if (cap_ab == 0 && cap_ba == 0) return;
    add_arc(a, b, cap_ab, cap_ba);
}

void MaxFlow::add_source_cap(std::size_t v, std::int64_t cap)
{
    source_caps_.at(v) += cap;
}

void MaxFlow::add_sink_cap(std::size_t v, std::int64_t cap)
{
    sink_caps_.at(v) += cap;
}

void MaxFlow::finalize()
{
    for (std::size_t v = 0; v < source_caps_.size(); ++v) {
        // Flow through s->v->t is saturated up front; only the excess enters the network.
        const std::int64_t common = std::min(source_caps_[v], sink_caps_[v]);
        stats_.max_flow += common;
        if (source_caps_[v] > common) add_arc(source_, v, source_caps_[v] - common, 0);
        if (sink_caps_[v] > common) add_arc(v, sink_, sink_caps_[v] - common, 0);
    }
    first_.assign(n_ + 1, 0);
    for (std::size_t v = 0; v < n_; ++v) first_[v + 1] = first_[v] + pending_[v].size();
    adj_.clear();
    adj_.reserve(arcs_.size());
    for (auto& list : pending_) adj_.insert(adj_.end(), list.begin(), list.end());
    pending_.clear();
    pending_.shrink_to_fit();
    stats_.nodes = n_;
    stats_.arcs = arcs_.size();
    finalized_ = true;
}

bool MaxFlow::build_levels()
{
    level_.assign(n_, -1);
    std::queue<std::size_t> queue;
    level_[source_] = 0;
    queue.push(source_);
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop();
        for (std::size_t k = first_[v]; k < first_[v + 1]; ++k) {
            const Arc& arc = arcs_[adj_[k]];
            if (arc.cap > 0 && level_[arc.to] < 0) {
                level_[arc.to] = level_[v] + 1;
                queue.push(arc.to);
            }
        }
    }
    return level_[sink_] >= 0;
}

std::int64_t MaxFlow::push(std::size_t v, std::int64_t limit)
{
    if (v == sink_) return limit;
    for (std::size_t& k = cursor_[v]; k < first_[v + 1]; ++k) {
        const std::size_t id = adj_[k];
        Arc& arc = arcs_[id];
        if (arc.cap <= 0 || level_[arc.to] != level_[v] + 1) continue;
        const std::int64_t pushed = push(arc.to, std::min(limit, arc.cap));
        if (pushed > 0) {
            arc.cap -= pushed;
            arcs_[id ^ 1].cap += pushed;
            return pushed;
        }
    }
    return 0;
}

FlowStats MaxFlow::solve()
{
    if (!finalized_) finalize();
    constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
    while (build_levels()) {
        ++stats_.phases;
        cursor_.assign(first_.begin(), first_.end() - 1);
        while (const std::int64_t f = push(source_, kInf)) {
            stats_.max_flow += f;
            ++stats_.augmentations;
        }
    }
    return stats_;
}

std::vector<bool> MaxFlow::source_reachable() const
{
    std::vector<bool> seen(n_, false);
    std::vector<std::size_t> stack{source_};
    seen[source_] = true;
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t k = first_[v]; k < first_[v + 1]; ++k) {
            const Arc& arc = arcs_[adj_[k]];
            if (arc.cap > 0 && !seen[arc.to]) {
                seen[arc.to] = true;
                stack.push_back(arc.to);
            }
        }
    }
    seen.resize(n_ - 2);
    return seen;
}

std::vector<bool> MaxFlow::reaches_sink() const
{
    // v reaches the sink iff some arc v->w with residual capacity leads to a node that does.
    // Walk backwards: from w, follow the reverse of each arc and test the forward residual.
    std::vector<bool> seen(n_, false);
    std::vector<std::size_t> stack{sink_};
    seen[sink_] = true;
    while (!stack.empty()) {
        const std::size_t w = stack.back();
        stack.pop_back();
        for (std::size_t k = first_[w]; k < first_[w + 1]; ++k) {
            const std::size_t id = adj_[k];
            const std::size_t v = arcs_[id].to;
            if (!seen[v] && arcs_[id ^ 1].cap > 0) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    seen.resize(n_ - 2);
    return seen;
}

} // namespace cmclab
