#pragma once

// Integral max-flow / min-cut (Dinic) with residual reachability queries.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cmclab {

struct FlowStats {
    std::int64_t max_flow = 0;
    std::size_t phases = 0;        // BFS level-graph rebuilds
    std::size_t augmentations = 0; // blocking-flow path pushes
    std::size_t nodes = 0;
    std::size_t arcs = 0;
};

class MaxFlow {
public:
    explicit MaxFlow(std::size_t node_count);

    // Undirected-style pair: capacity cap_ab from a to b and cap_ba from b to a.
    void add_edge(std::size_t a, std::size_t b, std::int64_t cap_ab, std::int64_t cap_ba);
    void add_source_cap(std::size_t v, std::int64_t cap);
    void add_sink_cap(std::size_t v, std::int64_t cap);

    FlowStats solve();

    // Node sets in the residual network after solve(). Both exclude the terminals.
    std::vector<bool> source_reachable() const;
    std::vector<bool> reaches_sink() const;

private:
    struct Arc {
        std::size_t to;
        std::int64_t cap;
    };

    void add_arc(std::size_t a, std::size_t b, std::int64_t cap_ab, std::int64_t cap_ba);
    bool build_levels();
    std::int64_t push(std::size_t v, std::int64_t limit);
    void finalize();

    std::size_t n_;
    std::size_t source_;
    std::size_t sink_;
    // Arcs are stored in pairs; arc i and i^1 are mutual reverses.
    std::vector<Arc> arcs_;
    std::vector<std::vector<std::size_t>> pending_;
    std::vector<std::size_t> first_;
    std::vector<std::size_t> adj_;
    std::vector<std::size_t> cursor_;
    std::vector<int> level_;
    std::vector<std::int64_t> source_caps_;
    std::vector<std::int64_t> sink_caps_;
    FlowStats stats_;
    bool finalized_ = false;
};

} // namespace cmclab
