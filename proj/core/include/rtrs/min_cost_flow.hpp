#pragma once

#include <cstdint>
#include <vector>

namespace rtrs {

/// Successive-shortest-path min-cost flow on integer capacities and costs.
class MinCostFlow {
public:
    explicit MinCostFlow(int nodes) : graph_(static_cast<std::size_t>(nodes)) {}

    /// Returns an edge handle usable with flow().
    int add_edge(int from, int to, std::int64_t capacity, std::int64_t cost);

    struct Result {
        std::int64_t flow = 0;
        std::int64_t cost = 0;
    };

    /// Pushes up to `limit` units from source to sink along cheapest paths.
    Result solve(int source, int sink, std::int64_t limit);

    std::int64_t flow(int edge) const;

private:
    struct Edge {
        int to;
        int rev;
        std::int64_t cap;
        std::int64_t cost;
    };
    std::vector<std::vector<Edge>> graph_;
    std::vector<std::pair<int, int>> handles_;  // (node, index)
    std::vector<std::int64_t> original_cap_;
};

}  // namespace rtrs
