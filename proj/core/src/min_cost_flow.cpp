#include "rtrs/min_cost_flow.hpp"

#include <algorithm>
#include <limits>

namespace rtrs {

int MinCostFlow::add_edge(int from, int to, std::int64_t capacity, std::int64_t cost) {
    auto &out = graph_[static_cast<std::size_t>(from)];
    auto &in = graph_[static_cast<std::size_t>(to)];
    out.push_back({to, static_cast<int>(in.size()) + (from == to ? 1 : 0), capacity, cost});
    in.push_back({from, static_cast<int>(out.size()) - 1, 0, -cost});
    handles_.emplace_back(from, static_cast<int>(out.size()) - 1);
    original_cap_.push_back(capacity);
    return static_cast<int>(handles_.size()) - 1;
}

MinCostFlow::Result MinCostFlow::solve(int source, int sink, std::int64_t limit) {
    constexpr auto inf = std::numeric_limits<std::int64_t>::max() / 4;
    const auto n = graph_.size();
    Result res;
    std::vector<std::int64_t> dist(n);
    std::vector<int> prev_node(n), prev_edge(n);
    std::vector<bool> queued(n);
    while (res.flow < limit) {
        // Bellman-Ford queue variant; residual costs may be negative.
        std::fill(dist.begin(), dist.end(), inf);
        std::fill(queued.begin(), queued.end(), false);
        std::vector<int> queue{source};
        dist[static_cast<std::size_t>(source)] = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int u = queue[head];
            queued[static_cast<std::size_t>(u)] = false;
            const auto &edges = graph_[static_cast<std::size_t>(u)];
            for (std::size_t k = 0; k < edges.size(); ++k) {
                const auto &e = edges[k];
                if (e.cap <= 0) continue;
                const auto nd = dist[static_cast<std::size_t>(u)] + e.cost;
                // Ties resolve to the lower predecessor node for determinism.
                if (nd < dist[static_cast<std::size_t>(e.to)]) {
                    dist[static_cast<std::size_t>(e.to)] = nd;
                    prev_node[static_cast<std::size_t>(e.to)] = u;
                    prev_edge[static_cast<std::size_t>(e.to)] = static_cast<int>(k);
                    if (!queued[static_cast<std::size_t>(e.to)]) {
                        queued[static_cast<std::size_t>(e.to)] = true;
                        queue.push_back(e.to);
                    }
                }
            }
        }
        if (dist[static_cast<std::size_t>(sink)] >= inf) break;
        std::int64_t push = limit - res.flow;
        for (int v = sink; v != source; v = prev_node[static_cast<std::size_t>(v)]) {
            const auto &e = graph_[static_cast<std::size_t>(prev_node[static_cast<std::size_t>(v)])]
                                  [static_cast<std::size_t>(prev_edge[static_cast<std::size_t>(v)])];
            push = std::min(push, e.cap);
        }
        for (int v = sink; v != source; v = prev_node[static_cast<std::size_t>(v)]) {
            auto &e = graph_[static_cast<std::size_t>(prev_node[static_cast<std::size_t>(v)])]
                            [static_cast<std::size_t>(prev_edge[static_cast<std::size_t>(v)])];
            e.cap -= push;
            graph_[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)].cap += push;
        }
        res.flow += push;
        res.cost += push * dist[static_cast<std::size_t>(sink)];
    }
    return res;
}

std::int64_t MinCostFlow::flow(int edge) const {
    const auto [node, idx] = handles_[static_cast<std::size_t>(edge)];
    return original_cap_[static_cast<std::size_t>(edge)] -
           graph_[static_cast<std::size_t>(node)][static_cast<std::size_t>(idx)].cap;
}

}  // namespace rtrs
