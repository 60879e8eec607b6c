#include "wulffflow/maxflow.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace wf {

// Dinic with explicit super source/sink; terminal capacities become arcs.

MaxFlow::MaxFlow(int num_nodes)
    : n_(num_nodes),
      tr_cap_(num_nodes, 0.0),
      first_arc_(num_nodes + 2, kNone),
      dist_(num_nodes + 2, 0) {}

void MaxFlow::add_terminal(int node, double cap_from_source, double cap_to_sink) {
    tr_cap_[node] += cap_from_source - cap_to_sink;
    // the cancelled part of the two terminal arcs crosses every cut
    cut_const_ += std::min(cap_from_source, cap_to_sink);
}

void MaxFlow::add_edge(int a, int b, double cap, double reverse_cap) {
    const int ia = static_cast<int>(arcs_.size());
    arcs_.push_back({b, first_arc_[a], ia + 1, cap});
    first_arc_[a] = ia;
    arcs_.push_back({a, first_arc_[b], ia, reverse_cap});
    first_arc_[b] = ia + 1;
}

double MaxFlow::solve() {
    const int s = n_, t = n_ + 1;
    // materialize terminal arcs once
    for (int v = 0; v < n_; ++v) {
        if (tr_cap_[v] > 0.0) add_edge(s, v, tr_cap_[v], 0.0);
        else if (tr_cap_[v] < 0.0) add_edge(v, t, -tr_cap_[v], 0.0);
    }

    // repack the adjacency into contiguous per-node arc slices so the
    // BFS/DFS phases stream memory instead of chasing next-pointers
    const int nv = n_ + 2;
    const int na = static_cast<int>(arcs_.size());
    std::vector<int> tail(na);
    std::vector<int> start(nv + 1, 0);
    for (int a = 0; a < na; ++a) {
        tail[a] = arcs_[arcs_[a].sister].head;
        ++start[tail[a] + 1];
    }
    for (int v = 0; v < nv; ++v) start[v + 1] += start[v];
    std::vector<int> pos(na);
    {
        std::vector<int> fill = start;
        for (int a = 0; a < na; ++a) pos[a] = fill[tail[a]]++;
    }
    std::vector<int> head(na), sister(na);
    std::vector<double> cap(na);
    for (int a = 0; a < na; ++a) {
        head[pos[a]] = arcs_[a].head;
        cap[pos[a]] = arcs_[a].r_cap;
        sister[pos[a]] = pos[arcs_[a].sister];
    }

    std::vector<int> cur(nv);
    std::deque<int> q;
    const double eps = 1e-12;

    auto bfs = [&]() {
        std::fill(dist_.begin(), dist_.end(), -1);
        dist_[s] = 0;
        q.clear();
        q.push_back(s);
        while (!q.empty()) {
            const int v = q.front();
            q.pop_front();
            const int e = start[v + 1];
            for (int a = start[v]; a < e; ++a) {
                const int u = head[a];
                if (cap[a] > eps && dist_[u] < 0) {
                    dist_[u] = dist_[v] + 1;
                    q.push_back(u);
                }
            }
        }
        return dist_[t] >= 0;
    };

    // iterative blocking-flow DFS
    std::vector<int> path_arc;
    path_arc.reserve(nv);

    while (bfs()) {
        for (int v = 0; v < nv; ++v) cur[v] = start[v];
        while (true) {
            // advance from s following admissible arcs
            path_arc.clear();
            int v = s;
            while (v != t) {
                int a = cur[v];
                const int e = start[v + 1];
                while (a < e && !(cap[a] > eps && dist_[head[a]] == dist_[v] + 1)) ++a;
                cur[v] = a;
                if (a == e) {
                    if (path_arc.empty()) { v = -1; break; }
                    // retreat
                    dist_[v] = -1;
                    v = head[sister[path_arc.back()]];
                    path_arc.pop_back();
                    continue;
                }
                path_arc.push_back(a);
                v = head[a];
            }
            if (v == -1) break;
            double bottleneck = std::numeric_limits<double>::infinity();
            for (int a : path_arc) bottleneck = std::min(bottleneck, cap[a]);
            for (int a : path_arc) {
                cap[a] -= bottleneck;
                cap[sister[a]] += bottleneck;
            }
            flow_ += bottleneck;
        }
    }

    // write residuals back for min_source_side
    for (int a = 0; a < na; ++a) arcs_[a].r_cap = cap[pos[a]];
    return flow_ + cut_const_;
}

std::vector<uint8_t> MaxFlow::min_source_side() const {
    const int s = n_;
    std::vector<uint8_t> reach(n_ + 2, 0);
    std::deque<int> q;
    reach[s] = 1;
    q.push_back(s);
    while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        for (int a = first_arc_[v]; a != kNone; a = arcs_[a].next) {
            if (arcs_[a].r_cap <= 1e-12) continue;
            const int u = arcs_[a].head;
            if (!reach[u]) {
                reach[u] = 1;
                q.push_back(u);
            }
        }
    }
    reach.resize(n_);
    return reach;
}

}  // namespace wf
