#pragma once

#include <cstdint>
#include <vector>

namespace wf {

// s-t max-flow on a sparse graph with per-node terminal capacities
// (tr_cap > 0: edge from source, tr_cap < 0: edge to sink).  Deterministic:
// identical construction order yields identical cuts.
class MaxFlow {
public:
    explicit MaxFlow(int num_nodes);

    void add_terminal(int node, double cap_from_source, double cap_to_sink);
    void add_edge(int a, int b, double cap, double reverse_cap);

    double solve();

    // Minimal source-side set among all minimum cuts: nodes reachable from
    // the source in the residual graph.
    std::vector<uint8_t> min_source_side() const;

private:
    struct Arc {
        int head;
        int next;    // next arc out of the same node, -1 terminates
        int sister;
        double r_cap;
    };

    static constexpr int kNone = -1;

    int n_;
    std::vector<double> tr_cap_;
    std::vector<int> first_arc_;  // indexed up to n_+1 (super source/sink)
    std::vector<Arc> arcs_;
    std::vector<int> dist_;
    double flow_ = 0.0;
    double cut_const_ = 0.0;
};

}  // namespace wf
