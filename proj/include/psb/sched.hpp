#pragma once

#include "psb/dfg.hpp"

#include <map>
#include <string>
#include <vector>

namespace psb {

struct InfeasibleLatency : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SecurityWeight {
    int po = 0;
    int fo = 0;
    int w() const { return po + fo; }
};

struct TimeFrame {
    int asap = 1;
    int alap = 1;
    int mobility() const { return alap - asap + 1; }
    bool contains(int t) const { return asap <= t && t <= alap; }
};

// Per resource type, expected operator occupancy per step (1-based).
struct DistributionGraph {
    int L = 0;
    std::map<std::string, std::vector<double>> per_type; // type -> [0..L], slot 0 unused
    double at(const std::string &type, int t) const;
};

struct Schedule {
    int L = 0;
    std::map<std::string, int> assignment;
    std::map<std::string, TimeFrame> frames;
    std::map<std::string, SecurityWeight> weights;
    int step(const std::string &node) const { return assignment.at(node); }
};

// Longest node chain; the minimum feasible latency bound.
int critical_path_length(const Dfg &dfg);

// ASAP/ALAP frames under latency bound L. Frames of already-placed nodes
// collapse to their step and constrain neighbors transitively.
std::map<std::string, TimeFrame> compute_frames(const Dfg &dfg, int L,
                                                const std::map<std::string, int> &placed = {});

std::map<std::string, SecurityWeight> compute_weights(const Dfg &dfg);

DistributionGraph build_dg(const Dfg &dfg, const std::map<std::string, TimeFrame> &frames,
                           const std::map<std::string, int> &placed, int L);

// Force-directed scheduling force of tentatively placing node at step:
// self force over the node's frame plus one-level predecessor/successor
// forces from the implied frame reductions.
double force(const Dfg &dfg, const DistributionGraph &dg,
             const std::map<std::string, TimeFrame> &frames,
             const std::map<std::string, int> &placed, const std::string &node, int step);

Schedule schedule_secure(const Dfg &dfg, int L);

std::string dump_schedule(const Dfg &dfg, const Schedule &s);

} // namespace psb
