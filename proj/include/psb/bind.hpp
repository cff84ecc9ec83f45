#pragma once

#include "psb/netlist.hpp"
#include "psb/sched.hpp"

namespace psb {

struct FuBinding {
    std::vector<std::pair<int, std::string>> fus; // (fu id, resource type)
    std::map<std::string, int> node_fu;           // node id -> fu id
};

struct EdgeLifetime {
    int def_step = 0;      // producing step (0 for primary inputs)
    int last_use = 0;      // latest consuming step (L for primary outputs)
    int first_boundary = 0; // register occupancy in step boundaries, inclusive
    int last_boundary = 0;
};

struct RegisterBinding {
    int reg_count = 0;
    std::map<std::string, int> edge_reg;           // edge id -> register
    std::map<std::string, EdgeLifetime> lifetime;  // edge id -> lifetime
};

FuBinding allocate_fus(const Dfg &dfg, const Schedule &schedule);

RegisterBinding allocate_registers(const Dfg &dfg, const Schedule &schedule);

DatapathNetlist build_datapath(const Dfg &dfg, const Schedule &schedule, const FuBinding &fub,
                               const RegisterBinding &regb, int W);

// Distinct registers loaded from the FU's output net across all steps.
int fu_register_fanout(const DatapathNetlist &nl, int fu_id);

} // namespace psb
