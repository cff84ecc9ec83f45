#include "psb/bind.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace psb {

FuBinding allocate_fus(const Dfg &dfg, const Schedule &schedule) {
    // Group nodes by resource type.
    std::map<std::string, std::vector<std::string>> by_type;
    for (const auto &n : dfg.nodes)
        by_type[dfg.optype_of(n.id).name].push_back(n.id);

    FuBinding fb;
    int next_fu = 0;
    for (auto &[type, ids] : by_type) {
        // Weighted nodes first (descending w), then by step so leftovers
        // pack greedily; first-fit on step conflicts.
        std::sort(ids.begin(), ids.end(), [&](const auto &a, const auto &b) {
            int wa = schedule.weights.at(a).w(), wb = schedule.weights.at(b).w();
            if (wa != wb)
                return wa > wb;
            int sa = schedule.step(a), sb = schedule.step(b);
            if (sa != sb)
                return sa < sb;
            return a < b;
        });
        std::vector<int> fu_ids;
        std::vector<std::set<int>> busy;
        for (const auto &id : ids) {
            int step = schedule.step(id);
            size_t slot = 0;
            while (slot < fu_ids.size() && busy[slot].count(step))
                ++slot;
            if (slot == fu_ids.size()) {
                fu_ids.push_back(next_fu++);
                busy.emplace_back();
                fb.fus.emplace_back(fu_ids.back(), type);
            }
            busy[slot].insert(step);
            fb.node_fu[id] = fu_ids[slot];
        }
    }
    return fb;
}

namespace {

// Register occupancy interval of an edge, in step boundaries. Boundary b
// separates step b from step b+1; boundary 0 is input sampling time.
EdgeLifetime edge_lifetime(const Dfg &dfg, const Schedule &schedule, const DfgEdge &e) {
    EdgeLifetime lt;
    lt.def_step = dfg.is_node(e.src) ? schedule.step(e.src) : 0;
    if (dfg.is_output(e.dst)) {
        lt.last_use = schedule.L;
        lt.last_boundary = schedule.L; // outputs must persist past step L
    } else {
        lt.last_use = schedule.step(e.dst);
        lt.last_boundary = lt.last_use - 1;
    }
    lt.first_boundary = lt.def_step;
    lt.last_boundary = std::max(lt.last_boundary, lt.first_boundary);
    return lt;
}

} // namespace

RegisterBinding allocate_registers(const Dfg &dfg, const Schedule &schedule) {
    RegisterBinding rb;
    for (const auto &e : dfg.edges)
        rb.lifetime[e.id] = edge_lifetime(dfg, schedule, e);

    // Left-edge packing over boundary intervals.
    std::vector<std::string> order;
    for (const auto &e : dfg.edges)
        order.push_back(e.id);
    std::sort(order.begin(), order.end(), [&](const auto &a, const auto &b) {
        const auto &la = rb.lifetime.at(a), &lb = rb.lifetime.at(b);
        if (la.first_boundary != lb.first_boundary)
            return la.first_boundary < lb.first_boundary;
        return a < b;
    });
    std::vector<int> reg_free_at; // first boundary at which the register is free
    for (const auto &eid : order) {
        const auto &lt = rb.lifetime.at(eid);
        size_t r = 0;
        while (r < reg_free_at.size() && reg_free_at[r] > lt.first_boundary)
            ++r;
        if (r == reg_free_at.size())
            reg_free_at.push_back(0);
        reg_free_at[r] = lt.last_boundary + 1;
        rb.edge_reg[eid] = static_cast<int>(r);
    }
    rb.reg_count = static_cast<int>(reg_free_at.size());
    return rb;
}

DatapathNetlist build_datapath(const Dfg &dfg, const Schedule &schedule, const FuBinding &fub,
                               const RegisterBinding &regb, int W) {
    DatapathNetlist nl;
    nl.W = W;
    nl.L = schedule.L;
    nl.input_order = dfg.inputs;
    nl.reg_count = regb.reg_count;
    nl.ctrl.resize(static_cast<size_t>(schedule.L));

    std::map<std::string, size_t> edge_index;
    for (size_t i = 0; i < dfg.edges.size(); ++i)
        edge_index[dfg.edges[i].id] = i;

    for (const auto &[fu_id, type] : fub.fus) {
        NlFu fu;
        fu.id = fu_id;
        fu.type = type;
        fu.kind = dfg.optypes.at(type).kind;
        for (const auto &[node, f] : fub.node_fu)
            if (f == fu_id)
                fu.nodes.emplace_back(node, schedule.step(node));
        std::sort(fu.nodes.begin(), fu.nodes.end(),
                  [](const auto &a, const auto &b) { return a.second < b.second; });
        nl.fus.push_back(fu);
    }
    std::sort(nl.fus.begin(), nl.fus.end(), [](const auto &a, const auto &b) { return a.id < b.id; });

    // FU input ports: direct register feed, or a mux when sources differ
    // across steps. Select codes are assigned in first-use order.
    for (auto &fu : nl.fus) {
        for (int p = 0; p < 2; ++p) {
            std::vector<std::pair<int, std::string>> per_step; // (step, source net)
            for (const auto &[node, step] : fu.nodes) {
                const DfgEdge *in = nullptr;
                for (size_t ei : dfg.in_edges(node))
                    if (dfg.edges[ei].port == p)
                        in = &dfg.edges[ei];
                assert(in && "node missing input port");
                per_step.emplace_back(step, "reg:" + std::to_string(regb.edge_reg.at(in->id)));
            }
            std::vector<std::string> distinct;
            for (const auto &[step, net] : per_step)
                if (std::find(distinct.begin(), distinct.end(), net) == distinct.end())
                    distinct.push_back(net);
            if (distinct.size() <= 1) {
                fu.port[static_cast<size_t>(p)] = distinct.empty() ? "" : distinct[0];
            } else {
                NlMux mux;
                mux.id = static_cast<int>(nl.muxes.size());
                mux.ins = distinct;
                fu.port[static_cast<size_t>(p)] = "mux:" + std::to_string(mux.id);
                for (const auto &[step, net] : per_step) {
                    int code = static_cast<int>(
                        std::find(mux.ins.begin(), mux.ins.end(), net) - mux.ins.begin());
                    nl.ctrl[static_cast<size_t>(step - 1)].sel[mux.id] = code;
                }
                nl.muxes.push_back(mux);
            }
        }
    }

    // Register loads: each edge's value is latched at its defining boundary.
    for (const auto &e : dfg.edges) {
        int reg = regb.edge_reg.at(e.id);
        if (dfg.is_node(e.src)) {
            int boundary = schedule.step(e.src);
            std::string src = "fu:" + std::to_string(fub.node_fu.at(e.src));
            nl.ctrl[static_cast<size_t>(boundary - 1)].loads.push_back({reg, src});
        } else {
            nl.inputs.emplace_back(e.src, reg); // sampled at step 1 (boundary 0)
        }
    }
    for (auto &cw : nl.ctrl)
        std::sort(cw.loads.begin(), cw.loads.end(),
                  [](const auto &a, const auto &b) { return a.reg < b.reg; });

    for (const auto &o : dfg.outputs) {
        const auto &e = dfg.edges[dfg.in_edges(o)[0]];
        nl.outputs.emplace_back(o, regb.edge_reg.at(e.id));
    }
    return nl;
}

int fu_register_fanout(const DatapathNetlist &nl, int fu_id) {
    nl.fu(fu_id); // existence check
    std::string net = "fu:" + std::to_string(fu_id);
    std::set<int> regs;
    for (const auto &cw : nl.ctrl)
        for (const auto &ld : cw.loads)
            if (ld.src == net)
                regs.insert(ld.reg);
    return static_cast<int>(regs.size());
}

} // namespace psb
