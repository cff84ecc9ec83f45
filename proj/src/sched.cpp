#include "psb/sched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace psb {

namespace {

std::vector<std::string> node_preds(const Dfg &dfg, const std::string &id) {
    std::vector<std::string> out;
    for (size_t ei : dfg.in_edges(id))
        if (dfg.is_node(dfg.edges[ei].src))
            out.push_back(dfg.edges[ei].src);
    return out;
}

std::vector<std::string> node_succs(const Dfg &dfg, const std::string &id) {
    std::vector<std::string> out;
    for (size_t ei : dfg.out_edges(id))
        if (dfg.is_node(dfg.edges[ei].dst))
            out.push_back(dfg.edges[ei].dst);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

double DistributionGraph::at(const std::string &type, int t) const {
    auto it = per_type.find(type);
    if (it == per_type.end() || t < 1 || t > L)
        return 0.0;
    return it->second[static_cast<size_t>(t)];
}

int critical_path_length(const Dfg &dfg) {
    std::map<std::string, int> depth;
    int cp = 0;
    for (const auto &id : topo_order(dfg)) {
        int d = 1;
        for (const auto &p : node_preds(dfg, id))
            d = std::max(d, depth[p] + 1);
        depth[id] = d;
        cp = std::max(cp, d);
    }
    return cp;
}

std::map<std::string, TimeFrame> compute_frames(const Dfg &dfg, int L,
                                                const std::map<std::string, int> &placed) {
    if (L < critical_path_length(dfg))
        throw InfeasibleLatency("latency bound " + std::to_string(L) +
                                " below critical path length " +
                                std::to_string(critical_path_length(dfg)));
    auto order = topo_order(dfg);
    std::map<std::string, TimeFrame> frames;
    for (const auto &id : order) {
        int asap = 1;
        for (const auto &p : node_preds(dfg, id))
            asap = std::max(asap, frames[p].asap + 1);
        auto it = placed.find(id);
        if (it != placed.end())
            asap = it->second;
        frames[id].asap = asap;
    }
    for (auto rit = order.rbegin(); rit != order.rend(); ++rit) {
        const auto &id = *rit;
        int alap = L;
        for (const auto &s : node_succs(dfg, id))
            alap = std::min(alap, frames[s].alap - 1);
        auto it = placed.find(id);
        if (it != placed.end())
            alap = it->second;
        frames[id].alap = alap;
        if (frames[id].alap < frames[id].asap)
            throw InfeasibleLatency("node " + id + ": empty time frame under L=" +
                                    std::to_string(L));
    }
    return frames;
}

std::map<std::string, SecurityWeight> compute_weights(const Dfg &dfg) {
    std::map<std::string, SecurityWeight> w;
    for (const auto &n : dfg.nodes) {
        w[n.id].po = static_cast<int>(reachable_primary_outputs(dfg, n.id).size());
        w[n.id].fo = fanout_count(dfg, n.id);
    }
    return w;
}

DistributionGraph build_dg(const Dfg &dfg, const std::map<std::string, TimeFrame> &frames,
                           const std::map<std::string, int> &placed, int L) {
    DistributionGraph dg;
    dg.L = L;
    for (const auto &n : dfg.nodes) {
        const auto &type = dfg.optype_of(n.id).name;
        auto &col = dg.per_type[type];
        if (col.empty())
            col.assign(static_cast<size_t>(L) + 1, 0.0);
        auto it = placed.find(n.id);
        if (it != placed.end()) {
            col[static_cast<size_t>(it->second)] += 1.0;
        } else {
            const auto &f = frames.at(n.id);
            double p = 1.0 / f.mobility();
            for (int t = f.asap; t <= f.alap; ++t)
                col[static_cast<size_t>(t)] += p;
        }
    }
    return dg;
}

namespace {

// Force of re-restricting an unscheduled node from frame f to frame nf.
double restriction_force(const DistributionGraph &dg, const std::string &type,
                         const TimeFrame &f, const TimeFrame &nf) {
    if (nf.alap < nf.asap)
        return std::numeric_limits<double>::infinity();
    double x_old = 1.0 / f.mobility();
    double x_new = 1.0 / nf.mobility();
    double sum = 0.0;
    for (int t = f.asap; t <= f.alap; ++t)
        sum += dg.at(type, t) * ((nf.contains(t) ? x_new : 0.0) - x_old);
    return sum;
}

} // namespace

double force(const Dfg &dfg, const DistributionGraph &dg,
             const std::map<std::string, TimeFrame> &frames,
             const std::map<std::string, int> &placed, const std::string &node, int step) {
    const auto &f = frames.at(node);
    if (!f.contains(step))
        throw std::invalid_argument("force: step " + std::to_string(step) +
                                    " outside frame of node " + node);
    const auto &type = dfg.optype_of(node).name;
    double total = restriction_force(dg, type, f, {step, step});
    for (const auto &s : node_succs(dfg, node)) {
        if (placed.count(s))
            continue;
        const auto &sf = frames.at(s);
        TimeFrame nf{std::max(sf.asap, step + 1), sf.alap};
        if (nf.asap != sf.asap)
            total += restriction_force(dg, dfg.optype_of(s).name, sf, nf);
    }
    for (const auto &p : node_preds(dfg, node)) {
        if (placed.count(p))
            continue;
        const auto &pf = frames.at(p);
        TimeFrame nf{pf.asap, std::min(pf.alap, step - 1)};
        if (nf.alap != pf.alap)
            total += restriction_force(dg, dfg.optype_of(p).name, pf, nf);
    }
    return total;
}

namespace {

constexpr double kForceTie = 1e-9;

struct Scheduler {
    const Dfg &dfg;
    int L;
    std::map<std::string, TimeFrame> static_frames;
    std::map<std::string, SecurityWeight> weights;
    std::map<std::string, int> placed;
    std::map<std::string, TimeFrame> dyn;

    Scheduler(const Dfg &d, int l) : dfg(d), L(l) {
        static_frames = compute_frames(dfg, L);
        weights = compute_weights(dfg);
        dyn = static_frames;
    }

    void place(const std::string &node, int step) {
        placed[node] = step;
        dyn = compute_frames(dfg, L, placed);
    }

    // Min-force step among candidates (ties by earliest).
    int best_step(const std::string &node, const std::vector<int> &candidates) {
        auto dg = build_dg(dfg, dyn, placed, L);
        double best = std::numeric_limits<double>::infinity();
        int best_t = -1;
        for (int t : candidates) {
            double f = force(dfg, dg, dyn, placed, node, t);
            if (f < best - kForceTie) {
                best = f;
                best_t = t;
            }
        }
        if (best_t < 0)
            throw InfeasibleLatency("no feasible step for node " + node);
        return best_t;
    }

    std::vector<int> frame_steps(const std::string &node) {
        std::vector<int> steps;
        for (int t = dyn.at(node).asap; t <= dyn.at(node).alap; ++t)
            steps.push_back(t);
        return steps;
    }

    // Steps occupied by scheduled same-type nodes with w >= 2.
    std::set<int> weighted_occupied(const std::string &type) {
        std::set<int> occ;
        for (const auto &[id, t] : placed)
            if (dfg.optype_of(id).name == type && weights.at(id).w() >= 2)
                occ.insert(t);
        return occ;
    }

    void schedule_successors(const std::string &node) {
        for (const auto &s : node_succs(dfg, node)) {
            if (placed.count(s))
                continue;
            std::vector<int> cands;
            auto occ = weighted_occupied(dfg.optype_of(s).name);
            for (int t : frame_steps(s))
                if (!occ.count(t))
                    cands.push_back(t);
            if (cands.empty())
                cands = frame_steps(s); // feasibility over separation
            place(s, best_step(s, cands));
            schedule_successors(s);
        }
    }

    void place_priority(const std::string &node) {
        const auto &type = dfg.optype_of(node).name;
        // Max-w critical-path node of the same type, ties by ascending id.
        std::string cp;
        int cpw = 2;
        for (const auto &n : dfg.nodes) {
            if (dfg.optype_of(n.id).name != type || static_frames.at(n.id).mobility() != 1)
                continue;
            int w = weights.at(n.id).w();
            if (w > cpw || (w == cpw && !cp.empty() && n.id < cp)) {
                cpw = w;
                cp = n.id;
            }
        }
        std::vector<int> cands;
        if (!cp.empty()) {
            int cstep = placed.at(cp);
            for (int t : frame_steps(node))
                if (t != cstep)
                    cands.push_back(t);
        }
        if (cands.empty())
            cands = frame_steps(node);
        place(node, best_step(node, cands));
        schedule_successors(node);
    }

    Schedule run() {
        // Critical-path nodes are fixed at their only feasible step.
        for (const auto &n : dfg.nodes)
            if (static_frames.at(n.id).mobility() == 1)
                placed[n.id] = static_frames.at(n.id).asap;
        dyn = compute_frames(dfg, L, placed);

        while (placed.size() < dfg.nodes.size()) {
            // Pick the type whose unscheduled nodes carry the largest weight.
            std::string type;
            int best_w = -1;
            for (const auto &n : dfg.nodes) {
                if (placed.count(n.id))
                    continue;
                const auto &t = dfg.optype_of(n.id).name;
                int w = weights.at(n.id).w();
                if (w > best_w || (w == best_w && t < type)) {
                    best_w = w;
                    type = t;
                }
            }
            // Priority nodes (w > 2) in descending weight, ties by id.
            std::vector<std::string> prio, rest;
            for (const auto &n : dfg.nodes)
                if (!placed.count(n.id) && dfg.optype_of(n.id).name == type) {
                    if (weights.at(n.id).w() > 2)
                        prio.push_back(n.id);
                    else
                        rest.push_back(n.id);
                }
            std::stable_sort(prio.begin(), prio.end(), [&](const auto &a, const auto &b) {
                int wa = weights.at(a).w(), wb = weights.at(b).w();
                return wa != wb ? wa > wb : a < b;
            });
            std::sort(rest.begin(), rest.end());
            for (const auto &id : prio)
                if (!placed.count(id))
                    place_priority(id);
            for (const auto &id : rest)
                if (!placed.count(id)) {
                    place(id, best_step(id, frame_steps(id)));
                    schedule_successors(id);
                }
        }
        Schedule s;
        s.L = L;
        s.assignment = placed;
        s.frames = static_frames;
        s.weights = weights;
        return s;
    }
};

} // namespace

Schedule schedule_secure(const Dfg &dfg, int L) {
    return Scheduler(dfg, L).run();
}

std::string dump_schedule(const Dfg &dfg, const Schedule &s) {
    std::ostringstream out;
    for (const auto &n : dfg.nodes) {
        const auto &f = s.frames.at(n.id);
        const auto &w = s.weights.at(n.id);
        out << "node " << n.id << " type " << dfg.optype_of(n.id).name << " step "
            << s.step(n.id) << " asap " << f.asap << " alap " << f.alap << " mob "
            << f.mobility() << " po " << w.po << " fo " << w.fo << " w " << w.w() << "\n";
    }
    return out.str();
}

} // namespace psb
