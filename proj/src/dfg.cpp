#include "psb/dfg.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace psb {

const std::vector<size_t> Dfg::empty_{};

std::string op_kind_name(OpKind k) {
    switch (k) {
    case OpKind::Add: return "Add";
    case OpKind::Sub: return "Sub";
    case OpKind::Mul: return "Mul";
    }
    return "?";
}

std::map<std::string, OpType> builtin_optypes() {
    return {{"Add", {"Add", OpKind::Add}},
            {"Sub", {"Sub", OpKind::Sub}},
            {"Mul", {"Mul", OpKind::Mul}}};
}

bool Dfg::is_input(const std::string &id) const {
    return std::find(inputs.begin(), inputs.end(), id) != inputs.end();
}

bool Dfg::is_output(const std::string &id) const {
    return std::find(outputs.begin(), outputs.end(), id) != outputs.end();
}

const DfgNode &Dfg::node(const std::string &id) const {
    auto it = node_index_.find(id);
    if (it == node_index_.end())
        throw ValidationError("unknown node id: " + id);
    return nodes[it->second];
}

const OpType &Dfg::optype_of(const std::string &node_id) const {
    return optypes.at(node(node_id).optype);
}

const std::vector<size_t> &Dfg::out_edges(const std::string &id) const {
    auto it = out_.find(id);
    return it == out_.end() ? empty_ : it->second;
}

const std::vector<size_t> &Dfg::in_edges(const std::string &id) const {
    auto it = in_.find(id);
    return it == in_.end() ? empty_ : it->second;
}

void Dfg::index() {
    node_index_.clear();
    out_.clear();
    in_.clear();
    for (size_t i = 0; i < nodes.size(); ++i)
        node_index_[nodes[i].id] = i;
    for (size_t i = 0; i < edges.size(); ++i) {
        out_[edges[i].src].push_back(i);
        in_[edges[i].dst].push_back(i);
    }
}

void Dfg::validate() const {
    std::set<std::string> ids;
    for (const auto &id : inputs)
        if (!ids.insert(id).second)
            throw ValidationError("duplicate id: " + id);
    for (const auto &id : outputs)
        if (!ids.insert(id).second)
            throw ValidationError("duplicate id: " + id);
    for (const auto &n : nodes) {
        if (!ids.insert(n.id).second)
            throw ValidationError("duplicate id: " + n.id);
        if (!optypes.count(n.optype))
            throw ValidationError("node " + n.id + ": undeclared optype " + n.optype);
    }
    std::set<std::string> eids;
    for (const auto &e : edges) {
        if (!eids.insert(e.id).second)
            throw ValidationError("duplicate edge id: " + e.id);
        if (!is_node(e.src) && !is_input(e.src))
            throw ValidationError("edge " + e.id + ": dangling source " + e.src);
        if (is_node(e.dst)) {
            if (e.port != 0 && e.port != 1)
                throw ValidationError("edge " + e.id + ": bad port");
        } else if (is_output(e.dst)) {
            if (e.port != -1)
                throw ValidationError("edge " + e.id + ": port on primary output");
        } else {
            throw ValidationError("edge " + e.id + ": dangling destination " + e.dst);
        }
        if (is_output(e.src))
            throw ValidationError("edge " + e.id + ": source is a primary output");
        if (is_input(e.dst))
            throw ValidationError("edge " + e.id + ": destination is a primary input");
    }
    for (const auto &n : nodes) {
        const auto &in = in_edges(n.id);
        if (in.size() != 2)
            throw ValidationError("node " + n.id + ": needs exactly 2 incoming edges, has " +
                                  std::to_string(in.size()));
        if (edges[in[0]].port == edges[in[1]].port)
            throw ValidationError("node " + n.id + ": duplicate input port");
    }
    for (const auto &o : outputs)
        if (in_edges(o).size() != 1)
            throw ValidationError("output " + o + ": must be fed by exactly one edge");
    for (const auto &i : inputs)
        if (out_edges(i).empty())
            throw ValidationError("input " + i + ": unused");

    // Cycle check via Kahn's algorithm over node-to-node edges.
    std::map<std::string, int> indeg;
    for (const auto &n : nodes)
        indeg[n.id] = 0;
    for (const auto &e : edges)
        if (is_node(e.src) && is_node(e.dst))
            ++indeg[e.dst];
    std::queue<std::string> q;
    for (auto &[id, d] : indeg)
        if (d == 0)
            q.push(id);
    size_t seen = 0;
    while (!q.empty()) {
        auto id = q.front();
        q.pop();
        ++seen;
        for (size_t ei : out_edges(id))
            if (is_node(edges[ei].dst) && --indeg[edges[ei].dst] == 0)
                q.push(edges[ei].dst);
    }
    if (seen != nodes.size())
        throw ValidationError("cycle detected");

    for (const auto &n : nodes) {
        if (out_edges(n.id).empty())
            throw ValidationError("node " + n.id + ": no outgoing edges");
        if (reachable_primary_outputs(*this, n.id).empty())
            throw ValidationError("node " + n.id + ": reaches no primary output");
    }
}

static std::vector<std::string> tokenize(const std::string &line) {
    std::vector<std::string> toks;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) {
        if (t[0] == '#')
            break;
        toks.push_back(t);
    }
    return toks;
}

Dfg parse_dfg(const std::string &text) {
    Dfg dfg;
    dfg.optypes = builtin_optypes();
    std::istringstream ss(text);
    std::string line;
    int lineno = 0;
    bool named = false;
    while (std::getline(ss, line)) {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty())
            continue;
        const auto &kw = toks[0];
        if (kw == "dfg") {
            if (toks.size() != 2)
                throw ParseError(lineno, "expected: dfg <name>");
            dfg.name = toks[1];
            named = true;
        } else if (kw == "optype") {
            if (toks.size() != 3)
                throw ParseError(lineno, "expected: optype <name> <Add|Sub|Mul>");
            auto builtins = builtin_optypes();
            auto base = builtins.find(toks[2]);
            if (base == builtins.end())
                throw ParseError(lineno, "unknown base optype " + toks[2]);
            dfg.optypes[toks[1]] = {toks[1], base->second.kind};
        } else if (kw == "input") {
            if (toks.size() != 2)
                throw ParseError(lineno, "expected: input <id>");
            dfg.inputs.push_back(toks[1]);
        } else if (kw == "output") {
            if (toks.size() != 2)
                throw ParseError(lineno, "expected: output <id>");
            dfg.outputs.push_back(toks[1]);
        } else if (kw == "node") {
            if (toks.size() != 3)
                throw ParseError(lineno, "expected: node <id> <optype>");
            dfg.nodes.push_back({toks[1], toks[2]});
        } else if (kw == "edge") {
            if (toks.size() != 5 || toks[3] != "->")
                throw ParseError(lineno, "expected: edge <id> <src> -> <dst>[.<port>]");
            DfgEdge e;
            e.id = toks[1];
            e.src = toks[2];
            auto dot = toks[4].rfind('.');
            if (dot != std::string::npos && dot + 2 == toks[4].size() &&
                (toks[4].back() == '0' || toks[4].back() == '1')) {
                e.dst = toks[4].substr(0, dot);
                e.port = toks[4].back() - '0';
            } else {
                e.dst = toks[4];
                e.port = -1;
            }
            dfg.edges.push_back(e);
        } else {
            throw ParseError(lineno, "unknown directive " + kw);
        }
    }
    if (!named)
        throw ParseError(lineno, "missing dfg header");
    dfg.index();
    try {
        dfg.validate();
    } catch (const ValidationError &e) {
        throw ValidationError(dfg.name + ": " + e.what());
    }
    return dfg;
}

std::string print_dfg(const Dfg &dfg) {
    std::ostringstream out;
    out << "dfg " << dfg.name << "\n";
    for (const auto &[name, ty] : dfg.optypes)
        if (name != "Add" && name != "Sub" && name != "Mul")
            out << "optype " << name << " " << op_kind_name(ty.kind) << "\n";
    for (const auto &i : dfg.inputs)
        out << "input " << i << "\n";
    for (const auto &o : dfg.outputs)
        out << "output " << o << "\n";
    for (const auto &n : dfg.nodes)
        out << "node " << n.id << " " << n.optype << "\n";
    for (const auto &e : dfg.edges) {
        out << "edge " << e.id << " " << e.src << " -> " << e.dst;
        if (e.port >= 0)
            out << "." << e.port;
        out << "\n";
    }
    return out.str();
}

std::vector<std::string> topo_order(const Dfg &dfg) {
    std::map<std::string, int> indeg;
    for (const auto &n : dfg.nodes)
        indeg[n.id] = 0;
    for (const auto &e : dfg.edges)
        if (dfg.is_node(e.src) && dfg.is_node(e.dst))
            ++indeg[e.dst];
    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (auto &[id, d] : indeg)
        if (d == 0)
            ready.push(id);
    std::vector<std::string> order;
    while (!ready.empty()) {
        auto id = ready.top();
        ready.pop();
        order.push_back(id);
        for (size_t ei : dfg.out_edges(id)) {
            const auto &dst = dfg.edges[ei].dst;
            if (dfg.is_node(dst) && --indeg[dst] == 0)
                ready.push(dst);
        }
    }
    return order;
}

int fanout_count(const Dfg &dfg, const std::string &node_id) {
    dfg.node(node_id); // existence check
    return static_cast<int>(dfg.out_edges(node_id).size());
}

std::set<std::string> reachable_primary_outputs(const Dfg &dfg, const std::string &node_id) {
    dfg.node(node_id);
    std::set<std::string> result;
    std::set<std::string> seen;
    std::vector<std::string> stack{node_id};
    while (!stack.empty()) {
        auto id = stack.back();
        stack.pop_back();
        if (!seen.insert(id).second)
            continue;
        for (size_t ei : dfg.out_edges(id)) {
            const auto &dst = dfg.edges[ei].dst;
            if (dfg.is_output(dst))
                result.insert(dst);
            else
                stack.push_back(dst);
        }
    }
    return result;
}

} // namespace psb
