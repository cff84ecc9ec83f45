#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace psb {

// Operator kinds with built-in semantics. Extra optype names may be
// declared in the source text as aliases of one of these.
enum class OpKind { Add, Sub, Mul };

std::string op_kind_name(OpKind k);

struct OpType {
    std::string name;
    OpKind kind;
};

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string &msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DfgNode {
    std::string id;
    std::string optype;
};

// src is a node id or primary-input id; dst is a node id (port 0/1) or a
// primary-output id (port -1).
struct DfgEdge {
    std::string id;
    std::string src;
    std::string dst;
    int port; // 0 or 1 for node destinations, -1 for primary outputs
};

class Dfg {
  public:
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<DfgNode> nodes;
    std::vector<DfgEdge> edges;
    std::map<std::string, OpType> optypes; // includes built-ins

    // Checks every structural invariant; throws ValidationError.
    void validate() const;

    bool is_node(const std::string &id) const { return node_index_.count(id) != 0; }
    bool is_input(const std::string &id) const;
    bool is_output(const std::string &id) const;
    const DfgNode &node(const std::string &id) const;
    const OpType &optype_of(const std::string &node_id) const;

    // Outgoing / incoming edge indices per endpoint id, in edge declaration order.
    const std::vector<size_t> &out_edges(const std::string &id) const;
    const std::vector<size_t> &in_edges(const std::string &id) const;

    // Rebuilds the adjacency indices; called by parse_dfg and required
    // after manual construction before any query.
    void index();

  private:
    std::map<std::string, size_t> node_index_;
    std::map<std::string, std::vector<size_t>> out_;
    std::map<std::string, std::vector<size_t>> in_;
    static const std::vector<size_t> empty_;
};

// Add/Sub/Mul with their canonical names.
std::map<std::string, OpType> builtin_optypes();

Dfg parse_dfg(const std::string &text);
std::string print_dfg(const Dfg &dfg);

// Deterministic topological order over nodes (ties by ascending node id).
std::vector<std::string> topo_order(const Dfg &dfg);

// F_O: number of outgoing edges of a node.
int fanout_count(const Dfg &dfg, const std::string &node_id);

// P_O: primary outputs reachable by directed paths from the node.
std::set<std::string> reachable_primary_outputs(const Dfg &dfg, const std::string &node_id);

} // namespace psb
