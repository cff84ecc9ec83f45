#pragma once

#include "psb/dfg.hpp"

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace psb {

// Net ids are strings of the form "reg:<r>", "fu:<f>", "mux:<m>",
// "pi:<input-id>", or "sb:<s>:z" / "sb:<s>:w" after locking.

struct NlFu {
    int id = 0;
    std::string type;                               // resource type name
    OpKind kind = OpKind::Add;                      // semantics
    std::array<std::string, 2> port;                // driver net per input port
    std::vector<std::pair<std::string, int>> nodes; // (node id, step), documentation
};

struct NlMux {
    int id = 0;
    std::vector<std::string> ins; // select code = index, first-use order
};

struct RegLoad {
    int reg = -1;
    std::string src; // net id
};

struct ControlWord {
    std::map<int, int> sel;     // mux id -> select code for this step
    std::vector<RegLoad> loads; // applied at the end of the step
};

struct DatapathNetlist {
    int W = 8;
    int L = 1;
    std::vector<std::string> input_order;            // primary inputs
    std::vector<std::pair<std::string, int>> inputs; // (input id, reg) sampled at step 1
    std::vector<std::pair<std::string, int>> outputs; // (output id, reg) valid after step L
    std::vector<NlFu> fus;
    int reg_count = 0;
    std::vector<NlMux> muxes;
    std::vector<ControlWord> ctrl; // one word per step, 1..L

    const NlFu &fu(int id) const;
    const NlMux &mux(int id) const;
};

std::string netlist_to_json(const DatapathNetlist &nl);
DatapathNetlist netlist_from_json(const std::string &text);

} // namespace psb
