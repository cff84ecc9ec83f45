#pragma once

#include "psb/dfg.hpp"
#include "psb/rng.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace testsupport {

inline std::string read_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string example_text() { return read_file(std::string(TEST_DATA_DIR) + "/example.dfg"); }

// Reference interpreter: evaluates the DFG directly in topological order
// with wrap-around W-bit arithmetic. Used as an oracle for the synthesized
// netlists; shares no code with the simulator.
inline std::map<std::string, std::uint32_t>
eval_dfg(const psb::Dfg &dfg, const std::map<std::string, std::uint32_t> &inputs, int W) {
    std::uint64_t mask = W >= 32 ? 0xffffffffULL : (1ULL << W) - 1;
    std::map<std::string, std::uint64_t> value;
    for (const auto &[k, v] : inputs)
        value[k] = v & mask;
    for (const auto &id : psb::topo_order(dfg)) {
        std::uint64_t in[2] = {0, 0};
        for (size_t e : dfg.in_edges(id)) {
            const auto &edge = dfg.edges[e];
            in[edge.port] = value.at(edge.src);
        }
        std::uint64_t r = 0;
        switch (dfg.optype_of(id).kind) {
        case psb::OpKind::Add: r = in[0] + in[1]; break;
        case psb::OpKind::Sub: r = in[0] - in[1]; break;
        case psb::OpKind::Mul: r = in[0] * in[1]; break;
        }
        value[id] = r & mask;
    }
    std::map<std::string, std::uint32_t> out;
    for (const auto &o : dfg.outputs) {
        const auto &edge = dfg.edges[dfg.in_edges(o).front()];
        out[o] = static_cast<std::uint32_t>(value.at(edge.src));
    }
    return out;
}

} // namespace testsupport
