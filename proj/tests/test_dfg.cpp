#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "psb/bench.hpp"
#include "psb/dfg.hpp"

#include "support.hpp"

#include <algorithm>
#include <set>

using namespace psb;

namespace {

const char *kTiny = "dfg tiny\n"
                    "input x\ninput y\noutput o\n"
                    "node a Add\n"
                    "edge e1 x -> a.0\nedge e2 y -> a.1\nedge e3 a -> o\n";

} // namespace

TEST_CASE("smallest legal graph parses") {
    auto dfg = parse_dfg(kTiny);
    CHECK(dfg.name == "tiny");
    CHECK(dfg.nodes.size() == 1);
    CHECK(dfg.edges.size() == 3);
    CHECK(dfg.inputs.size() == 2);
    CHECK(dfg.outputs.size() == 1);
}

TEST_CASE("self-loop is rejected as a cycle") {
    std::string text = std::string(kTiny) + "edge e4 a -> a.0\n";
    CHECK_THROWS_AS(parse_dfg(text), ValidationError);
}

TEST_CASE("two-node cycle is rejected") {
    CHECK_THROWS_AS(parse_dfg("dfg c\ninput x\noutput o\n"
                              "node a Add\nnode b Add\n"
                              "edge e1 x -> a.0\nedge e2 b -> a.1\n"
                              "edge e3 a -> b.0\nedge e4 x -> b.1\n"
                              "edge e5 a -> o\n"),
                    ValidationError);
}

TEST_CASE("duplicate ids are rejected") {
    CHECK_THROWS(parse_dfg(std::string(kTiny) + "node a Sub\n"));
    CHECK_THROWS(parse_dfg(std::string(kTiny) + "node b Add\nedge e1 x -> b.0\n"));
}

TEST_CASE("dangling edge endpoints are rejected") {
    CHECK_THROWS(parse_dfg(std::string(kTiny) + "node b Add\n"
                                                "edge e4 ghost -> b.0\nedge e5 x -> b.1\n"));
}

TEST_CASE("missing input port is rejected") {
    CHECK_THROWS(parse_dfg("dfg m\ninput x\noutput o\nnode a Add\n"
                           "edge e1 x -> a.0\nedge e2 a -> o\n"));
}

TEST_CASE("duplicate destination port is rejected") {
    CHECK_THROWS(parse_dfg("dfg m\ninput x\noutput o\nnode a Add\n"
                           "edge e1 x -> a.0\nedge e2 x -> a.0\nedge e3 a -> o\n"));
}

TEST_CASE("output fed twice is rejected") {
    CHECK_THROWS(parse_dfg(std::string(kTiny) + "edge e4 a -> o\n"));
}

TEST_CASE("unused primary input is rejected") {
    CHECK_THROWS(parse_dfg(std::string(kTiny) + "input z\n"));
}

TEST_CASE("dead node (no path to an output) is rejected") {
    CHECK_THROWS_AS(parse_dfg(std::string(kTiny) + "node dead Add\n"
                                                   "edge e4 x -> dead.0\nedge e5 y -> dead.1\n"),
                    ValidationError);
}

TEST_CASE("syntax errors carry line numbers") {
    try {
        parse_dfg("dfg t\ninput x\nbogus line here\n");
        FAIL("expected ParseError");
    } catch (const ParseError &e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("parse/print round trip") {
    for (const auto *text : {kTiny}) {
        auto dfg = parse_dfg(text);
        CHECK(print_dfg(parse_dfg(print_dfg(dfg))) == print_dfg(dfg));
    }
    auto example = parse_dfg(testsupport::example_text());
    CHECK(print_dfg(parse_dfg(print_dfg(example))) == print_dfg(example));
}

TEST_CASE("example fixture parses with 6 nodes and 17 edges") {
    auto dfg = parse_dfg(testsupport::example_text());
    CHECK(dfg.nodes.size() == 6);
    CHECK(dfg.edges.size() == 17);
    CHECK(dfg.inputs.size() == 7);
    CHECK(dfg.outputs.size() == 5);
}

TEST_CASE("topo order of a chain") {
    auto dfg = parse_dfg("dfg chain\ninput x\ninput y\noutput o\n"
                         "node a Add\nnode b Add\nnode c Add\n"
                         "edge e1 x -> a.0\nedge e2 y -> a.1\n"
                         "edge e3 a -> b.0\nedge e4 y -> b.1\n"
                         "edge e5 b -> c.0\nedge e6 x -> c.1\n"
                         "edge e7 c -> o\n");
    CHECK(topo_order(dfg) == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("topo order breaks ties by ascending node id") {
    auto dfg = parse_dfg("dfg diamond\ninput x\ninput y\noutput o\n"
                         "node a Add\nnode b Add\nnode c Add\nnode d Add\n"
                         "edge e1 x -> a.0\nedge e2 y -> a.1\n"
                         "edge e3 a -> b.0\nedge e4 y -> b.1\n"
                         "edge e5 a -> c.0\nedge e6 x -> c.1\n"
                         "edge e7 b -> d.0\nedge e8 c -> d.1\n"
                         "edge e9 d -> o\n");
    CHECK(topo_order(dfg) == std::vector<std::string>{"a", "b", "c", "d"});
}

TEST_CASE("topo order respects every edge on generated graphs") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        BenchSpec spec{"t", 6, 20, 50, 3, 0};
        auto dfg = gen_bench(spec, seed);
        auto order = topo_order(dfg);
        REQUIRE(order.size() == dfg.nodes.size());
        std::map<std::string, size_t> pos;
        for (size_t i = 0; i < order.size(); ++i)
            pos[order[i]] = i;
        for (const auto &e : dfg.edges)
            if (dfg.is_node(e.src) && dfg.is_node(e.dst))
                CHECK(pos.at(e.src) < pos.at(e.dst));
    }
}

TEST_CASE("fanout_count equals outgoing edge count") {
    auto dfg = parse_dfg(testsupport::example_text());
    CHECK(fanout_count(dfg, "a") == 1);
    CHECK(fanout_count(dfg, "c") == 3); // d.0, d.1, o1
    CHECK(fanout_count(dfg, "d") == 2);
    CHECK_THROWS(fanout_count(dfg, "nope"));

    // Independent edge-scan oracle over a generated graph.
    auto g = gen_bench({"t", 5, 20, 50, 4, 0}, 42);
    for (const auto &n : g.nodes) {
        int count = 0;
        for (const auto &e : g.edges)
            if (e.src == n.id)
                ++count;
        CHECK(fanout_count(g, n.id) == count);
    }
}

namespace {

// Brute-force DFS oracle, independent of the library's implementation.
std::set<std::string> po_oracle(const Dfg &dfg, const std::string &start) {
    std::set<std::string> outs;
    std::set<std::string> seen;
    std::vector<std::string> stack{start};
    while (!stack.empty()) {
        auto id = stack.back();
        stack.pop_back();
        if (!seen.insert(id).second)
            continue;
        for (const auto &e : dfg.edges)
            if (e.src == id) {
                if (dfg.is_output(e.dst))
                    outs.insert(e.dst);
                else
                    stack.push_back(e.dst);
            }
    }
    return outs;
}

} // namespace

TEST_CASE("reachable_primary_outputs on the example fixture") {
    auto dfg = parse_dfg(testsupport::example_text());
    CHECK(reachable_primary_outputs(dfg, "d") == std::set<std::string>{"o2", "o3"});
    CHECK(reachable_primary_outputs(dfg, "a") == std::set<std::string>{"o1", "o2", "o3"});
    CHECK(reachable_primary_outputs(dfg, "f") == std::set<std::string>{"o4"});
    CHECK_THROWS(reachable_primary_outputs(dfg, "nope"));
}

TEST_CASE("reachable_primary_outputs matches DFS oracle on a 20-node graph") {
    auto dfg = gen_bench({"t", 6, 20, 50, 4, 0}, 7);
    for (const auto &n : dfg.nodes)
        CHECK(reachable_primary_outputs(dfg, n.id) == po_oracle(dfg, n.id));
}

TEST_CASE("every node reaches at least one output in valid graphs") {
    auto dfg = parse_dfg(testsupport::example_text());
    for (const auto &n : dfg.nodes)
        CHECK(!reachable_primary_outputs(dfg, n.id).empty());
}
