#pragma once

#include "psb/lock.hpp"
#include "psb/sim.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace psb::smt {

// Small bit-vector expression DAG: enough to unroll a loop-free datapath
// into QF_BV and to evaluate the same encoding concretely.
struct Expr;
using ExprP = std::shared_ptr<const Expr>;

struct Expr {
    enum Op { Const, Var, Add, Sub, Mul, BOr, Eq, Ite } op;
    int width;
    std::uint64_t cval = 0; // Const
    std::string name;       // Var
    ExprP a, b, c;
};

ExprP bv_const(std::uint64_t v, int w);
ExprP bv_var(const std::string &name, int w);
ExprP bv_add(ExprP a, ExprP b);
ExprP bv_sub(ExprP a, ExprP b);
ExprP bv_mul(ExprP a, ExprP b);
ExprP bv_or(ExprP a, ExprP b);
ExprP bv_eq(ExprP a, ExprP b);              // 1-bit result
ExprP bv_ite(ExprP cond1, ExprP a, ExprP b); // cond is 1-bit

std::uint64_t eval(const ExprP &e, const std::map<std::string, std::uint64_t> &env);

struct Encoding {
    int W = 8;
    std::vector<std::string> input_vars;  // one per primary input, in order
    std::vector<std::string> key_vars;    // 8 per SB, 1-bit each
    std::map<std::string, ExprP> outputs; // primary output id -> expression
};

// Symbolic unrolling of all L steps. Key bits become variables named
// <key_prefix>_<i>; inputs become variables in_<pi> unless fixed.
// Requires the WiredOr corruption policy.
Encoding encode_design(const LockedDesign &ld, const std::string &key_prefix,
                       const std::optional<SimInput> &fixed_input = std::nullopt);

// Evaluates the symbolic encoding on concrete key/input (encoder's
// internal evaluator; used to cross-check against the simulator).
SimResult eval_encoding(const LockedDesign &ld, const std::vector<SbKey> &key,
                        const SimInput &input);

struct OracleConstraint {
    SimInput input;
    SimResult output;
};

// Miter over two key copies asserting output disagreement, plus the
// recorded oracle constraints on both copies. A model is a DIP.
std::string to_smtlib_dip(const LockedDesign &ld,
                          const std::vector<OracleConstraint> &constraints);

// Satisfiable iff some key agrees with every recorded constraint.
std::string to_smtlib_consistent_key(const LockedDesign &ld,
                                     const std::vector<OracleConstraint> &constraints);

struct SolverModel {
    bool sat = false;
    std::map<std::string, std::uint64_t> values;
};

// Runs `solver_cmd <file>` on the given SMT-LIB text and parses the
// check-sat / get-value response.
SolverModel run_solver(const std::string &solver_cmd, const std::string &smtlib_text);

} // namespace psb::smt
