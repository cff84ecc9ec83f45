#include "psb/smt.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unistd.h>
#include <unordered_map>

namespace psb::smt {

namespace {

std::uint64_t width_mask(int w) {
    return w >= 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << w) - 1;
}

ExprP make(Expr e) {
    return std::make_shared<Expr>(std::move(e));
}

} // namespace

ExprP bv_const(std::uint64_t v, int w) {
    return make({Expr::Const, w, v & width_mask(w), "", nullptr, nullptr, nullptr});
}

ExprP bv_var(const std::string &name, int w) {
    return make({Expr::Var, w, 0, name, nullptr, nullptr, nullptr});
}

ExprP bv_add(ExprP a, ExprP b) {
    return make({Expr::Add, a->width, 0, "", a, b, nullptr});
}
ExprP bv_sub(ExprP a, ExprP b) {
    return make({Expr::Sub, a->width, 0, "", a, b, nullptr});
}
ExprP bv_mul(ExprP a, ExprP b) {
    return make({Expr::Mul, a->width, 0, "", a, b, nullptr});
}
ExprP bv_or(ExprP a, ExprP b) {
    return make({Expr::BOr, a->width, 0, "", a, b, nullptr});
}
ExprP bv_eq(ExprP a, ExprP b) {
    return make({Expr::Eq, 1, 0, "", a, b, nullptr});
}
ExprP bv_ite(ExprP cond1, ExprP a, ExprP b) {
    return make({Expr::Ite, a->width, 0, "", cond1, a, b});
}

namespace {

std::uint64_t eval_rec(const Expr *e, const std::map<std::string, std::uint64_t> &env,
                       std::unordered_map<const Expr *, std::uint64_t> &memo) {
    auto it = memo.find(e);
    if (it != memo.end())
        return it->second;
    std::uint64_t r = 0;
    switch (e->op) {
    case Expr::Const: r = e->cval; break;
    case Expr::Var: {
        auto v = env.find(e->name);
        if (v == env.end())
            throw std::invalid_argument("unbound variable " + e->name);
        r = v->second & width_mask(e->width);
        break;
    }
    case Expr::Add:
        r = (eval_rec(e->a.get(), env, memo) + eval_rec(e->b.get(), env, memo)) &
            width_mask(e->width);
        break;
    case Expr::Sub:
        r = (eval_rec(e->a.get(), env, memo) - eval_rec(e->b.get(), env, memo)) &
            width_mask(e->width);
        break;
    case Expr::Mul:
        r = (eval_rec(e->a.get(), env, memo) * eval_rec(e->b.get(), env, memo)) &
            width_mask(e->width);
        break;
    case Expr::BOr:
        r = eval_rec(e->a.get(), env, memo) | eval_rec(e->b.get(), env, memo);
        break;
    case Expr::Eq:
        r = eval_rec(e->a.get(), env, memo) == eval_rec(e->b.get(), env, memo) ? 1 : 0;
        break;
    case Expr::Ite:
        r = eval_rec(e->a.get(), env, memo) ? eval_rec(e->b.get(), env, memo)
                                            : eval_rec(e->c.get(), env, memo);
        break;
    }
    memo[e] = r;
    return r;
}

} // namespace

std::uint64_t eval(const ExprP &e, const std::map<std::string, std::uint64_t> &env) {
    std::unordered_map<const Expr *, std::uint64_t> memo;
    return eval_rec(e.get(), env, memo);
}

Encoding encode_design(const LockedDesign &ld, const std::string &key_prefix,
                       const std::optional<SimInput> &fixed_input) {
    if (ld.policy != CorruptionPolicy::WiredOr)
        throw std::invalid_argument("SMT encoding supports the WiredOr policy only");
    const auto &nl = ld.netlist;
    Encoding enc;
    enc.W = nl.W;

    std::map<std::string, ExprP> input_expr;
    for (const auto &pi : nl.input_order) {
        std::string var = "in_" + pi;
        enc.input_vars.push_back(var);
        if (fixed_input)
            input_expr[pi] = bv_const(fixed_input->values.at(pi), nl.W);
        else
            input_expr[pi] = bv_var(var, nl.W);
    }
    std::vector<std::array<ExprP, 8>> key_bits(ld.sbs.size());
    for (size_t s = 0; s < ld.sbs.size(); ++s)
        for (int b = 0; b < 8; ++b) {
            std::string var = key_prefix + "_" + std::to_string(8 * s + static_cast<size_t>(b));
            enc.key_vars.push_back(var);
            key_bits[s][static_cast<size_t>(b)] = bv_var(var, 1);
        }

    std::vector<ExprP> regs(static_cast<size_t>(nl.reg_count), bv_const(0, nl.W));
    for (const auto &[pi, reg] : nl.inputs)
        regs[static_cast<size_t>(reg)] = input_expr.at(pi);

    ExprP zero = bv_const(0, nl.W);
    for (int t = 1; t <= nl.L; ++t) {
        const auto &cw = nl.ctrl[static_cast<size_t>(t - 1)];
        std::map<std::string, ExprP> nets;
        for (int r = 0; r < nl.reg_count; ++r)
            nets["reg:" + std::to_string(r)] = regs[static_cast<size_t>(r)];
        for (const auto &m : nl.muxes) {
            auto it = cw.sel.find(m.id);
            int code = it == cw.sel.end() ? 0 : it->second;
            nets["mux:" + std::to_string(m.id)] = nets.at(m.ins[static_cast<size_t>(code)]);
        }
        for (size_t s = 0; s < ld.sbs.size(); ++s) {
            const auto &sb = ld.sbs[s];
            ExprP x = nets.at(sb.x_net);
            ExprP y = nets.at(sb.y_net);
            const auto &k = key_bits[s];
            ExprP t1 = bv_eq(k[0], k[1]); // X-Z
            ExprP t2 = bv_eq(k[2], k[3]); // X-W
            ExprP t3 = bv_eq(k[4], k[5]); // Y-Z
            ExprP t4 = bv_eq(k[6], k[7]); // Y-W
            nets["sb:" + std::to_string(sb.id) + ":z"] =
                bv_or(bv_ite(t1, x, zero), bv_ite(t3, y, zero));
            nets["sb:" + std::to_string(sb.id) + ":w"] =
                bv_or(bv_ite(t2, x, zero), bv_ite(t4, y, zero));
        }
        std::vector<ExprP> fu_out(nl.fus.size());
        for (size_t f = 0; f < nl.fus.size(); ++f) {
            const auto &fu = nl.fus[f];
            ExprP a = fu.port[0].empty() ? zero : nets.at(fu.port[0]);
            ExprP b = fu.port[1].empty() ? zero : nets.at(fu.port[1]);
            switch (fu.kind) {
            case OpKind::Add: fu_out[f] = bv_add(a, b); break;
            case OpKind::Sub: fu_out[f] = bv_sub(a, b); break;
            case OpKind::Mul: fu_out[f] = bv_mul(a, b); break;
            }
            nets["fu:" + std::to_string(fu.id)] = fu_out[f];
        }
        for (const auto &ldr : cw.loads)
            regs[static_cast<size_t>(ldr.reg)] = nets.at(ldr.src);
    }
    for (const auto &[id, reg] : nl.outputs)
        enc.outputs[id] = regs[static_cast<size_t>(reg)];
    return enc;
}

SimResult eval_encoding(const LockedDesign &ld, const std::vector<SbKey> &key,
                        const SimInput &input) {
    auto enc = encode_design(ld, "k");
    std::map<std::string, std::uint64_t> env;
    for (const auto &pi : ld.netlist.input_order)
        env["in_" + pi] = input.values.at(pi);
    for (size_t s = 0; s < key.size(); ++s)
        for (int b = 0; b < 8; ++b)
            env["k_" + std::to_string(8 * s + static_cast<size_t>(b))] =
                static_cast<std::uint64_t>(key[s].bits[static_cast<size_t>(b)]);
    SimResult result;
    std::unordered_map<const Expr *, std::uint64_t> memo;
    for (const auto &[id, e] : enc.outputs)
        result.outputs[id] = {static_cast<Word>(eval_rec(e.get(), env, memo)), 0};
    return result;
}

namespace {

// Emits the DAG as numbered define-funs; returns the symbol for e.
class Emitter {
  public:
    explicit Emitter(std::ostream &out) : out_(out) {}

    std::string emit(const ExprP &e) {
        auto it = names_.find(e.get());
        if (it != names_.end())
            return it->second;
        std::string sym;
        switch (e->op) {
        case Expr::Const: {
            std::ostringstream v;
            if (e->width % 4 == 0) {
                v << "#x" << std::hex << std::setw(e->width / 4) << std::setfill('0') << e->cval;
            } else {
                v << "#b";
                for (int i = e->width - 1; i >= 0; --i)
                    v << ((e->cval >> i) & 1);
            }
            sym = v.str();
            break;
        }
        case Expr::Var:
            declare(e->name, e->width);
            sym = e->name;
            break;
        default: {
            std::string a = emit(e->a);
            std::string b = e->b ? emit(e->b) : "";
            std::string c = e->c ? emit(e->c) : "";
            std::ostringstream body;
            switch (e->op) {
            case Expr::Add: body << "(bvadd " << a << " " << b << ")"; break;
            case Expr::Sub: body << "(bvsub " << a << " " << b << ")"; break;
            case Expr::Mul: body << "(bvmul " << a << " " << b << ")"; break;
            case Expr::BOr: body << "(bvor " << a << " " << b << ")"; break;
            case Expr::Eq: body << "(ite (= " << a << " " << b << ") #b1 #b0)"; break;
            case Expr::Ite:
                body << "(ite (= " << a << " #b1) " << b << " " << c << ")";
                break;
            default: break;
            }
            sym = "t" + std::to_string(counter_++);
            out_ << "(define-fun " << sym << " () (_ BitVec " << e->width << ") " << body.str()
                 << ")\n";
            break;
        }
        }
        names_[e.get()] = sym;
        return sym;
    }

    void declare(const std::string &name, int width) {
        if (declared_.insert(name).second)
            decls_ << "(declare-const " << name << " (_ BitVec " << width << "))\n";
    }

    std::string decls() const { return decls_.str(); }

  private:
    std::ostream &out_;
    std::ostringstream decls_;
    std::unordered_map<const Expr *, std::string> names_;
    std::set<std::string> declared_;
    int counter_ = 0;
};

void emit_constraint_asserts(Emitter &em, std::ostream &body, const LockedDesign &ld,
                             const std::string &key_prefix,
                             const std::vector<OracleConstraint> &constraints) {
    for (const auto &cst : constraints) {
        auto enc = encode_design(ld, key_prefix, cst.input);
        for (const auto &[id, e] : enc.outputs) {
            std::string sym = em.emit(e);
            body << "(assert (= " << sym << " ";
            auto v = bv_const(cst.output.outputs.at(id).value, ld.netlist.W);
            body << em.emit(v) << "))\n";
        }
    }
}

} // namespace

std::string to_smtlib_dip(const LockedDesign &ld,
                          const std::vector<OracleConstraint> &constraints) {
    std::ostringstream defs, body;
    Emitter em(defs);
    auto enc_a = encode_design(ld, "ka");
    auto enc_b = encode_design(ld, "kb");
    for (const auto &v : enc_a.input_vars)
        em.declare(v, ld.netlist.W);
    for (const auto &v : enc_a.key_vars)
        em.declare(v, 1);
    for (const auto &v : enc_b.key_vars)
        em.declare(v, 1);

    std::vector<std::string> diffs;
    for (const auto &[id, ea] : enc_a.outputs) {
        std::string sa = em.emit(ea);
        std::string sb = em.emit(enc_b.outputs.at(id));
        diffs.push_back("(not (= " + sa + " " + sb + "))");
    }
    body << "(assert (or";
    for (const auto &d : diffs)
        body << " " << d;
    body << "))\n";
    emit_constraint_asserts(em, body, ld, "ka", constraints);
    emit_constraint_asserts(em, body, ld, "kb", constraints);

    std::ostringstream out;
    out << "(set-logic QF_BV)\n" << em.decls() << defs.str() << body.str() << "(check-sat)\n";
    for (const auto &v : enc_a.input_vars)
        out << "(get-value (" << v << "))\n";
    for (const auto &v : enc_a.key_vars)
        out << "(get-value (" << v << "))\n";
    for (const auto &v : enc_b.key_vars)
        out << "(get-value (" << v << "))\n";
    return out.str();
}

std::string to_smtlib_consistent_key(const LockedDesign &ld,
                                     const std::vector<OracleConstraint> &constraints) {
    std::ostringstream defs, body;
    Emitter em(defs);
    auto enc = encode_design(ld, "ka");
    for (const auto &v : enc.key_vars)
        em.declare(v, 1);
    emit_constraint_asserts(em, body, ld, "ka", constraints);
    std::ostringstream out;
    out << "(set-logic QF_BV)\n" << em.decls() << defs.str() << body.str() << "(check-sat)\n";
    for (const auto &v : enc.key_vars)
        out << "(get-value (" << v << "))\n";
    return out.str();
}

SolverModel run_solver(const std::string &solver_cmd, const std::string &smtlib_text) {
    char tmpl[] = "/tmp/psb_smt_XXXXXX";
    int fd = mkstemp(tmpl);
    if (fd < 0)
        throw std::runtime_error("cannot create temp file for solver");
    {
        std::ofstream f(tmpl);
        f << smtlib_text;
    }
    std::string cmd = solver_cmd + " " + tmpl + " 2>/dev/null";
    FILE *pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        ::close(fd);
        std::remove(tmpl);
        throw std::runtime_error("cannot run solver: " + solver_cmd);
    }
    std::string output;
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof(buf), pipe))
        output.append(buf, n);
    pclose(pipe);
    ::close(fd);
    std::remove(tmpl);

    SolverModel model;
    std::istringstream lines(output);
    std::string line;
    while (std::getline(lines, line)) {
        if (line == "sat") {
            model.sat = true;
            continue;
        }
        if (line == "unsat")
            return model;
        // ((name #xNN)) or ((name #b1)) or ((name (_ bvN W)))
        auto open = line.find("((");
        if (open == std::string::npos)
            continue;
        std::istringstream ls(line.substr(open + 2));
        std::string name, val;
        ls >> name;
        std::getline(ls, val);
        while (!val.empty() && (val.back() == ')' || val.back() == ' '))
            val.pop_back();
        while (!val.empty() && val.front() == ' ')
            val.erase(val.begin());
        std::uint64_t v = 0;
        if (val.rfind("#x", 0) == 0)
            v = std::stoull(val.substr(2), nullptr, 16);
        else if (val.rfind("#b", 0) == 0)
            v = std::stoull(val.substr(2), nullptr, 2);
        else if (val.rfind("(_ bv", 0) == 0)
            v = std::stoull(val.substr(5), nullptr, 10);
        else
            continue;
        model.values[name] = v;
    }
    return model;
}

} // namespace psb::smt
