#pragma once

// Text grammar for specifying separable models without code. One basis
// function per term, terms separated by ';':
//
//   term := expression over  x, b0..b9, real literals,
//           + - * / ^ (right-assoc), unary -, parentheses,
//           exp() log() sin() cos()
//
// "x; x^2; 1/(x+b0)"  and  "exp(b0*x); exp(b1*x); exp(b2*x)"  reproduce the
// built-in bases. A term's arity is 1 + the highest b-index it mentions.
// This grammar is a stable public format (CLI --model/--truth and config
// files).
//
// Parsing builds an explicit AST per term (kept available for inspection and
// independent re-evaluation); the shipped BasisFunction evaluates a compiled
// postfix program instead of walking the tree.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "varpro/errors.hpp"
#include "varpro/model.hpp"

namespace varpro {

namespace expr {

enum class AstKind { number, var_x, var_b, negate, add, sub, mul, div, pow, call };
enum class FuncId { exp_fn, log_fn, sin_fn, cos_fn };

inline double apply_func(FuncId f, double v) {
    switch (f) {
        case FuncId::exp_fn: return std::exp(v);
        case FuncId::log_fn: return std::log(v);
        case FuncId::sin_fn: return std::sin(v);
        case FuncId::cos_fn: return std::cos(v);
    }
    return 0.0;
}

// Tree node in a per-term arena; child fields index into the arena.
struct AstNode {
    AstKind kind;
    double number = 0.0;      // AstKind::number
    std::size_t b_index = 0;  // AstKind::var_b
    FuncId func = FuncId::exp_fn;
    std::size_t left = 0;
    std::size_t right = 0;
};

struct Ast {
    std::vector<AstNode> nodes;
    std::size_t root = 0;
};

enum class OpCode { push_const, load_x, load_b, add, sub, mul, div, pow, neg, call };

struct Instr {
    OpCode op;
    double value = 0.0;       // push_const
    std::size_t index = 0;    // load_b
    FuncId func = FuncId::exp_fn;
};

// Postfix program for a stack machine; max_depth is the exact operand-stack
// requirement, computed during compilation.
struct Program {
    std::vector<Instr> code;
    std::size_t max_depth = 0;

    double run(const Vector& b, double x) const {
        std::array<double, 64> local{};
        std::vector<double> heap;
        double* stack = local.data();
        if (max_depth > local.size()) {
            heap.resize(max_depth);
            stack = heap.data();
        }
        std::size_t sp = 0;
        for (const Instr& in : code) {
            switch (in.op) {
                case OpCode::push_const: stack[sp++] = in.value; break;
                case OpCode::load_x: stack[sp++] = x; break;
                case OpCode::load_b:
                    if (in.index >= b.size()) {
                        throw LengthError("model term reads b" + std::to_string(in.index) +
                                          " but b has length " + std::to_string(b.size()));
                    }
                    stack[sp++] = b[in.index];
                    break;
                case OpCode::add: --sp; stack[sp - 1] += stack[sp]; break;
                case OpCode::sub: --sp; stack[sp - 1] -= stack[sp]; break;
                case OpCode::mul: --sp; stack[sp - 1] *= stack[sp]; break;
                case OpCode::div: --sp; stack[sp - 1] /= stack[sp]; break;
                case OpCode::pow: --sp; stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]); break;
                case OpCode::neg: stack[sp - 1] = -stack[sp - 1]; break;
                case OpCode::call: stack[sp - 1] = apply_func(in.func, stack[sp - 1]); break;
            }
        }
        return stack[0];
    }
};

// One parsed term: tree, compiled program, and what the term references.
struct Term {
    Ast ast;
    Program program;
    std::size_t arity_b = 0;  // 1 + highest b-index mentioned; 0 when none
    bool has_x = false;
    bool has_b = false;
    std::string source;
};

namespace detail {

enum class TokKind { number, var_x, var_b, func, plus, minus, star, slash, caret,
                     lparen, rparen, semicolon, end };

struct Token {
    Token(TokKind k, std::size_t p) : kind(k), pos(p) {}

    TokKind kind;
    std::size_t pos;
    double number = 0.0;
    std::size_t b_index = 0;
    FuncId func = FuncId::exp_fn;
    std::string text;
};

inline std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        const std::size_t pos = i;
        switch (c) {
            case '+': out.push_back({TokKind::plus, pos}); ++i; continue;
            case '-': out.push_back({TokKind::minus, pos}); ++i; continue;
            case '*': out.push_back({TokKind::star, pos}); ++i; continue;
            case '/': out.push_back({TokKind::slash, pos}); ++i; continue;
            case '^': out.push_back({TokKind::caret, pos}); ++i; continue;
            case '(': out.push_back({TokKind::lparen, pos}); ++i; continue;
            case ')': out.push_back({TokKind::rparen, pos}); ++i; continue;
            case ';': out.push_back({TokKind::semicolon, pos}); ++i; continue;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            double value = 0.0;
            const char* first = src.data() + i;
            const char* last = src.data() + src.size();
            auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec != std::errc()) {
                throw ParseError("malformed number", pos, {"number"});
            }
            Token t{TokKind::number, pos};
            t.number = value;
            out.push_back(t);
            i += static_cast<std::size_t>(ptr - first);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])))) ++j;
            const std::string_view word = src.substr(i, j - i);
            Token t{TokKind::func, pos};
            if (word == "x") {
                t.kind = TokKind::var_x;
            } else if (word.size() == 2 && word[0] == 'b' &&
                       std::isdigit(static_cast<unsigned char>(word[1]))) {
                t.kind = TokKind::var_b;
                t.b_index = static_cast<std::size_t>(word[1] - '0');
            } else if (word == "exp") {
                t.func = FuncId::exp_fn;
            } else if (word == "log") {
                t.func = FuncId::log_fn;
            } else if (word == "sin") {
                t.func = FuncId::sin_fn;
            } else if (word == "cos") {
                t.func = FuncId::cos_fn;
            } else {
                throw ParseError("unknown identifier '" + std::string(word) +
                                 "' (x, b0..b9, exp, log, sin, cos)",
                                 pos, {"x", "b0..b9", "function"});
            }
            t.text = std::string(word);
            out.push_back(t);
            i = j;
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos,
                         {"operand", "operator"});
    }
    out.push_back({TokKind::end, src.size()});
    return out;
}

// expr   := term (('+'|'-') term)*
// term   := factor (('*'|'/') factor)*
// factor := '-' factor | power
// power  := atom ['^' factor]            (right-associative)
// atom   := number | x | bK | func '(' expr ')' | '(' expr ')'
class Parser {
  public:
    Parser(const std::vector<Token>& toks, std::size_t start, Ast& ast)
        : toks_(toks), ast_(ast), i_(start) {}

    std::size_t parse_expr() {
        std::size_t lhs = parse_term();
        while (peek().kind == TokKind::plus || peek().kind == TokKind::minus) {
            const bool plus = peek().kind == TokKind::plus;
            advance();
            const std::size_t rhs = parse_term();
            lhs = binary(plus ? AstKind::add : AstKind::sub, lhs, rhs);
        }
        return lhs;
    }

    std::size_t pos() const noexcept { return i_; }

  private:
    std::size_t parse_term() {
        std::size_t lhs = parse_factor();
        while (peek().kind == TokKind::star || peek().kind == TokKind::slash) {
            const bool mul = peek().kind == TokKind::star;
            advance();
            const std::size_t rhs = parse_factor();
            lhs = binary(mul ? AstKind::mul : AstKind::div, lhs, rhs);
        }
        return lhs;
    }

    std::size_t parse_factor() {
        if (peek().kind == TokKind::minus) {
            advance();
            const std::size_t child = parse_factor();
            AstNode n{AstKind::negate};
            n.left = child;
            return push(n);
        }
        return parse_power();
    }

    std::size_t parse_power() {
        const std::size_t base = parse_atom();
        if (peek().kind == TokKind::caret) {
            advance();
            const std::size_t exponent = parse_factor();
            return binary(AstKind::pow, base, exponent);
        }
        return base;
    }

    std::size_t parse_atom() {
        const Token& t = peek();
        switch (t.kind) {
            case TokKind::number: {
                advance();
                AstNode n{AstKind::number};
                n.number = t.number;
                return push(n);
            }
            case TokKind::var_x: {
                advance();
                return push(AstNode{AstKind::var_x});
            }
            case TokKind::var_b: {
                advance();
                AstNode n{AstKind::var_b};
                n.b_index = t.b_index;
                return push(n);
            }
            case TokKind::func: {
                const FuncId f = t.func;
                advance();
                expect(TokKind::lparen, "'('");
                const std::size_t arg = parse_expr();
                expect(TokKind::rparen, "')'");
                AstNode n{AstKind::call};
                n.func = f;
                n.left = arg;
                return push(n);
            }
            case TokKind::lparen: {
                advance();
                const std::size_t inner = parse_expr();
                expect(TokKind::rparen, "')'");
                return inner;
            }
            default:
                throw ParseError("expected an operand", t.pos,
                                 {"number", "x", "b0..b9", "function", "'('", "'-'"});
        }
    }

    const Token& peek() const { return toks_[i_]; }
    void advance() { ++i_; }

    void expect(TokKind k, const std::string& what) {
        if (peek().kind != k) {
            throw ParseError("expected " + what, peek().pos, {what});
        }
        advance();
    }

    std::size_t push(const AstNode& n) {
        ast_.nodes.push_back(n);
        return ast_.nodes.size() - 1;
    }

    std::size_t binary(AstKind k, std::size_t l, std::size_t r) {
        AstNode n{k};
        n.left = l;
        n.right = r;
        return push(n);
    }

    const std::vector<Token>& toks_;
    Ast& ast_;
    std::size_t i_ = 0;
};

inline void compile_node(const Ast& ast, std::size_t idx, Program& prog, std::size_t& depth,
                         Term& info) {
    const AstNode& n = ast.nodes[idx];
    auto grow = [&](std::size_t d) { prog.max_depth = std::max(prog.max_depth, d); };
    switch (n.kind) {
        case AstKind::number: {
            Instr in{OpCode::push_const};
            in.value = n.number;
            prog.code.push_back(in);
            grow(++depth);
            return;
        }
        case AstKind::var_x:
            prog.code.push_back({OpCode::load_x});
            info.has_x = true;
            grow(++depth);
            return;
        case AstKind::var_b: {
            Instr in{OpCode::load_b};
            in.index = n.b_index;
            prog.code.push_back(in);
            info.has_b = true;
            info.arity_b = std::max(info.arity_b, n.b_index + 1);
            grow(++depth);
            return;
        }
        case AstKind::negate:
            compile_node(ast, n.left, prog, depth, info);
            prog.code.push_back({OpCode::neg});
            return;
        case AstKind::call: {
            compile_node(ast, n.left, prog, depth, info);
            Instr in{OpCode::call};
            in.func = n.func;
            prog.code.push_back(in);
            return;
        }
        default: {
            compile_node(ast, n.left, prog, depth, info);
            compile_node(ast, n.right, prog, depth, info);
            OpCode op = OpCode::add;
            if (n.kind == AstKind::sub) op = OpCode::sub;
            if (n.kind == AstKind::mul) op = OpCode::mul;
            if (n.kind == AstKind::div) op = OpCode::div;
            if (n.kind == AstKind::pow) op = OpCode::pow;
            prog.code.push_back({op});
            --depth;
            return;
        }
    }
}

}  // namespace detail

// Parse the full term list; exposes ASTs and compiled programs.
inline std::vector<Term> parse_terms(std::string_view source) {
    const std::vector<detail::Token> toks = detail::lex(source);
    std::vector<Term> terms;
    std::size_t i = 0;
    while (true) {
        Term term;
        detail::Parser p(toks, i, term.ast);
        term.ast.root = p.parse_expr();
        i = p.pos();
        std::size_t depth = 0;
        detail::compile_node(term.ast, term.ast.root, term.program, depth, term);
        terms.push_back(std::move(term));

        const detail::Token& t = toks[i];
        if (t.kind == detail::TokKind::end) break;
        if (t.kind == detail::TokKind::semicolon) {
            ++i;
            continue;
        }
        throw ParseError("expected ';' or end of input", t.pos, {"';'", "end"});
    }
    return terms;
}

// Reference recursive interpretation of a parsed tree. Exists so the compiled
// program has an independent evaluation route to be checked against.
inline double eval_ast(const Ast& ast, std::size_t idx, const Vector& b, double x) {
    const AstNode& n = ast.nodes[idx];
    switch (n.kind) {
        case AstKind::number: return n.number;
        case AstKind::var_x: return x;
        case AstKind::var_b:
            if (n.b_index >= b.size()) {
                throw LengthError("eval_ast: b index out of range");
            }
            return b[n.b_index];
        case AstKind::negate: return -eval_ast(ast, n.left, b, x);
        case AstKind::add: return eval_ast(ast, n.left, b, x) + eval_ast(ast, n.right, b, x);
        case AstKind::sub: return eval_ast(ast, n.left, b, x) - eval_ast(ast, n.right, b, x);
        case AstKind::mul: return eval_ast(ast, n.left, b, x) * eval_ast(ast, n.right, b, x);
        case AstKind::div: return eval_ast(ast, n.left, b, x) / eval_ast(ast, n.right, b, x);
        case AstKind::pow:
            return std::pow(eval_ast(ast, n.left, b, x), eval_ast(ast, n.right, b, x));
        case AstKind::call: return apply_func(n.func, eval_ast(ast, n.left, b, x));
    }
    return 0.0;
}

}  // namespace expr

// Build a ModelBasis from grammar text. A term referencing neither x nor any
// b must fold to a finite constant (it becomes a constant basis column);
// otherwise it is rejected with ArityError.
inline ModelBasis parse_model(std::string_view source) {
    std::vector<expr::Term> terms = expr::parse_terms(source);
    std::vector<BasisFunction> fns;
    fns.reserve(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
        expr::Term& term = terms[t];
        if (!term.has_x && !term.has_b) {
            const double folded = term.program.run(Vector{0.0}, 0.0);
            if (!std::isfinite(folded)) {
                throw ArityError("term " + std::to_string(t) +
                                 " references neither x nor b and is not a finite constant");
            }
        }
        fns.push_back({[prog = std::move(term.program)](const Vector& b, double x) {
                           return prog.run(b, x);
                       },
                       term.arity_b});
    }
    return ModelBasis(std::move(fns));
}

// Model selection used by the CLI and config files:
//   "example1"   -> {x, x^2, 1/(x+b0)}
//   "expsum:K"   -> {exp(b0*x) .. exp(b_{K-1}*x)}
//   anything else is parsed as grammar text.
inline ModelBasis resolve_model(std::string_view spec) {
    if (spec == "example1") return example1_basis();
    constexpr std::string_view kPrefix = "expsum:";
    if (spec.substr(0, kPrefix.size()) == kPrefix) {
        const std::string_view num = spec.substr(kPrefix.size());
        std::size_t k = 0;
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), k);
        if (ec != std::errc() || ptr != num.data() + num.size() || k < 1) {
            throw ConfigError("expsum:K needs a positive integer K, got '" + std::string(spec) +
                              "'");
        }
        return exp_sum_basis(k);
    }
    return parse_model(spec);
}

}  // namespace varpro
