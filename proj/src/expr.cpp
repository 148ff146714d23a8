#include "cyscm/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>

#include "cyscm/errors.hpp"

namespace cyscm {

ExprPtr make_constant(double value) { return std::make_shared<const ExprNode>(ExprNode{Constant{value}}); }

ExprPtr make_var(std::size_t index, std::string name) {
    return std::make_shared<const ExprNode>(ExprNode{VarRef{index, std::move(name)}});
}

ExprPtr make_noise(std::size_t index, std::string name) {
    return std::make_shared<const ExprNode>(ExprNode{NoiseRef{index, std::move(name)}});
}

ExprPtr make_unary(UnaryOp op, ExprPtr child) {
    return std::make_shared<const ExprNode>(ExprNode{Unary{op, std::move(child)}});
}

ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    return std::make_shared<const ExprNode>(ExprNode{Binary{op, std::move(lhs), std::move(rhs)}});
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool same_bits(double a, double b) {
    return std::signbit(a) == std::signbit(b) && (a == b || (std::isnan(a) && std::isnan(b)));
}

}  // namespace

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        overloaded{
            [&](const Constant& c) { return same_bits(c.value, std::get<Constant>(b.node).value); },
            [&](const VarRef& v) {
                const auto& o = std::get<VarRef>(b.node);
                return v.index == o.index && v.name == o.name;
            },
            [&](const NoiseRef& v) {
                const auto& o = std::get<NoiseRef>(b.node);
                return v.index == o.index && v.name == o.name;
            },
            [&](const Unary& u) {
                const auto& o = std::get<Unary>(b.node);
                return u.op == o.op && structurally_equal(*u.child, *o.child);
            },
            [&](const Binary& bin) {
                const auto& o = std::get<Binary>(b.node);
                return bin.op == o.op && structurally_equal(*bin.lhs, *o.lhs) && structurally_equal(*bin.rhs, *o.rhs);
            },
        },
        a.node);
}

SymbolTable SymbolTable::for_variables(std::span<const std::string> names) {
    SymbolTable table;
    for (std::size_t i = 0; i < names.size(); ++i) {
        table.add(names[i], {Symbol::Kind::Endogenous, i});
        table.add("e_" + names[i], {Symbol::Kind::Exogenous, i});
    }
    return table;
}

void SymbolTable::add(std::string name, Symbol symbol) { symbols_.insert_or_assign(std::move(name), symbol); }

const Symbol* SymbolTable::find(std::string_view name) const {
    auto it = symbols_.find(name);
    return it == symbols_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, LParen, RParen, End };

struct Token {
    Tok kind;
    std::size_t pos;
    std::string_view text;
    double number = 0.0;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::size_t start = pos_;
        if (pos_ >= text_.size()) return {Tok::End, start, {}};
        const char c = text_[pos_];
        switch (c) {
        case '+': ++pos_; return {Tok::Plus, start, text_.substr(start, 1)};
        case '-': ++pos_; return {Tok::Minus, start, text_.substr(start, 1)};
        case '*': ++pos_; return {Tok::Star, start, text_.substr(start, 1)};
        case '/': ++pos_; return {Tok::Slash, start, text_.substr(start, 1)};
        case '(': ++pos_; return {Tok::LParen, start, text_.substr(start, 1)};
        case ')': ++pos_; return {Tok::RParen, start, text_.substr(start, 1)};
        default: break;
        }
        if (is_digit(c) || (c == '.' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1]))) return number(start);
        if (is_ident_start(c)) {
            while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
            return {Tok::Ident, start, text_.substr(start, pos_ - start)};
        }
        throw ExprError(ExprError::Kind::Syntax, std::string("unexpected character '") + c + "'", start);
    }

private:
    Token number(std::size_t start) {
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
            if (look < text_.size() && is_digit(text_[look])) {
                pos_ = look;
                while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
            }
        }
        const std::string_view lexeme = text_.substr(start, pos_ - start);
        double value = 0.0;
        // from_chars rejects a leading '.', so parse ".5" as "0.5"
        std::string buffer = lexeme.front() == '.' ? "0" + std::string(lexeme) : std::string(lexeme);
        auto [ptr, ec] = std::from_chars(buffer.data(), buffer.data() + buffer.size(), value);
        if (ec == std::errc::result_out_of_range) {
            value = std::strtod(buffer.c_str(), nullptr);
        } else if (ec != std::errc() || ptr != buffer.data() + buffer.size()) {
            throw ExprError(ExprError::Kind::Syntax, "malformed number '" + std::string(lexeme) + "'", start);
        }
        Token t{Tok::Number, start, lexeme};
        t.number = value;
        return t;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::optional<UnaryOp> function_named(std::string_view name) {
    if (name == "tanh") return UnaryOp::Tanh;
    if (name == "sin") return UnaryOp::Sin;
    if (name == "cos") return UnaryOp::Cos;
    return std::nullopt;
}

std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + std::string(t.text) + "'";
}

class Parser {
public:
    Parser(std::string_view text, const SymbolTable& symbols) : lexer_(text), symbols_(symbols) { advance(); }

    ExprPtr parse() {
        ExprPtr root = expr();
        if (current_.kind != Tok::End) syntax("unexpected " + describe(current_));
        return root;
    }

private:
    void advance() { current_ = lexer_.next(); }

    [[noreturn]] void syntax(const std::string& what) {
        throw ExprError(ExprError::Kind::Syntax, "syntax error: " + what, current_.pos);
    }

    void expect(Tok kind, const char* what) {
        if (current_.kind != kind) syntax(std::string("expected ") + what + ", found " + describe(current_));
        advance();
    }

    ExprPtr expr() {
        ExprPtr lhs = term();
        while (current_.kind == Tok::Plus || current_.kind == Tok::Minus) {
            const BinaryOp op = current_.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
            advance();
            lhs = make_binary(op, std::move(lhs), term());
        }
        return lhs;
    }

    ExprPtr term() {
        ExprPtr lhs = factor();
        while (current_.kind == Tok::Star || current_.kind == Tok::Slash) {
            const BinaryOp op = current_.kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
            advance();
            lhs = make_binary(op, std::move(lhs), factor());
        }
        return lhs;
    }

    ExprPtr factor() {
        const Token tok = current_;
        switch (tok.kind) {
        case Tok::Number:
            advance();
            return make_constant(tok.number);
        case Tok::Minus:
            advance();
            if (current_.kind == Tok::Number) {
                const double v = current_.number;
                advance();
                return make_constant(-v);
            }
            return make_unary(UnaryOp::Neg, factor());
        case Tok::LParen: {
            advance();
            ExprPtr inner = expr();
            expect(Tok::RParen, "')'");
            return inner;
        }
        case Tok::Ident: {
            advance();
            if (current_.kind == Tok::LParen) {
                const auto fn = function_named(tok.text);
                if (!fn)
                    throw ExprError(ExprError::Kind::UnknownFunction, "unknown function '" + std::string(tok.text) + "'",
                                    tok.pos);
                advance();
                ExprPtr arg = expr();
                expect(Tok::RParen, "')'");
                return make_unary(*fn, std::move(arg));
            }
            const Symbol* sym = symbols_.find(tok.text);
            if (!sym)
                throw ExprError(ExprError::Kind::UnknownIdentifier, "unknown identifier '" + std::string(tok.text) + "'",
                                tok.pos);
            if (sym->kind == Symbol::Kind::Endogenous) return make_var(sym->index, std::string(tok.text));
            return make_noise(sym->index, std::string(tok.text));
        }
        default:
            syntax("unexpected " + describe(tok));
        }
    }

    Lexer lexer_;
    const SymbolTable& symbols_;
    Token current_{Tok::End, 0, {}};
};

}  // namespace

ExprPtr parse_expr(std::string_view text, const SymbolTable& symbols) { return Parser(text, symbols).parse(); }

// ---------------------------------------------------------------------------
// Evaluation

double eval_expr(const ExprNode& node, std::span<const double> x, std::span<const double> e) {
    return std::visit(overloaded{
                          [](const Constant& c) { return c.value; },
                          [&](const VarRef& v) { return x[v.index]; },
                          [&](const NoiseRef& v) { return e[v.index]; },
                          [&](const Unary& u) {
                              const double a = eval_expr(*u.child, x, e);
                              switch (u.op) {
                              case UnaryOp::Neg: return -a;
                              case UnaryOp::Tanh: return std::tanh(a);
                              case UnaryOp::Sin: return std::sin(a);
                              case UnaryOp::Cos: return std::cos(a);
                              }
                              return a;
                          },
                          [&](const Binary& b) {
                              const double l = eval_expr(*b.lhs, x, e);
                              const double r = eval_expr(*b.rhs, x, e);
                              switch (b.op) {
                              case BinaryOp::Add: return l + r;
                              case BinaryOp::Sub: return l - r;
                              case BinaryOp::Mul: return l * r;
                              case BinaryOp::Div: return l / r;
                              }
                              return l;
                          },
                      },
                      node.node);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

int precedence(const ExprNode& node) {
    if (const auto* b = std::get_if<Binary>(&node.node))
        return (b->op == BinaryOp::Add || b->op == BinaryOp::Sub) ? 1 : 2;
    return 3;
}

const char* op_text(BinaryOp op) {
    switch (op) {
    case BinaryOp::Add: return " + ";
    case BinaryOp::Sub: return " - ";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    }
    return "?";
}

void print(const ExprNode& node, std::string& out);

void print_operand(const ExprNode& child, int parent_prec, bool right, std::string& out) {
    const int prec = precedence(child);
    // left-associative: an equal-precedence right operand needs parentheses
    const bool wrap = prec < parent_prec || (right && prec == parent_prec);
    if (wrap) out += '(';
    print(child, out);
    if (wrap) out += ')';
}

void print(const ExprNode& node, std::string& out) {
    std::visit(overloaded{
                   [&](const Constant& c) { out += format_number(c.value); },
                   [&](const VarRef& v) { out += v.name; },
                   [&](const NoiseRef& v) { out += v.name; },
                   [&](const Unary& u) {
                       if (u.op == UnaryOp::Neg) {
                           out += '-';
                           // constants and binaries are wrapped so the literal is not folded
                           const bool wrap = std::holds_alternative<Constant>(u.child->node) ||
                                             std::holds_alternative<Binary>(u.child->node);
                           if (wrap) out += '(';
                           print(*u.child, out);
                           if (wrap) out += ')';
                           return;
                       }
                       out += u.op == UnaryOp::Tanh ? "tanh(" : u.op == UnaryOp::Sin ? "sin(" : "cos(";
                       print(*u.child, out);
                       out += ')';
                   },
                   [&](const Binary& b) {
                       const int prec = precedence(node);
                       print_operand(*b.lhs, prec, false, out);
                       out += op_text(b.op);
                       print_operand(*b.rhs, prec, true, out);
                   },
               },
               node.node);
}

}  // namespace

std::string to_formula(const ExprNode& node) {
    std::string out;
    print(node, out);
    return out;
}

// ---------------------------------------------------------------------------
// Structural queries

bool contains_division(const ExprNode& node) {
    return std::visit(overloaded{
                          [](const Unary& u) { return contains_division(*u.child); },
                          [](const Binary& b) {
                              return b.op == BinaryOp::Div || contains_division(*b.lhs) || contains_division(*b.rhs);
                          },
                          [](const auto&) { return false; },
                      },
                      node.node);
}

void for_each_reference(const ExprNode& node, const std::function<void(const VarRef*, const NoiseRef*)>& fn) {
    std::visit(overloaded{
                   [&](const Constant&) {},
                   [&](const VarRef& v) { fn(&v, nullptr); },
                   [&](const NoiseRef& v) { fn(nullptr, &v); },
                   [&](const Unary& u) { for_each_reference(*u.child, fn); },
                   [&](const Binary& b) {
                       for_each_reference(*b.lhs, fn);
                       for_each_reference(*b.rhs, fn);
                   },
               },
               node.node);
}

ExprReferences collect_references(const ExprNode& node) {
    std::set<std::size_t> vars;
    std::set<std::size_t> noises;
    for_each_reference(node, [&](const VarRef* v, const NoiseRef* e) {
        if (v) vars.insert(v->index);
        if (e) noises.insert(e->index);
    });
    return {{vars.begin(), vars.end()}, {noises.begin(), noises.end()}};
}

namespace {

struct DerivativeInfo {
    bool has_state = false;  // depends on some x_k
    bool has_noise = false;
    double value = 0.0;      // meaningful only when neither flag is set
    std::vector<double> bounds;
};

bool is_numeric(const DerivativeInfo& d) { return !d.has_state && !d.has_noise; }

DerivativeInfo derivative_info(const ExprNode& node, std::size_t n) {
    return std::visit(
        overloaded{
            [&](const Constant& c) {
                DerivativeInfo d;
                d.value = c.value;
                d.bounds.assign(n, 0.0);
                return d;
            },
            [&](const VarRef& v) {
                DerivativeInfo d;
                d.has_state = true;
                d.bounds.assign(n, 0.0);
                if (v.index >= n) throw Uncertifiable("variable reference '" + v.name + "' out of range");
                d.bounds[v.index] = 1.0;
                return d;
            },
            [&](const NoiseRef&) {
                DerivativeInfo d;
                d.has_noise = true;
                d.bounds.assign(n, 0.0);
                return d;
            },
            [&](const Unary& u) {
                DerivativeInfo d = derivative_info(*u.child, n);
                // |tanh'|, |sin'|, |cos'| <= 1, and negation preserves magnitudes
                if (is_numeric(d)) {
                    const ExprNode probe{Unary{u.op, make_constant(d.value)}};
                    d.value = eval_expr(probe, {}, {});
                }
                return d;
            },
            [&](const Binary& b) {
                if (b.op == BinaryOp::Div) throw Uncertifiable("division disqualifies automated certification");
                DerivativeInfo l = derivative_info(*b.lhs, n);
                DerivativeInfo r = derivative_info(*b.rhs, n);
                DerivativeInfo d;
                d.has_state = l.has_state || r.has_state;
                d.has_noise = l.has_noise || r.has_noise;
                d.bounds.assign(n, 0.0);
                if (b.op == BinaryOp::Add || b.op == BinaryOp::Sub) {
                    for (std::size_t k = 0; k < n; ++k) d.bounds[k] = l.bounds[k] + r.bounds[k];
                    if (is_numeric(d)) d.value = b.op == BinaryOp::Add ? l.value + r.value : l.value - r.value;
                    return d;
                }
                // multiplication
                if (!l.has_state && !r.has_state) {
                    if (is_numeric(d)) d.value = l.value * r.value;
                    return d;
                }
                const DerivativeInfo* scale = is_numeric(l) ? &l : is_numeric(r) ? &r : nullptr;
                if (!scale) throw Uncertifiable("non-affine product: state-dependent factor multiplied by a non-constant");
                const DerivativeInfo& other = scale == &l ? r : l;
                const double c = std::abs(scale->value);
                if (!std::isfinite(c)) throw Uncertifiable("non-finite constant factor");
                for (std::size_t k = 0; k < n; ++k) d.bounds[k] = c * other.bounds[k];
                return d;
            },
        },
        node.node);
}

}  // namespace

std::vector<double> derivative_bounds(const ExprNode& node, std::size_t n_variables) {
    return derivative_info(node, n_variables).bounds;
}

}  // namespace cyscm
