#pragma once

// Mechanism formula language.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')' | '-' factor
//   FUNC   := tanh | sin | cos
//
// A '-' applied directly to a numeric literal folds into a negative constant,
// so printing and re-parsing a tree reproduces it node for node.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cyscm {

enum class UnaryOp { Neg, Tanh, Sin, Cos };
enum class BinaryOp { Add, Sub, Mul, Div };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct Constant {
    double value;
};

// References carry the symbol name they were parsed from so a tree can be
// checked against the model it is placed in.
struct VarRef {
    std::size_t index;
    std::string name;
};

struct NoiseRef {
    std::size_t index;
    std::string name;
};

struct Unary {
    UnaryOp op;
    ExprPtr child;
};

struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};

struct ExprNode {
    std::variant<Constant, VarRef, NoiseRef, Unary, Binary> node;
};

ExprPtr make_constant(double value);
ExprPtr make_var(std::size_t index, std::string name);
ExprPtr make_noise(std::size_t index, std::string name);
ExprPtr make_unary(UnaryOp op, ExprPtr child);
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);

// Deep structural equality. Constants compare bitwise-equal as doubles.
bool structurally_equal(const ExprNode& a, const ExprNode& b);

struct Symbol {
    enum class Kind { Endogenous, Exogenous };
    Kind kind;
    std::size_t index;
};

class SymbolTable {
public:
    SymbolTable() = default;

    // Endogenous names map to their position; "e_" + name maps to the noise term of that position.
    static SymbolTable for_variables(std::span<const std::string> names);

    void add(std::string name, Symbol symbol);
    const Symbol* find(std::string_view name) const;

private:
    std::map<std::string, Symbol, std::less<>> symbols_;
};

// Throws ExprError (syntax error, unknown identifier, unknown function) with a
// 0-based character position.
ExprPtr parse_expr(std::string_view text, const SymbolTable& symbols);

// Plain real arithmetic; NaN and Inf propagate.
double eval_expr(const ExprNode& node, std::span<const double> x, std::span<const double> e);

// Formula text that parses back to the same tree.
std::string to_formula(const ExprNode& node);

bool contains_division(const ExprNode& node);

struct ExprReferences {
    std::vector<std::size_t> variables;  // sorted, unique
    std::vector<std::size_t> noises;     // sorted, unique
};

ExprReferences collect_references(const ExprNode& node);

// Visits every VarRef and NoiseRef with its node.
void for_each_reference(const ExprNode& node, const std::function<void(const VarRef*, const NoiseRef*)>& fn);

// Per-variable bounds on sup |d expr / d x_k| over all states and noise values.
// Throws Uncertifiable when a division or a product of two state-dependent (or
// noise-scaled state-dependent) factors appears.
std::vector<double> derivative_bounds(const ExprNode& node, std::size_t n_variables);

}  // namespace cyscm
