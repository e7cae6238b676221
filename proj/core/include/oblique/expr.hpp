#ifndef OBLIQUE_EXPR_HPP
#define OBLIQUE_EXPR_HPP

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace oblique {

/// Parse failure: carries the byte offset into the source text.
class ExprError : public std::runtime_error {
public:
    ExprError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluation failure: division by zero, log of a non-positive value,
/// sqrt of a negative value, or an invalid power.
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parsed scalar expression over a fixed set of variables.
///
/// Immutable after parse; eval() is pure and safe to call concurrently.
/// Grammar, lowest to highest precedence:
///   additive (+, -)  <  multiplicative (*, /)  <  power (^, right-assoc)
///   <  unary minus  <  atoms (number, variable, call, parenthesized)
/// Builtins: exp, log, abs, sqrt (unary); min, max, pow (binary).
class Expression {
public:
    /// Evaluate with variable values in the order of the allowed_vars list
    /// given at parse time.
    double eval(std::span<const double> values) const;

    /// Evaluate with named bindings; every variable of the expression must
    /// be bound.
    double eval(const std::map<std::string, double>& bindings) const;

    /// Render to text. Guaranteed to re-parse to a structurally identical
    /// tree under the same variable set.
    std::string to_string() const;

    /// Structural tree equality (same shape, operators, names, constants).
    bool identical(const Expression& other) const;

    const std::vector<std::string>& variables() const { return vars_; }

    enum class NodeKind { Constant, Variable, Unary, Binary, Call };

    // One flat pool; children refer to pool indices. Index 0 is unused so
    // that 0 can mean "no child".
    struct Node {
        NodeKind kind{};
        double value = 0.0;   // Constant (always >= 0; sign comes from Unary)
        int var_slot = -1;    // Variable
        char op = 0;          // Unary ('-') / Binary ('+','-','*','/','^')
        int lhs = 0, rhs = 0; // Binary / Unary (lhs)
        int builtin = -1;     // Call
        std::vector<int> args;
    };

    const std::vector<Node>& nodes() const { return nodes_; }
    int root() const { return root_; }

private:
    friend Expression parse_expression(std::string_view, std::vector<std::string>);

    std::vector<Node> nodes_;
    int root_ = 0;
    std::vector<std::string> vars_;

    double eval_node(int idx, std::span<const double> values) const;
    void print_node(int idx, std::string& out) const;
};

/// Parse `src` over the given variable names. Unknown identifiers, arity
/// mistakes, and malformed syntax throw ExprError with a byte offset.
Expression parse_expression(std::string_view src, std::vector<std::string> allowed_vars);

} // namespace oblique

#endif
