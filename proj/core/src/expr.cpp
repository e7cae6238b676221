#include "oblique/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>

namespace oblique {

namespace {

struct Builtin {
    const char* name;
    int arity;
};

// Order defines the builtin id stored in Call nodes.
constexpr Builtin kBuiltins[] = {
    {"exp", 1}, {"log", 1}, {"abs", 1}, {"sqrt", 1},
    {"min", 2}, {"max", 2}, {"pow", 2},
};

int builtin_id(std::string_view name) {
    for (int i = 0; i < static_cast<int>(std::size(kBuiltins)); ++i)
        if (name == kBuiltins[i].name) return i;
    return -1;
}

// Integer power by squaring; k may be negative.
double ipow(double x, long long k) {
    if (k < 0) return 1.0 / ipow(x, -k);
    double acc = 1.0, base = x;
    while (k > 0) {
        if (k & 1) acc *= base;
        base *= base;
        k >>= 1;
    }
    return acc;
}

// ^ with a negative base is allowed only for (near-)integer exponents;
// detection tolerance 1e-12 on |e - round(e)|.
double checked_pow(double base, double expo) {
    if (base == 0.0) {
        if (expo < 0.0) throw EvalError("0 raised to a negative power");
        return expo == 0.0 ? 1.0 : 0.0;
    }
    if (base < 0.0) {
        double r = std::round(expo);
        if (std::abs(expo - r) > 1e-12)
            throw EvalError("negative base with non-integer exponent");
        if (std::abs(r) > 9.0e15) throw EvalError("integer exponent out of range");
        return ipow(base, static_cast<long long>(r));
    }
    return std::pow(base, expo);
}

class Parser {
public:
    Parser(std::string_view src, std::vector<std::string> vars, Expression& out)
        : src_(src), expr_(out) {
        expr_.vars_ = std::move(vars);
        expr_.nodes_.resize(1); // slot 0 reserved as "null"
    }

    void run() {
        skip_ws();
        if (pos_ >= src_.size()) throw ExprError("empty expression", 0);
        expr_.root_ = parse_additive();
        skip_ws();
        if (pos_ < src_.size())
            throw ExprError("unexpected trailing input", pos_);
    }

private:
    std::string_view src_;
    Expression& expr_;
    std::size_t pos_ = 0;
    int depth_ = 0;

    static constexpr int kMaxDepth = 256;

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > kMaxDepth)
                throw ExprError("expression nested too deeply", p.pos_);
        }
        ~DepthGuard() { --p.depth_; }
    };

    int add_node(Expression::Node n) {
        expr_.nodes_.push_back(std::move(n));
        return static_cast<int>(expr_.nodes_.size()) - 1;
    }

    void skip_ws() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                src_[pos_] == '\r'))
            ++pos_;
    }

    // Accepts ASCII '-' and the UTF-8 minus sign U+2212.
    bool peek_minus() {
        if (pos_ < src_.size() && src_[pos_] == '-') return true;
        return src_.substr(pos_).starts_with("\xe2\x88\x92");
    }
    void consume_minus() {
        if (src_[pos_] == '-') { ++pos_; return; }
        pos_ += 3;
    }

    bool peek_char(char c) { return pos_ < src_.size() && src_[pos_] == c; }

    int parse_additive() {
        DepthGuard g(*this);
        int lhs = parse_multiplicative();
        for (;;) {
            skip_ws();
            char op;
            if (peek_char('+')) op = '+';
            else if (peek_minus()) op = '-';
            else break;
            if (op == '+') ++pos_; else consume_minus();
            int rhs = parse_multiplicative();
            Expression::Node n;
            n.kind = Expression::NodeKind::Binary;
            n.op = op; n.lhs = lhs; n.rhs = rhs;
            lhs = add_node(std::move(n));
        }
        return lhs;
    }

    int parse_multiplicative() {
        DepthGuard g(*this);
        int lhs = parse_power();
        for (;;) {
            skip_ws();
            char op;
            if (peek_char('*')) op = '*';
            else if (peek_char('/')) op = '/';
            else break;
            ++pos_;
            int rhs = parse_power();
            Expression::Node n;
            n.kind = Expression::NodeKind::Binary;
            n.op = op; n.lhs = lhs; n.rhs = rhs;
            lhs = add_node(std::move(n));
        }
        return lhs;
    }

    // Right-associative: a^b^c == a^(b^c).
    int parse_power() {
        DepthGuard g(*this);
        int lhs = parse_unary();
        skip_ws();
        if (peek_char('^')) {
            ++pos_;
            int rhs = parse_power();
            Expression::Node n;
            n.kind = Expression::NodeKind::Binary;
            n.op = '^'; n.lhs = lhs; n.rhs = rhs;
            return add_node(std::move(n));
        }
        return lhs;
    }

    int parse_unary() {
        DepthGuard g(*this);
        skip_ws();
        if (peek_minus()) {
            consume_minus();
            int child = parse_unary();
            Expression::Node n;
            n.kind = Expression::NodeKind::Unary;
            n.op = '-'; n.lhs = child;
            return add_node(std::move(n));
        }
        return parse_atom();
    }

    int parse_atom() {
        DepthGuard g(*this);
        skip_ws();
        if (pos_ >= src_.size()) throw ExprError("unexpected end of input", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            int inner = parse_additive();
            skip_ws();
            if (!peek_char(')')) throw ExprError("expected ')'", pos_);
            ++pos_;
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_identifier();
        throw ExprError("unexpected character", pos_);
    }

    int parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
        }
        if (pos_ == start || (pos_ == start + 1 && src_[start] == '.'))
            throw ExprError("malformed number", start);
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                pos_ = mark; // 'e' was an identifier boundary, not an exponent
            } else {
                while (pos_ < src_.size() &&
                       std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            }
        }
        double value = 0.0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_)
            throw ExprError("number out of range", start);
        Expression::Node n;
        n.kind = Expression::NodeKind::Constant;
        n.value = value;
        return add_node(std::move(n));
    }

    int parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string_view name = src_.substr(start, pos_ - start);
        skip_ws();
        if (peek_char('(')) {
            int id = builtin_id(name);
            if (id < 0) throw ExprError("unknown function '" + std::string(name) + "'", start);
            ++pos_;
            std::vector<int> args;
            skip_ws();
            if (peek_char(')')) throw ExprError("empty argument list", pos_);
            for (;;) {
                args.push_back(parse_additive());
                skip_ws();
                if (peek_char(',')) { ++pos_; continue; }
                if (peek_char(')')) { ++pos_; break; }
                throw ExprError("expected ',' or ')'", pos_);
            }
            if (static_cast<int>(args.size()) != kBuiltins[id].arity)
                throw ExprError("wrong number of arguments to '" + std::string(name) + "'",
                                start);
            Expression::Node n;
            n.kind = Expression::NodeKind::Call;
            n.builtin = id;
            n.args = std::move(args);
            return add_node(std::move(n));
        }
        for (int i = 0; i < static_cast<int>(expr_.vars_.size()); ++i) {
            if (expr_.vars_[i] == name) {
                Expression::Node n;
                n.kind = Expression::NodeKind::Variable;
                n.var_slot = i;
                return add_node(std::move(n));
            }
        }
        throw ExprError("unknown identifier '" + std::string(name) + "'", start);
    }
};

// Precedence for printing: must agree with the parser.
int node_prec(const Expression::Node& n) {
    switch (n.kind) {
    case Expression::NodeKind::Binary:
        if (n.op == '+' || n.op == '-') return 1;
        if (n.op == '*' || n.op == '/') return 2;
        return 3; // '^'
    case Expression::NodeKind::Unary:
        return 4;
    default:
        return 5;
    }
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

Expression parse_expression(std::string_view src, std::vector<std::string> allowed_vars) {
    Expression e;
    Parser p(src, std::move(allowed_vars), e);
    p.run();
    return e;
}

double Expression::eval_node(int idx, std::span<const double> values) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.kind) {
    case NodeKind::Constant:
        return n.value;
    case NodeKind::Variable:
        return values[static_cast<std::size_t>(n.var_slot)];
    case NodeKind::Unary:
        return -eval_node(n.lhs, values);
    case NodeKind::Binary: {
        double a = eval_node(n.lhs, values);
        double b = eval_node(n.rhs, values);
        switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/':
            if (b == 0.0) throw EvalError("division by zero");
            return a / b;
        default:  return checked_pow(a, b);
        }
    }
    case NodeKind::Call: {
        double a = eval_node(n.args[0], values);
        switch (n.builtin) {
        case 0: return std::exp(a);
        case 1:
            if (a <= 0.0) throw EvalError("log of a non-positive value");
            return std::log(a);
        case 2: return std::abs(a);
        case 3:
            if (a < 0.0) throw EvalError("sqrt of a negative value");
            return std::sqrt(a);
        case 4: return std::min(a, eval_node(n.args[1], values));
        case 5: return std::max(a, eval_node(n.args[1], values));
        default: return checked_pow(a, eval_node(n.args[1], values));
        }
    }
    }
    throw EvalError("corrupt expression node");
}

double Expression::eval(std::span<const double> values) const {
    if (values.size() < vars_.size())
        throw EvalError("not enough variable values supplied");
    return eval_node(root_, values);
}

double Expression::eval(const std::map<std::string, double>& bindings) const {
    std::vector<double> values(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        auto it = bindings.find(vars_[i]);
        if (it == bindings.end())
            throw EvalError("missing binding for variable '" + vars_[i] + "'");
        values[i] = it->second;
    }
    return eval_node(root_, values);
}

void Expression::print_node(int idx, std::string& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    auto child = [&](int c, bool parens) {
        if (parens) out.push_back('(');
        print_node(c, out);
        if (parens) out.push_back(')');
    };
    switch (n.kind) {
    case NodeKind::Constant:
        out += format_double(n.value);
        return;
    case NodeKind::Variable:
        out += vars_[static_cast<std::size_t>(n.var_slot)];
        return;
    case NodeKind::Unary:
        out.push_back('-');
        // any binary child re-parses differently without parens
        child(n.lhs, node_prec(nodes_[static_cast<std::size_t>(n.lhs)]) < 4);
        return;
    case NodeKind::Binary: {
        int my = node_prec(n);
        int pl = node_prec(nodes_[static_cast<std::size_t>(n.lhs)]);
        int pr = node_prec(nodes_[static_cast<std::size_t>(n.rhs)]);
        if (n.op == '^') {
            child(n.lhs, pl <= my);
            out.push_back('^');
            child(n.rhs, pr < my);
        } else {
            child(n.lhs, pl < my);
            out.push_back(' ');
            out.push_back(n.op);
            out.push_back(' ');
            child(n.rhs, pr <= my);
        }
        return;
    }
    case NodeKind::Call: {
        out += kBuiltins[n.builtin].name;
        out.push_back('(');
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            print_node(n.args[i], out);
        }
        out.push_back(')');
        return;
    }
    }
}

std::string Expression::to_string() const {
    std::string out;
    print_node(root_, out);
    return out;
}

bool Expression::identical(const Expression& other) const {
    if (vars_ != other.vars_) return false;
    // compare trees structurally from the roots
    auto eq = [&](auto&& self, int a, int b) -> bool {
        const Node& x = nodes_[static_cast<std::size_t>(a)];
        const Node& y = other.nodes_[static_cast<std::size_t>(b)];
        if (x.kind != y.kind) return false;
        switch (x.kind) {
        case NodeKind::Constant: return x.value == y.value;
        case NodeKind::Variable: return x.var_slot == y.var_slot;
        case NodeKind::Unary:    return x.op == y.op && self(self, x.lhs, y.lhs);
        case NodeKind::Binary:
            return x.op == y.op && self(self, x.lhs, y.lhs) && self(self, x.rhs, y.rhs);
        case NodeKind::Call: {
            if (x.builtin != y.builtin || x.args.size() != y.args.size()) return false;
            for (std::size_t i = 0; i < x.args.size(); ++i)
                if (!self(self, x.args[i], y.args[i])) return false;
            return true;
        }
        }
        return false;
    };
    return eq(eq, root_, other.root_);
}

} // namespace oblique
