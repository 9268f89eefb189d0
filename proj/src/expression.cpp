#include "foldcert/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "foldcert/errors.hpp"

namespace foldcert {

namespace {

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt };

}  // namespace

struct Expression::Node {
    Op op;
    double value = 0.0;     // Const
    std::size_t var = 0;    // Var
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_node(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& vars)
        : text_(text), vars_(vars) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) {
        raise(ErrorKind::BadExpression,
              "bad expression \"" + text_ + "\" at position " +
                  std::to_string(pos_) + ": " + what);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr expr() {
        NodePtr left = term();
        for (;;) {
            if (consume('+')) {
                left = make_node(Op::Add, left, term());
            } else if (consume('-')) {
                left = make_node(Op::Sub, left, term());
            } else {
                return left;
            }
        }
    }

    NodePtr term() {
        NodePtr left = unary();
        for (;;) {
            if (consume('*')) {
                left = make_node(Op::Mul, left, unary());
            } else if (consume('/')) {
                left = make_node(Op::Div, left, unary());
            } else {
                return left;
            }
        }
    }

    NodePtr unary() {
        if (consume('-')) return make_node(Op::Neg, unary());
        if (consume('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (consume('^')) return make_node(Op::Pow, base, unary());  // right assoc
        return base;
    }

    NodePtr primary() {
        const char c = peek();
        if (c == '(') {
            consume('(');
            NodePtr e = expr();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
        fail("expected a number, variable, function or '('");
    }

    NodePtr number() {
        skip_ws();
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        auto n = make_node(Op::Const);
        const_cast<Expression::Node&>(*n).value = v;
        return n;
    }

    NodePtr ident() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name = text_.substr(start, pos_ - start);
        if (peek() == '(') {
            Op op;
            if (name == "sin") op = Op::Sin;
            else if (name == "cos") op = Op::Cos;
            else if (name == "exp") op = Op::Exp;
            else if (name == "sqrt") op = Op::Sqrt;
            else fail("unknown function '" + name + "'");
            consume('(');
            NodePtr arg = expr();
            if (!consume(')')) fail("expected ')'");
            return make_node(op, arg);
        }
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i] == name) {
                auto n = make_node(Op::Var);
                const_cast<Expression::Node&>(*n).var = i;
                return n;
            }
        }
        fail("unknown variable '" + name + "'");
    }

    const std::string& text_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

double eval_node(const Expression::Node& n, const std::vector<double>& values) {
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: return values[n.var];
        case Op::Add: return eval_node(*n.a, values) + eval_node(*n.b, values);
        case Op::Sub: return eval_node(*n.a, values) - eval_node(*n.b, values);
        case Op::Mul: return eval_node(*n.a, values) * eval_node(*n.b, values);
        case Op::Div: return eval_node(*n.a, values) / eval_node(*n.b, values);
        case Op::Pow: return std::pow(eval_node(*n.a, values), eval_node(*n.b, values));
        case Op::Neg: return -eval_node(*n.a, values);
        case Op::Sin: return std::sin(eval_node(*n.a, values));
        case Op::Cos: return std::cos(eval_node(*n.a, values));
        case Op::Exp: return std::exp(eval_node(*n.a, values));
        case Op::Sqrt: return std::sqrt(eval_node(*n.a, values));
    }
    return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text,
                             const std::vector<std::string>& variables) {
    Parser parser(text, variables);
    Expression e;
    e.root_ = parser.parse();
    e.text_ = text;
    e.n_vars_ = variables.size();
    return e;
}

double Expression::eval(const std::vector<double>& values) const {
    if (values.size() != n_vars_)
        raise(ErrorKind::DimensionMismatch,
              "expression expects " + std::to_string(n_vars_) + " values, got " +
                  std::to_string(values.size()));
    return eval_node(*root_, values);
}

}  // namespace foldcert
