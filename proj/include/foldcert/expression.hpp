#pragma once

#include <memory>
#include <string>
#include <vector>

namespace foldcert {

/// Minimal arithmetic expression interpreter for user-defined problems and
/// load paths. Supported: + - * / ^, unary minus, parentheses, numeric
/// literals, the functions sin, cos, exp, sqrt, and a caller-declared
/// variable list (e.g. {"x1","x2","t"}).
class Expression {
public:
    /// Parses `text` against the declared variable names. Throws
    /// Error(BadExpression) with the offending position on failure.
    static Expression parse(const std::string& text,
                            const std::vector<std::string>& variables);

    /// Evaluates with values[i] bound to variables[i].
    double eval(const std::vector<double>& values) const;

    const std::string& text() const { return text_; }

    struct Node;  // AST node, defined in the implementation

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
    std::size_t n_vars_ = 0;
};

}  // namespace foldcert
