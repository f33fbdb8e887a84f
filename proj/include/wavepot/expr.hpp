#pragma once

#include <memory>
#include <string>

namespace wavepot {

/// Arithmetic expression in the variables x and t.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary ('^' unary)?
///   primary := number | 'x' | 't' | 'pi' | func '(' expr ')' | '(' expr ')'
///   func    := sin | cos | exp | sqrt | abs
///
/// '^' is right associative and binds tighter than unary minus, so -x^2 is -(x^2).
class Expression {
public:
    /// Throws ConfigError with the offending position on malformed input.
    static Expression parse(const std::string& text);

    double operator()(double x, double t = 0.0) const;
    const std::string& text() const { return text_; }
    bool uses_t() const;

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

} // namespace wavepot
