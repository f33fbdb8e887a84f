#include "wavepot/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "wavepot/error.hpp"

namespace wavepot {

struct Expression::Node {
    enum class Op { constant, var_x, var_t, add, sub, mul, div, pow, neg, sin, cos, exp, sqrt, abs };
    Op op = Op::constant;
    double value = 0.0;
    std::shared_ptr<const Node> a, b;

    double eval(double x, double t) const
    {
        switch (op) {
        case Op::constant: return value;
        case Op::var_x: return x;
        case Op::var_t: return t;
        case Op::add: return a->eval(x, t) + b->eval(x, t);
        case Op::sub: return a->eval(x, t) - b->eval(x, t);
        case Op::mul: return a->eval(x, t) * b->eval(x, t);
        case Op::div: return a->eval(x, t) / b->eval(x, t);
        case Op::pow: return std::pow(a->eval(x, t), b->eval(x, t));
        case Op::neg: return -a->eval(x, t);
        case Op::sin: return std::sin(a->eval(x, t));
        case Op::cos: return std::cos(a->eval(x, t));
        case Op::exp: return std::exp(a->eval(x, t));
        case Op::sqrt: return std::sqrt(a->eval(x, t));
        case Op::abs: return std::abs(a->eval(x, t));
        }
        return 0.0;
    }

    bool uses_t() const
    {
        return op == Op::var_t || (a && a->uses_t()) || (b && b->uses_t());
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double value = 0.0)
{
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    n->value = value;
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse()
    {
        auto n = expr();
        skip();
        if (pos_ != s_.size())
            fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError("expression \"" + s_ + "\": " + what + " at position " + std::to_string(pos_));
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr()
    {
        auto n = term();
        for (;;) {
            if (accept('+'))
                n = make(Op::add, n, term());
            else if (accept('-'))
                n = make(Op::sub, n, term());
            else
                return n;
        }
    }

    NodePtr term()
    {
        auto n = unary();
        for (;;) {
            if (accept('*'))
                n = make(Op::mul, n, unary());
            else if (accept('/'))
                n = make(Op::div, n, unary());
            else
                return n;
        }
    }

    NodePtr unary()
    {
        if (accept('-'))
            return make(Op::neg, unary());
        if (accept('+'))
            return unary();
        return power();
    }

    NodePtr power()
    {
        auto base = primary();
        if (accept('^'))
            return make(Op::pow, base, unary());
        return base;
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= s_.size())
            fail("unexpected end of input");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin)
                fail("malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            return make(Op::constant, nullptr, nullptr, v);
        }
        if (accept('(')) {
            auto n = expr();
            if (!accept(')'))
                fail("expected ')'");
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x")
                return make(Op::var_x);
            if (name == "t")
                return make(Op::var_t);
            if (name == "pi")
                return make(Op::constant, nullptr, nullptr, M_PI);
            static const std::vector<std::pair<std::string, Op>> funcs = {
                {"sin", Op::sin}, {"cos", Op::cos}, {"exp", Op::exp}, {"sqrt", Op::sqrt}, {"abs", Op::abs}};
            for (const auto& [fname, op] : funcs) {
                if (name == fname) {
                    if (!accept('('))
                        fail("expected '(' after " + name);
                    auto arg = expr();
                    if (!accept(')'))
                        fail("expected ')'");
                    return make(op, arg);
                }
            }
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

} // namespace

Expression Expression::parse(const std::string& text)
{
    Expression e;
    e.text_ = text;
    e.root_ = Parser(text).parse();
    return e;
}

double Expression::operator()(double x, double t) const
{
    return root_->eval(x, t);
}

bool Expression::uses_t() const
{
    return root_->uses_t();
}

} // namespace wavepot
