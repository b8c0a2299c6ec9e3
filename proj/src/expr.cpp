#include "nsvar/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace nsvar {

struct Expr::Node {
    enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Abs, Min, Max };
    Op op;
    double value = 0.0;  // Const
    int var = -1;        // Var
    std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
  public:
    Parser(const std::string& s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {}

    NodePtr run() {
        auto e = expression();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing input");
        return e;
    }

  private:
    [[noreturn]] void fail(const std::string& why) const {
        throw structural_error("expression parse error at position " + std::to_string(pos_) +
                               " in \"" + s_ + "\": " + why);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    // expression := term (('+'|'-') term)*
    NodePtr expression() {
        auto e = term();
        for (;;) {
            if (consume('+')) {
                e = make(Node::Op::Add, e, term());
            } else if (consume('-')) {
                e = make(Node::Op::Sub, e, term());
            } else {
                return e;
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    NodePtr term() {
        auto e = unary();
        for (;;) {
            if (consume('*')) {
                e = make(Node::Op::Mul, e, unary());
            } else if (consume('/')) {
                e = make(Node::Op::Div, e, unary());
            } else {
                return e;
            }
        }
    }

    // unary := '-' unary | power
    NodePtr unary() {
        if (consume('-')) return make(Node::Op::Neg, unary());
        return power();
    }

    // power := atom ('^' unary)?   (right associative)
    NodePtr power() {
        auto e = atom();
        if (consume('^')) return make(Node::Op::Pow, e, unary());
        return e;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = expression();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("bad number");
        pos_ += static_cast<size_t>(end - begin);
        auto n = std::make_shared<Node>();
        n->op = Node::Op::Const;
        n->value = v;
        return n;
    }

    NodePtr name() {
        const size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string id = s_.substr(start, pos_ - start);
        if (id == "pi") {
            auto n = std::make_shared<Node>();
            n->op = Node::Op::Const;
            n->value = M_PI;
            return n;
        }
        skip_ws();
        const bool call = pos_ < s_.size() && s_[pos_] == '(';
        if (call) {
            if (id == "sin" || id == "cos" || id == "exp" || id == "abs") {
                ++pos_;
                auto a = expression();
                if (!consume(')')) fail("expected ')'");
                Node::Op op = id == "sin"   ? Node::Op::Sin
                              : id == "cos" ? Node::Op::Cos
                              : id == "exp" ? Node::Op::Exp
                                            : Node::Op::Abs;
                return make(op, a);
            }
            if (id == "min" || id == "max" || id == "pow") {
                ++pos_;
                auto a = expression();
                if (!consume(',')) fail("expected ','");
                auto b = expression();
                if (!consume(')')) fail("expected ')'");
                Node::Op op = id == "min"   ? Node::Op::Min
                              : id == "max" ? Node::Op::Max
                                            : Node::Op::Pow;
                return make(op, a, b);
            }
            fail("unknown function '" + id + "'");
        }
        for (size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i] == id) {
                auto n = std::make_shared<Node>();
                n->op = Node::Op::Var;
                n->var = static_cast<int>(i);
                return n;
            }
        }
        fail("unknown variable '" + id + "'");
    }

    const std::string& s_;
    const std::vector<std::string>& vars_;
    size_t pos_ = 0;
};

double eval_node(const Node& n, std::span<const double> v) {
    using Op = Node::Op;
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var:
            if (n.var < 0 || static_cast<size_t>(n.var) >= v.size())
                throw structural_error("expression evaluated with too few variables");
            return v[static_cast<size_t>(n.var)];
        case Op::Add: return eval_node(*n.a, v) + eval_node(*n.b, v);
        case Op::Sub: return eval_node(*n.a, v) - eval_node(*n.b, v);
        case Op::Mul: return eval_node(*n.a, v) * eval_node(*n.b, v);
        case Op::Div: return eval_node(*n.a, v) / eval_node(*n.b, v);
        case Op::Pow: return std::pow(eval_node(*n.a, v), eval_node(*n.b, v));
        case Op::Neg: return -eval_node(*n.a, v);
        case Op::Sin: return std::sin(eval_node(*n.a, v));
        case Op::Cos: return std::cos(eval_node(*n.a, v));
        case Op::Exp: return std::exp(eval_node(*n.a, v));
        case Op::Abs: return std::abs(eval_node(*n.a, v));
        case Op::Min: return std::min(eval_node(*n.a, v), eval_node(*n.b, v));
        case Op::Max: return std::max(eval_node(*n.a, v), eval_node(*n.b, v));
    }
    throw structural_error("corrupt expression node");
}

}  // namespace

Expr Expr::parse(const std::string& text, const std::vector<std::string>& vars) {
    Expr e;
    e.root_ = Parser(text, vars).run();
    e.text_ = text;
    return e;
}

double Expr::eval(std::span<const double> values) const {
    if (!root_) throw structural_error("evaluating empty expression");
    return eval_node(*root_, values);
}

}  // namespace nsvar
