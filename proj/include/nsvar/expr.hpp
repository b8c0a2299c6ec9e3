#ifndef NSVAR_EXPR_HPP
#define NSVAR_EXPR_HPP

#include <memory>
#include <string>
#include <vector>

#include "nsvar/common.hpp"

namespace nsvar {

// Small arithmetic expressions over named variables: literals, variables,
// + - * / ^, and sin, cos, exp, abs, min, max, pow. Parsed once into an
// AST; evaluation is reentrant.
class Expr {
  public:
    Expr() = default;

    // vars lists the permitted variable names; evaluation takes values in
    // the same order. Throws structural_error on parse failure.
    static Expr parse(const std::string& text, const std::vector<std::string>& vars);

    // Convenience for expressions in a single variable t.
    static Expr parse_t(const std::string& text) { return parse(text, {"t"}); }

    double eval(std::span<const double> values) const;
    double eval_t(double t) const { return eval(std::span<const double>(&t, 1)); }

    bool empty() const { return root_ == nullptr; }
    const std::string& text() const { return text_; }

    struct Node;

  private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace nsvar

#endif
