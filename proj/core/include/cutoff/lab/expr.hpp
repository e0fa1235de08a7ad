#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace cutoff::lab {

// Arithmetic expression over named variables: + - * / ^, parentheses, unary minus,
// and the functions sqrt, log, exp, abs, sin, cos, tanh.
class Expression {
 public:
  explicit Expression(const std::string& text);
  double operator()(const std::map<std::string, double>& vars) const;
  double operator()(const std::vector<double>& values) const;
  const std::string& text() const { return text_; }
  // Variable names in order of first appearance.
  const std::vector<std::string>& variables() const { return vars_; }

  struct Node;

 private:
  std::string text_;
  std::vector<std::string> vars_;
  std::shared_ptr<const Node> root_;
};

// Evaluates an expression in the single variable n.
double eval_in_n(const std::string& text, double n);

}  // namespace cutoff::lab
