#include "cutoff/lab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "cutoff/errors.hpp"

namespace cutoff::lab {

struct Expression::Node {
  enum class Kind { number, variable, unary_minus, binary, call } kind = Kind::number;
  double value = 0.0;
  int slot = -1;
  char op = 0;
  std::string fn;
  std::shared_ptr<const Node> a, b;

  double eval(const std::vector<double>& v) const {
    switch (kind) {
      case Kind::number: return value;
      case Kind::variable: return v[slot];
      case Kind::unary_minus: return -a->eval(v);
      case Kind::binary: {
        const double x = a->eval(v), y = b->eval(v);
        switch (op) {
          case '+': return x + y;
          case '-': return x - y;
          case '*': return x * y;
          case '/': return x / y;
          default: return std::pow(x, y);
        }
      }
      case Kind::call: {
        const double x = a->eval(v);
        if (fn == "sqrt") return std::sqrt(x);
        if (fn == "log") return std::log(x);
        if (fn == "exp") return std::exp(x);
        if (fn == "abs") return std::fabs(x);
        if (fn == "sin") return std::sin(x);
        if (fn == "cos") return std::cos(x);
        return std::tanh(x);
      }
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

class Parser {
 public:
  Parser(const std::string& s, std::vector<std::string>& vars) : s_(s), vars_(vars) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression '" + s_ + "': " + msg + " at position " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::binary;
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (eat('+')) n = binary('+', n, product());
      else if (eat('-')) n = binary('-', n, product());
      else return n;
    }
  }

  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (eat('*')) n = binary('*', n, unary());
      else if (eat('/')) n = binary('/', n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (eat('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::unary_minus;
      n->a = unary();
      return n;
    }
    if (eat('+')) return unary();
    return power();
  }

  // Right associative; binds tighter than unary minus on its left operand.
  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return binary('^', base, unary());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      NodePtr n = sum();
      if (!eat(')')) fail("missing ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      static const std::vector<std::string> fns = {"sqrt", "log", "exp", "abs", "sin", "cos", "tanh"};
      if (std::find(fns.begin(), fns.end(), name) != fns.end()) {
        if (!eat('(')) fail("function '" + name + "' needs parentheses");
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::call;
        n->fn = name;
        n->a = sum();
        if (!eat(')')) fail("missing ')'");
        return n;
      }
      if (name == "pi") {
        auto n = std::make_shared<Node>();
        n->value = 3.141592653589793238462643;
        return n;
      }
      auto it = std::find(vars_.begin(), vars_.end(), name);
      int slot = static_cast<int>(it - vars_.begin());
      if (it == vars_.end()) vars_.push_back(name);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::variable;
      n->slot = slot;
      return n;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  const std::string& s_;
  std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text) { root_ = Parser(text_, vars_).parse(); }

double Expression::operator()(const std::vector<double>& values) const {
  if (values.size() < vars_.size()) throw InvalidParameter("expression '" + text_ + "' needs more variables");
  return root_->eval(values);
}

double Expression::operator()(const std::map<std::string, double>& vars) const {
  std::vector<double> v;
  v.reserve(vars_.size());
  for (const auto& name : vars_) {
    auto it = vars.find(name);
    if (it == vars.end()) throw InvalidParameter("expression '" + text_ + "': unbound variable " + name);
    v.push_back(it->second);
  }
  return root_->eval(v);
}

double eval_in_n(const std::string& text, double n) {
  const Expression e(text);
  for (const auto& name : e.variables()) {
    if (name != "n") throw ConfigError("expression '" + text + "': only the variable n is allowed");
  }
  return e({{"n", n}});
}

}  // namespace cutoff::lab
