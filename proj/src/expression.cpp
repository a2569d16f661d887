#include "kplate/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

namespace kplate {

struct Expression::Node {
  enum class Kind { constant, x, y, add, sub, mul, div, pow, neg, rect };
  Kind kind = Kind::constant;
  double value = 0.0;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(Point p) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::x: return p.x;
      case Kind::y: return p.y;
      case Kind::add: return args[0]->eval(p) + args[1]->eval(p);
      case Kind::sub: return args[0]->eval(p) - args[1]->eval(p);
      case Kind::mul: return args[0]->eval(p) * args[1]->eval(p);
      case Kind::div: return args[0]->eval(p) / args[1]->eval(p);
      case Kind::pow: return std::pow(args[0]->eval(p), args[1]->eval(p));
      case Kind::neg: return -args[0]->eval(p);
      case Kind::rect: {
        const bool in_x = p.x >= args[0]->eval(p) && p.x <= args[1]->eval(p);
        const bool in_y = p.y >= args[2]->eval(p) && p.y <= args[3]->eval(p);
        return in_x && in_y ? 1.0 : 0.0;
      }
    }
    return 0.0;
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  NodePtr parse() {
    NodePtr root = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidArgument("expression '" + text_ + "', column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  static NodePtr make(Node::Kind kind, std::vector<NodePtr> args, double value = 0.0) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->value = value;
    n->args = std::move(args);
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (true) {
      if (accept('+'))
        lhs = make(Node::Kind::add, {lhs, term()});
      else if (accept('-'))
        lhs = make(Node::Kind::sub, {lhs, term()});
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (true) {
      if (accept('*'))
        lhs = make(Node::Kind::mul, {lhs, unary()});
      else if (accept('/'))
        lhs = make(Node::Kind::div, {lhs, unary()});
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Kind::neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  // Right associative; binds tighter than unary minus on its left.
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Node::Kind::pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string name = text_.substr(start, pos_ - start);
      if (name == "x") return make(Node::Kind::x, {});
      if (name == "y") return make(Node::Kind::y, {});
      if (name == "rect") {
        expect('(');
        std::vector<NodePtr> args{expr()};
        for (int i = 0; i < 3; ++i) {
          expect(',');
          args.push_back(expr());
        }
        expect(')');
        return make(Node::Kind::rect, std::move(args));
      }
      pos_ = start;
      fail("unknown name '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    double v = 0.0;
    const char* first = text_.data() + pos_;
    const auto [end, ec] = std::from_chars(first, text_.data() + text_.size(), v);
    if (ec != std::errc{}) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - first);
    return make(Node::Kind::constant, {}, v);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& source) {
  Expression e;
  e.source_ = source;
  e.root_ = Parser(e.source_).parse();
  return e;
}

double Expression::operator()(Point p) const { return root_->eval(p); }

}  // namespace kplate
