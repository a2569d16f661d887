#pragma once

#include <memory>
#include <string>

#include "kplate/mesh.hpp"

namespace kplate {

/// Scalar field f(x, y) written in a small arithmetic language:
/// numbers, x, y, + - * / ^, parentheses and rect(x0, x1, y0, y1), the
/// indicator of the closed rectangle [x0, x1] x [y0, y1].
class Expression {
 public:
  struct Node;

  /// Throws InvalidArgument with the offending column on a syntax error.
  static Expression parse(const std::string& source);

  double operator()(Point p) const;
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace kplate
