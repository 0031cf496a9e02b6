#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace jss::ml {

// Expression tree in prefix order over +, -, *, protected / with feature
// and constant terminals. Protected division returns 1 when the
// denominator's magnitude is below 1e-3 (gplearn's convention), so finite
// operands always produce finite values.
struct GpExpr {
  enum class Op : std::uint8_t { Add, Sub, Mul, Div, Feature, Const };

  struct Node {
    Op op = Op::Const;
    std::int32_t feature = 0;
    double value = 0;
  };

  std::vector<Node> nodes;  // prefix order

  double eval(std::span<const double> x) const;
  int depth() const;
  std::string to_prefix_string() const;
  static GpExpr from_prefix_string(const std::string& text, int dim);

  // Index one past the subtree rooted at `at`.
  std::size_t subtree_end(std::size_t at) const;
};

double gp_protected_div(double a, double b);

}  // namespace jss::ml
