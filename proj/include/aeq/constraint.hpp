#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aeq {

/// A predicate over named context properties.
///
/// Grammar (keywords case-insensitive):
///
///   constraint := "IF" comparison "THEN" comparison | comparison
///   comparison := expr relop expr          relop: < <= = == >= > (also the
///                                          unicode forms of <= and >=)
///   expr       := term (("+" | "-") term)*
///   term       := unary ("*" unary)*
///   unary      := "-" unary | NUMBER | IDENT | "(" expr ")"
///
/// Comparisons use an absolute tolerance of 1e-9 so that grid values produced
/// by repeated addition of a fractional step compare as expected.
class Constraint {
 public:
  enum class Kind { Comparison, Conditional };

  /// Parses `source`, resolving identifiers against `property_names`.
  /// Throws ParseError on syntax errors or unknown identifiers.
  static Constraint parse(std::string_view source, std::span<const std::string> property_names);

  Kind kind() const noexcept { return kind_; }
  const std::string& source() const noexcept { return source_; }

  /// Indices of the properties the expression mentions, ascending, unique.
  const std::vector<std::size_t>& referenced() const noexcept { return referenced_; }

  bool holds(std::span<const double> values) const;

 private:
  enum class Op { Const, Prop, Neg, Add, Sub, Mul, Lt, Le, Eq, Ge, Gt };

  struct Node {
    Op op;
    double value = 0.0;     // Const
    std::size_t prop = 0;   // Prop
    int lhs = -1;
    int rhs = -1;
  };

  friend class ConstraintParser;

  double eval(int node, std::span<const double> values) const;
  bool test(int node, std::span<const double> values) const;

  Kind kind_ = Kind::Comparison;
  std::string source_;
  std::vector<Node> nodes_;
  int premise_ = -1;     // Conditional only
  int conclusion_ = -1;  // the comparison for plain constraints
  std::vector<std::size_t> referenced_;
};

}  // namespace aeq
