#include "aeq/constraint.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "aeq/error.hpp"

namespace aeq {

namespace {

constexpr double kTolerance = 1e-9;

enum class Tok { Number, Ident, Plus, Minus, Star, LParen, RParen, Lt, Le, Eq, Ge, Gt, If, Then, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int column = 0;  // 1-based
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto col = [&](std::size_t at) { return static_cast<int>(at) + 1; };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() &&
                                                        std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + src.size(), v);
      if (ec != std::errc()) throw ParseError("malformed number", 1, col(i));
      i = static_cast<std::size_t>(ptr - src.data());
      out.push_back({Tok::Number, std::string(src.substr(start, i - start)), v, col(start)});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      std::string word(src.substr(start, i - start));
      const std::string up = upper(word);
      Tok kind = up == "IF" ? Tok::If : up == "THEN" ? Tok::Then : Tok::Ident;
      out.push_back({kind, word, 0.0, col(start)});
      continue;
    }
    // UTF-8 encodings of U+2264 and U+2265.
    if (src.substr(i, 3) == "\xE2\x89\xA4") {
      out.push_back({Tok::Le, "<=", 0.0, col(i)});
      i += 3;
      continue;
    }
    if (src.substr(i, 3) == "\xE2\x89\xA5") {
      out.push_back({Tok::Ge, ">=", 0.0, col(i)});
      i += 3;
      continue;
    }
    auto two = src.substr(i, 2);
    if (two == "<=") { out.push_back({Tok::Le, "<=", 0.0, col(i)}); i += 2; continue; }
    if (two == ">=") { out.push_back({Tok::Ge, ">=", 0.0, col(i)}); i += 2; continue; }
    if (two == "==") { out.push_back({Tok::Eq, "==", 0.0, col(i)}); i += 2; continue; }
    switch (c) {
      case '+': out.push_back({Tok::Plus, "+", 0.0, col(i)}); break;
      case '-': out.push_back({Tok::Minus, "-", 0.0, col(i)}); break;
      case '*': out.push_back({Tok::Star, "*", 0.0, col(i)}); break;
      case '(': out.push_back({Tok::LParen, "(", 0.0, col(i)}); break;
      case ')': out.push_back({Tok::RParen, ")", 0.0, col(i)}); break;
      case '<': out.push_back({Tok::Lt, "<", 0.0, col(i)}); break;
      case '>': out.push_back({Tok::Gt, ">", 0.0, col(i)}); break;
      case '=': out.push_back({Tok::Eq, "=", 0.0, col(i)}); break;
      default: throw ParseError(std::string("unexpected character '") + c + "'", 1, col(i));
    }
    ++i;
  }
  out.push_back({Tok::End, "", 0.0, col(src.size())});
  return out;
}

}  // namespace

class ConstraintParser {
 public:
  ConstraintParser(Constraint& target, std::vector<Token> tokens, std::span<const std::string> names)
      : c_(target), toks_(std::move(tokens)), names_(names) {}

  void run() {
    if (peek().kind == Tok::If) {
      ++pos_;
      c_.kind_ = Constraint::Kind::Conditional;
      c_.premise_ = comparison();
      expect(Tok::Then, "THEN");
    }
    c_.conclusion_ = comparison();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
  }

 private:
  using Op = Constraint::Op;

  const Token& peek() const { return toks_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, 1, peek().column); }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what);
    ++pos_;
  }

  int add(Constraint::Node n) {
    c_.nodes_.push_back(n);
    return static_cast<int>(c_.nodes_.size()) - 1;
  }

  int comparison() {
    const int lhs = expr();
    Op op;
    switch (peek().kind) {
      case Tok::Lt: op = Op::Lt; break;
      case Tok::Le: op = Op::Le; break;
      case Tok::Eq: op = Op::Eq; break;
      case Tok::Ge: op = Op::Ge; break;
      case Tok::Gt: op = Op::Gt; break;
      default: fail("expected a comparison operator");
    }
    ++pos_;
    const int rhs = expr();
    return add({op, 0.0, 0, lhs, rhs});
  }

  int expr() {
    int lhs = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const Op op = peek().kind == Tok::Plus ? Op::Add : Op::Sub;
      ++pos_;
      lhs = add({op, 0.0, 0, lhs, term()});
    }
    return lhs;
  }

  int term() {
    int lhs = unary();
    while (peek().kind == Tok::Star) {
      ++pos_;
      lhs = add({Op::Mul, 0.0, 0, lhs, unary()});
    }
    return lhs;
  }

  int unary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Minus:
        ++pos_;
        return add({Op::Neg, 0.0, 0, unary(), -1});
      case Tok::Number:
        ++pos_;
        return add({Op::Const, t.number, 0, -1, -1});
      case Tok::Ident: {
        auto it = std::find(names_.begin(), names_.end(), t.text);
        if (it == names_.end()) fail("unknown property '" + t.text + "'");
        ++pos_;
        const auto idx = static_cast<std::size_t>(it - names_.begin());
        c_.referenced_.push_back(idx);
        return add({Op::Prop, 0.0, idx, -1, -1});
      }
      case Tok::LParen: {
        ++pos_;
        const int inner = expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default: fail("expected a number, property name or '('");
    }
  }

  Constraint& c_;
  std::vector<Token> toks_;
  std::span<const std::string> names_;
  std::size_t pos_ = 0;
};

Constraint Constraint::parse(std::string_view source, std::span<const std::string> property_names) {
  Constraint c;
  c.source_ = std::string(source);
  ConstraintParser(c, tokenize(source), property_names).run();
  std::sort(c.referenced_.begin(), c.referenced_.end());
  c.referenced_.erase(std::unique(c.referenced_.begin(), c.referenced_.end()), c.referenced_.end());
  return c;
}

double Constraint::eval(int node, std::span<const double> values) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Prop: return values[n.prop];
    case Op::Neg: return -eval(n.lhs, values);
    case Op::Add: return eval(n.lhs, values) + eval(n.rhs, values);
    case Op::Sub: return eval(n.lhs, values) - eval(n.rhs, values);
    case Op::Mul: return eval(n.lhs, values) * eval(n.rhs, values);
    default: break;
  }
  throw Error(ErrorCategory::Internal, "comparison node evaluated as arithmetic");
}

bool Constraint::test(int node, std::span<const double> values) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  const double a = eval(n.lhs, values);
  const double b = eval(n.rhs, values);
  switch (n.op) {
    case Op::Lt: return a < b - kTolerance;
    case Op::Le: return a <= b + kTolerance;
    case Op::Eq: return std::fabs(a - b) <= kTolerance;
    case Op::Ge: return a >= b - kTolerance;
    case Op::Gt: return a > b + kTolerance;
    default: break;
  }
  throw Error(ErrorCategory::Internal, "arithmetic node evaluated as comparison");
}

bool Constraint::holds(std::span<const double> values) const {
  if (kind_ == Kind::Conditional && !test(premise_, values)) return true;
  return test(conclusion_, values);
}

}  // namespace aeq
