#include "hyzeno/expr.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>

#include <fmt/format.h>

#include "hyzeno/error.hpp"

namespace hyzeno {

std::string_view func_name(Func f) {
  switch (f) {
    case Func::Sqrt: return "sqrt";
    case Func::Exp: return "exp";
    case Func::Abs: return "abs";
    case Func::Atan: return "atan";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Min: return "min";
    case Func::Max: return "max";
  }
  return "?";
}

std::size_t func_arity(Func f) { return (f == Func::Min || f == Func::Max) ? 2 : 1; }

namespace {

bool is_arith(ExprOp op) {
  return op == ExprOp::Add || op == ExprOp::Sub || op == ExprOp::Mul || op == ExprOp::Div;
}
bool is_cmp(ExprOp op) {
  return op == ExprOp::Lt || op == ExprOp::Le || op == ExprOp::Gt || op == ExprOp::Ge ||
         op == ExprOp::Eq;
}
bool is_logic(ExprOp op) { return op == ExprOp::And || op == ExprOp::Or; }

void require_real(const Expr& e, std::string_view what) {
  if (!e.valid() || !e.is_real()) {
    throw Error(ErrorCode::TypeMismatch, fmt::format("{} expects a real operand", what));
  }
}
void require_bool(const Expr& e, std::string_view what) {
  if (!e.valid() || !e.is_bool()) {
    throw Error(ErrorCode::TypeMismatch, fmt::format("{} expects a boolean operand", what));
  }
}

}  // namespace

Expr Expr::make(ExprNode n) { return Expr(std::make_shared<const ExprNode>(std::move(n))); }

Expr Expr::number(double v) {
  ExprNode n;
  n.op = ExprOp::Number;
  n.value = v;
  return make(std::move(n));
}

Expr Expr::param(std::size_t index, std::string name) {
  ExprNode n;
  n.op = ExprOp::Param;
  n.index = index;
  n.name = std::move(name);
  return make(std::move(n));
}

Expr Expr::state(std::size_t index) {
  ExprNode n;
  n.op = ExprOp::State;
  n.index = index;
  return make(std::move(n));
}

Expr Expr::input(std::size_t index) {
  ExprNode n;
  n.op = ExprOp::Input;
  n.index = index;
  return make(std::move(n));
}

Expr Expr::neg(Expr a) {
  require_real(a, "unary minus");
  ExprNode n;
  n.op = ExprOp::Neg;
  n.args = {std::move(a)};
  return make(std::move(n));
}

Expr Expr::logical_not(Expr a) {
  require_bool(a, "'!'");
  ExprNode n;
  n.op = ExprOp::Not;
  n.type = ExprType::Bool;
  n.args = {std::move(a)};
  return make(std::move(n));
}

Expr Expr::binary(ExprOp op, Expr a, Expr b) {
  ExprNode n;
  n.op = op;
  if (is_arith(op)) {
    require_real(a, "arithmetic");
    require_real(b, "arithmetic");
  } else if (is_cmp(op)) {
    require_real(a, "comparison");
    require_real(b, "comparison");
    n.type = ExprType::Bool;
  } else if (is_logic(op)) {
    require_bool(a, "logical operator");
    require_bool(b, "logical operator");
    n.type = ExprType::Bool;
  } else {
    throw Error(ErrorCode::InvalidArgument, "not a binary operator");
  }
  n.args = {std::move(a), std::move(b)};
  return make(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
  require_real(base, "'^'");
  ExprNode n;
  n.op = ExprOp::Pow;
  n.exponent = exponent;
  n.args = {std::move(base)};
  return make(std::move(n));
}

Expr Expr::call(Func f, std::vector<Expr> args) {
  if (args.size() != func_arity(f)) {
    throw Error(ErrorCode::ArityMismatch, fmt::format("{} takes {} argument(s), got {}", func_name(f),
                                                      func_arity(f), args.size()));
  }
  for (const auto& a : args) require_real(a, func_name(f));
  ExprNode n;
  n.op = ExprOp::Call;
  n.func = f;
  n.args = std::move(args);
  return make(std::move(n));
}

Expr Expr::conditional(Expr cond, Expr then_branch, Expr else_branch) {
  require_bool(cond, "if condition");
  if (!then_branch.valid() || !else_branch.valid() || then_branch.type() != else_branch.type()) {
    throw Error(ErrorCode::TypeMismatch, "if branches must share a type");
  }
  ExprNode n;
  n.op = ExprOp::If;
  n.type = then_branch.type();
  n.args = {std::move(cond), std::move(then_branch), std::move(else_branch)};
  return make(std::move(n));
}

Expr Expr::boolean(bool v) {
  return binary(ExprOp::Lt, number(v ? 0.0 : 1.0), number(v ? 1.0 : 0.0));
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.valid() != b.valid()) return false;
  if (!a.valid()) return true;
  const auto& na = a.node();
  const auto& nb = b.node();
  if (na.op != nb.op || na.type != nb.type) return false;
  switch (na.op) {
    case ExprOp::Number:
      if (std::bit_cast<std::uint64_t>(na.value) != std::bit_cast<std::uint64_t>(nb.value)) return false;
      break;
    case ExprOp::Param:
      if (na.index != nb.index || na.name != nb.name) return false;
      break;
    case ExprOp::State:
    case ExprOp::Input:
      if (na.index != nb.index) return false;
      break;
    case ExprOp::Pow:
      if (na.exponent != nb.exponent) return false;
      break;
    case ExprOp::Call:
      if (na.func != nb.func) return false;
      break;
    default:
      break;
  }
  if (na.args.size() != nb.args.size()) return false;
  for (std::size_t i = 0; i < na.args.size(); ++i) {
    if (!structurally_equal(na.args[i], nb.args[i])) return false;
  }
  return true;
}

// -- printing ----------------------------------------------------------------

namespace {

// Binding strength, matching the grammar levels.
int precedence(const Expr& e) {
  switch (e.op()) {
    case ExprOp::Or: return 1;
    case ExprOp::And: return 2;
    case ExprOp::Not: return 3;
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Gt:
    case ExprOp::Ge:
    case ExprOp::Eq: return 4;
    case ExprOp::Add:
    case ExprOp::Sub: return 5;
    case ExprOp::Mul:
    case ExprOp::Div: return 6;
    case ExprOp::Neg: return 7;
    case ExprOp::Pow: return 8;
    case ExprOp::Number: return e.node().value < 0.0 || std::signbit(e.node().value) ? 7 : 9;
    default: return 9;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) return fmt::format("{}", v);
  return std::string(buf.data(), ptr);
}

std::string_view op_token(ExprOp op) {
  switch (op) {
    case ExprOp::Add: return " + ";
    case ExprOp::Sub: return " - ";
    case ExprOp::Mul: return "*";
    case ExprOp::Div: return "/";
    case ExprOp::Lt: return " < ";
    case ExprOp::Le: return " <= ";
    case ExprOp::Gt: return " > ";
    case ExprOp::Ge: return " >= ";
    case ExprOp::Eq: return " == ";
    case ExprOp::And: return " && ";
    case ExprOp::Or: return " || ";
    default: return " ? ";
  }
}

void print(const Expr& e, int min_prec, std::string& out) {
  const int prec = precedence(e);
  const bool paren = prec < min_prec;
  if (paren) out += '(';
  const auto& n = e.node();
  switch (n.op) {
    case ExprOp::Number: out += format_number(n.value); break;
    case ExprOp::Param: out += n.name; break;
    case ExprOp::State: out += fmt::format("x{}", n.index + 1); break;
    case ExprOp::Input: out += fmt::format("u{}", n.index + 1); break;
    case ExprOp::Neg:
      out += '-';
      print(n.args[0], 8, out);
      break;
    case ExprOp::Not:
      out += '!';
      print(n.args[0], 3, out);
      break;
    case ExprOp::Pow:
      print(n.args[0], 9, out);
      out += fmt::format("^{}", n.exponent);
      break;
    case ExprOp::Call:
      out += func_name(n.func);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print(n.args[i], 0, out);
      }
      out += ')';
      break;
    case ExprOp::If:
      out += "if(";
      print(n.args[0], 0, out);
      out += ", ";
      print(n.args[1], 0, out);
      out += ", ";
      print(n.args[2], 0, out);
      out += ')';
      break;
    default: {
      // Left-associative binary levels: the right operand binds one tighter.
      // Comparisons take sums on both sides.
      const int left = is_cmp(n.op) ? 5 : prec;
      const int right = is_cmp(n.op) ? 5 : prec + 1;
      print(n.args[0], left, out);
      out += op_token(n.op);
      print(n.args[1], right, out);
      break;
    }
  }
  if (paren) out += ')';
}

}  // namespace

std::string to_string(const Expr& e) {
  if (!e.valid()) return "<null>";
  std::string out;
  print(e, 0, out);
  return out;
}

// -- evaluation --------------------------------------------------------------

namespace {

double ipow(double base, int exponent) {
  if (exponent < 0) {
    if (base == 0.0) throw Error(ErrorCode::DivisionByZero, "zero base with negative exponent");
    return 1.0 / ipow(base, -exponent);
  }
  double result = 1.0;
  unsigned e = static_cast<unsigned>(exponent);
  while (e) {
    if (e & 1u) result *= base;
    base *= base;
    e >>= 1u;
  }
  return result;
}

double lookup(std::span<const double> values, std::size_t index, std::string_view kind) {
  if (index >= values.size()) {
    throw Error(ErrorCode::IndexOutOfRange,
                fmt::format("{} index {} out of range (size {})", kind, index + 1, values.size()));
  }
  return values[index];
}

}  // namespace

double eval_real(const Expr& e, const EvalEnv& env) {
  const auto& n = e.node();
  switch (n.op) {
    case ExprOp::Number: return n.value;
    case ExprOp::Param: return lookup(env.params, n.index, "parameter");
    case ExprOp::State: return lookup(env.state, n.index, "state");
    case ExprOp::Input: return lookup(env.inputs, n.index, "input");
    case ExprOp::Neg: return -eval_real(n.args[0], env);
    case ExprOp::Add: return eval_real(n.args[0], env) + eval_real(n.args[1], env);
    case ExprOp::Sub: return eval_real(n.args[0], env) - eval_real(n.args[1], env);
    case ExprOp::Mul: return eval_real(n.args[0], env) * eval_real(n.args[1], env);
    case ExprOp::Div: {
      const double num = eval_real(n.args[0], env);
      const double den = eval_real(n.args[1], env);
      if (den == 0.0) throw Error(ErrorCode::DivisionByZero, to_string(e));
      return num / den;
    }
    case ExprOp::Pow: return ipow(eval_real(n.args[0], env), n.exponent);
    case ExprOp::Call: {
      const double a = eval_real(n.args[0], env);
      switch (n.func) {
        case Func::Sqrt:
          if (a < 0.0) throw Error(ErrorCode::DomainError, fmt::format("sqrt of {}", a));
          return std::sqrt(a);
        case Func::Exp: return std::exp(a);
        case Func::Abs: return std::fabs(a);
        case Func::Atan: return std::atan(a);
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Min: return std::min(a, eval_real(n.args[1], env));
        case Func::Max: return std::max(a, eval_real(n.args[1], env));
      }
      break;
    }
    case ExprOp::If:
      return eval_bool(n.args[0], env) ? eval_real(n.args[1], env) : eval_real(n.args[2], env);
    default: break;
  }
  throw Error(ErrorCode::TypeMismatch, "boolean expression evaluated as real");
}

bool eval_bool(const Expr& e, const EvalEnv& env) {
  const auto& n = e.node();
  switch (n.op) {
    case ExprOp::Lt: return eval_real(n.args[0], env) < eval_real(n.args[1], env);
    case ExprOp::Le: return eval_real(n.args[0], env) <= eval_real(n.args[1], env);
    case ExprOp::Gt: return eval_real(n.args[0], env) > eval_real(n.args[1], env);
    case ExprOp::Ge: return eval_real(n.args[0], env) >= eval_real(n.args[1], env);
    case ExprOp::Eq:
      return std::fabs(eval_real(n.args[0], env) - eval_real(n.args[1], env)) <= env.eps_eq;
    case ExprOp::And: return eval_bool(n.args[0], env) && eval_bool(n.args[1], env);
    case ExprOp::Or: return eval_bool(n.args[0], env) || eval_bool(n.args[1], env);
    case ExprOp::Not: return !eval_bool(n.args[0], env);
    case ExprOp::If:
      return eval_bool(n.args[0], env) ? eval_bool(n.args[1], env) : eval_bool(n.args[2], env);
    default: break;
  }
  throw Error(ErrorCode::TypeMismatch, "real expression evaluated as boolean");
}

Value eval_expr(const Expr& e, const EvalEnv& env) {
  if (e.is_bool()) return eval_bool(e, env);
  return eval_real(e, env);
}

// -- traversal -----------------------------------------------------------------

Expr substitute(const Expr& e, const Substitution& sub) {
  const auto& n = e.node();
  switch (n.op) {
    case ExprOp::Number: return e;
    case ExprOp::Param: return sub.param ? sub.param(n.index, n.name) : e;
    case ExprOp::State: return sub.state ? sub.state(n.index) : e;
    case ExprOp::Input: return sub.input ? sub.input(n.index) : e;
    default: break;
  }
  std::vector<Expr> args;
  args.reserve(n.args.size());
  for (const auto& a : n.args) args.push_back(substitute(a, sub));
  switch (n.op) {
    case ExprOp::Neg: return Expr::neg(args[0]);
    case ExprOp::Not: return Expr::logical_not(args[0]);
    case ExprOp::Pow: return Expr::power(args[0], n.exponent);
    case ExprOp::Call: return Expr::call(n.func, std::move(args));
    case ExprOp::If: return Expr::conditional(args[0], args[1], args[2]);
    default: return Expr::binary(n.op, args[0], args[1]);
  }
}

namespace {
void arity(const Expr& e, ExprOp leaf, std::size_t& out) {
  const auto& n = e.node();
  if (n.op == leaf) out = std::max(out, n.index + 1);
  for (const auto& a : n.args) arity(a, leaf, out);
}
}  // namespace

std::size_t state_arity(const Expr& e) {
  std::size_t out = 0;
  arity(e, ExprOp::State, out);
  return out;
}

std::size_t input_arity(const Expr& e) {
  std::size_t out = 0;
  arity(e, ExprOp::Input, out);
  return out;
}

}  // namespace hyzeno
