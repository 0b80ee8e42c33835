#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hyzeno {

enum class ExprType { Real, Bool };

enum class ExprOp {
  Number,
  Param,
  State,
  Input,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Call,
  Lt,
  Le,
  Gt,
  Ge,
  Eq,
  And,
  Or,
  Not,
  If,
};

enum class Func { Sqrt, Exp, Abs, Atan, Sin, Cos, Min, Max };

std::string_view func_name(Func f);
std::size_t func_arity(Func f);

class Expr;

struct ExprNode {
  ExprOp op = ExprOp::Number;
  ExprType type = ExprType::Real;
  double value = 0.0;     // Number
  std::size_t index = 0;  // Param/State/Input, 0-based
  int exponent = 0;       // Pow
  Func func = Func::Sqrt; // Call
  std::string name;       // Param
  std::vector<Expr> args;
};

/// Immutable, shared expression tree. Every factory type-checks its operands
/// and throws Error(TypeMismatch) on ill-typed input, so any Expr that exists
/// is well-typed.
class Expr {
 public:
  Expr() = default;

  static Expr number(double v);
  static Expr param(std::size_t index, std::string name);
  static Expr state(std::size_t index);
  static Expr input(std::size_t index);
  static Expr neg(Expr a);
  static Expr logical_not(Expr a);
  static Expr binary(ExprOp op, Expr a, Expr b);
  static Expr power(Expr base, int exponent);
  static Expr call(Func f, std::vector<Expr> args);
  static Expr conditional(Expr cond, Expr then_branch, Expr else_branch);
  static Expr boolean(bool v);  // `0 < 1` or `1 < 0`; the grammar has no boolean literal

  bool valid() const { return static_cast<bool>(node_); }
  const ExprNode& node() const { return *node_; }
  ExprOp op() const { return node_->op; }
  ExprType type() const { return node_->type; }
  bool is_real() const { return node_->type == ExprType::Real; }
  bool is_bool() const { return node_->type == ExprType::Bool; }
  const std::vector<Expr>& args() const { return node_->args; }
  const Expr& arg(std::size_t i) const { return node_->args.at(i); }

  bool is_number() const { return op() == ExprOp::Number; }
  bool is_number(double v) const { return is_number() && node_->value == v; }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  static Expr make(ExprNode n);

  std::shared_ptr<const ExprNode> node_;
};

/// Structural equality (same tree shape, literals compared bitwise).
bool structurally_equal(const Expr& a, const Expr& b);

// -- parsing -----------------------------------------------------------------

/// Identifiers an expression may reference.
struct ParseContext {
  std::size_t state_dim = 0;   // x1..xn
  std::size_t input_dim = 0;   // u1..um
  std::vector<std::string> params;
  std::map<std::string, std::size_t, std::less<>> state_aliases;  // e.g. "s" -> 0
};

/// Parses the expression grammar. Throws ParseError (SyntaxError,
/// UnknownIdentifier, ArityMismatch, TypeMismatch) with a 1-based position.
Expr parse_expr(std::string_view text, const ParseContext& ctx);

/// Prints in the parser's own syntax with minimal parentheses, such that
/// parse(print(e)) is structurally equal to e for parsed trees.
std::string to_string(const Expr& e);

// -- evaluation --------------------------------------------------------------

inline constexpr double kDefaultEpsEq = 1e-9;

struct EvalEnv {
  std::span<const double> state;
  std::span<const double> inputs;
  std::span<const double> params;
  double eps_eq = kDefaultEpsEq;  // `a == b` means |a - b| <= eps_eq
};

using Value = std::variant<double, bool>;

/// Throws Error(DivisionByZero | DomainError | IndexOutOfRange).
double eval_real(const Expr& e, const EvalEnv& env);
bool eval_bool(const Expr& e, const EvalEnv& env);
Value eval_expr(const Expr& e, const EvalEnv& env);

// -- calculus and rewriting ----------------------------------------------------

/// Symbolic partial derivative with respect to state variable `wrt` (0-based),
/// simplified. Conditionals differentiate branchwise; abs/min/max take the
/// right-hand branch at kinks. Throws Error(TypeMismatch) for boolean input.
Expr differentiate(const Expr& e, std::size_t wrt);

/// Gradient with respect to x1..x_dim.
std::vector<Expr> gradient(const Expr& e, std::size_t dim);

/// Constant folding and neutral-element removal.
Expr simplify(const Expr& e);

struct Substitution {
  std::function<Expr(std::size_t)> state;  // null keeps the node
  std::function<Expr(std::size_t)> input;
  std::function<Expr(std::size_t, const std::string&)> param;
};

/// Rebuilds `e` with leaf replacements; results are type-checked again.
Expr substitute(const Expr& e, const Substitution& sub);

/// 1 + largest referenced index, or 0 if none.
std::size_t state_arity(const Expr& e);
std::size_t input_arity(const Expr& e);

}  // namespace hyzeno
