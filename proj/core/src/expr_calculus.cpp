#include <cmath>

#include "hyzeno/error.hpp"
#include "hyzeno/expr.hpp"

namespace hyzeno {
namespace {

Expr num(double v) { return Expr::number(v); }

bool is_zero(const Expr& e) { return e.is_number(0.0); }
bool is_one(const Expr& e) { return e.is_number(1.0); }

Expr add(Expr a, Expr b) { return simplify(Expr::binary(ExprOp::Add, std::move(a), std::move(b))); }
Expr sub(Expr a, Expr b) { return simplify(Expr::binary(ExprOp::Sub, std::move(a), std::move(b))); }
Expr mul(Expr a, Expr b) { return simplify(Expr::binary(ExprOp::Mul, std::move(a), std::move(b))); }
Expr div(Expr a, Expr b) { return simplify(Expr::binary(ExprOp::Div, std::move(a), std::move(b))); }
Expr neg(Expr a) { return simplify(Expr::neg(std::move(a))); }

Expr fold_binary(ExprOp op, const Expr& a, const Expr& b) {
  if (!a.is_real()) return Expr::binary(op, a, b);
  const bool na = a.is_number();
  const bool nb = b.is_number();
  if (na && nb) {
    const double x = a.node().value;
    const double y = b.node().value;
    switch (op) {
      case ExprOp::Add: return num(x + y);
      case ExprOp::Sub: return num(x - y);
      case ExprOp::Mul: return num(x * y);
      case ExprOp::Div:
        if (y != 0.0) return num(x / y);
        break;
      default: break;
    }
  }
  switch (op) {
    case ExprOp::Add:
      if (is_zero(a)) return b;
      if (is_zero(b)) return a;
      break;
    case ExprOp::Sub:
      if (is_zero(b)) return a;
      if (is_zero(a)) return simplify(Expr::neg(b));
      break;
    case ExprOp::Mul:
      if (is_zero(a) || is_zero(b)) return num(0.0);
      if (is_one(a)) return b;
      if (is_one(b)) return a;
      if (a.is_number(-1.0)) return simplify(Expr::neg(b));
      if (b.is_number(-1.0)) return simplify(Expr::neg(a));
      break;
    case ExprOp::Div:
      if (is_zero(a)) return num(0.0);
      if (is_one(b)) return a;
      break;
    default: break;
  }
  return Expr::binary(op, a, b);
}

}  // namespace

Expr simplify(const Expr& e) {
  const auto& n = e.node();
  switch (n.op) {
    case ExprOp::Number:
    case ExprOp::Param:
    case ExprOp::State:
    case ExprOp::Input: return e;
    default: break;
  }
  std::vector<Expr> args;
  args.reserve(n.args.size());
  for (const auto& a : n.args) args.push_back(simplify(a));

  switch (n.op) {
    case ExprOp::Neg: {
      const Expr& a = args[0];
      if (a.is_number()) return num(-a.node().value);
      if (a.op() == ExprOp::Neg) return a.arg(0);
      return Expr::neg(a);
    }
    case ExprOp::Pow: {
      const Expr& a = args[0];
      if (n.exponent == 0) return num(1.0);
      if (n.exponent == 1) return a;
      if (a.is_number() && n.exponent > 0) return num(std::pow(a.node().value, n.exponent));
      return Expr::power(a, n.exponent);
    }
    case ExprOp::Call: return Expr::call(n.func, std::move(args));
    case ExprOp::Not: return Expr::logical_not(args[0]);
    case ExprOp::If:
      if (structurally_equal(args[1], args[2])) return args[1];
      return Expr::conditional(args[0], args[1], args[2]);
    default: return fold_binary(n.op, args[0], args[1]);
  }
}

Expr differentiate(const Expr& e, std::size_t wrt) {
  if (!e.is_real()) throw Error(ErrorCode::TypeMismatch, "cannot differentiate a boolean expression");
  const auto& n = e.node();
  switch (n.op) {
    case ExprOp::Number:
    case ExprOp::Param:
    case ExprOp::Input: return num(0.0);
    case ExprOp::State: return num(n.index == wrt ? 1.0 : 0.0);
    case ExprOp::Neg: return neg(differentiate(n.args[0], wrt));
    case ExprOp::Add: return add(differentiate(n.args[0], wrt), differentiate(n.args[1], wrt));
    case ExprOp::Sub: return sub(differentiate(n.args[0], wrt), differentiate(n.args[1], wrt));
    case ExprOp::Mul: {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      return add(mul(differentiate(a, wrt), b), mul(a, differentiate(b, wrt)));
    }
    case ExprOp::Div: {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      const Expr da = differentiate(a, wrt);
      const Expr db = differentiate(b, wrt);
      if (is_zero(db)) return div(da, b);
      return div(sub(mul(da, b), mul(a, db)), simplify(Expr::power(b, 2)));
    }
    case ExprOp::Pow: {
      const Expr& u = n.args[0];
      const int p = n.exponent;
      if (p == 0) return num(0.0);
      const Expr du = differentiate(u, wrt);
      return mul(mul(num(static_cast<double>(p)), simplify(Expr::power(u, p - 1))), du);
    }
    case ExprOp::Call: {
      const Expr& u = n.args[0];
      const Expr du = differentiate(u, wrt);
      switch (n.func) {
        case Func::Sqrt: return div(du, mul(num(2.0), e));
        case Func::Exp: return mul(e, du);
        case Func::Abs:
          return simplify(Expr::conditional(Expr::binary(ExprOp::Ge, u, num(0.0)), du, neg(du)));
        case Func::Atan: return div(du, add(num(1.0), simplify(Expr::power(u, 2))));
        case Func::Sin: return mul(Expr::call(Func::Cos, {u}), du);
        case Func::Cos: return neg(mul(Expr::call(Func::Sin, {u}), du));
        case Func::Min:
        case Func::Max: {
          const Expr& v = n.args[1];
          const ExprOp pick = n.func == Func::Min ? ExprOp::Lt : ExprOp::Gt;
          return simplify(Expr::conditional(Expr::binary(pick, u, v), du, differentiate(v, wrt)));
        }
      }
      break;
    }
    case ExprOp::If:
      return simplify(
          Expr::conditional(n.args[0], differentiate(n.args[1], wrt), differentiate(n.args[2], wrt)));
    default: break;
  }
  throw Error(ErrorCode::TypeMismatch, "cannot differentiate a boolean expression");
}

std::vector<Expr> gradient(const Expr& e, std::size_t dim) {
  std::vector<Expr> out;
  out.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) out.push_back(differentiate(e, i));
  return out;
}

}  // namespace hyzeno
