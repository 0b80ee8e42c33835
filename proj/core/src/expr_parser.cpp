// Recursive-descent parser for the expression grammar:
//
//   expr    := orExpr
//   orExpr  := andExpr ("||" andExpr)*
//   andExpr := notExpr ("&&" notExpr)*
//   notExpr := "!" notExpr | cmp
//   cmp     := sum (("<" | "<=" | ">" | ">=" | "==") sum)?
//   sum     := term (("+" | "-") term)*
//   term    := factor (("*" | "/") factor)*
//   factor  := "-"? atom ("^" integer)?
//   atom    := number | ident | ident "(" args ")" | "if" "(" expr "," expr "," expr ")"
//            | "(" expr ")"

#include <cctype>
#include <charconv>
#include <optional>

#include <fmt/format.h>

#include "hyzeno/error.hpp"
#include "hyzeno/expr.hpp"

namespace hyzeno {
namespace {

enum class Tok {
  Number,
  Ident,
  LParen,
  RParen,
  Comma,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  Lt,
  Le,
  Gt,
  Ge,
  EqEq,
  AndAnd,
  OrOr,
  Bang,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  std::size_t pos = 0;  // 1-based
  double number = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    Token t;
    t.pos = i_ + 1;
    if (i_ >= src_.size()) return t;
    const char c = src_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i_ + 1 < src_.size() &&
                                                       std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
      return number(t);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i_;
      while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) ++i_;
      t.kind = Tok::Ident;
      t.text = src_.substr(start, i_ - start);
      return t;
    }
    auto two = [&](char second) { return i_ + 1 < src_.size() && src_[i_ + 1] == second; };
    auto emit = [&](Tok kind, std::size_t len) {
      t.kind = kind;
      t.text = src_.substr(i_, len);
      i_ += len;
      return t;
    };
    switch (c) {
      case '(': return emit(Tok::LParen, 1);
      case ')': return emit(Tok::RParen, 1);
      case ',': return emit(Tok::Comma, 1);
      case '+': return emit(Tok::Plus, 1);
      case '-': return emit(Tok::Minus, 1);
      case '*': return emit(Tok::Star, 1);
      case '/': return emit(Tok::Slash, 1);
      case '^': return emit(Tok::Caret, 1);
      case '<': return two('=') ? emit(Tok::Le, 2) : emit(Tok::Lt, 1);
      case '>': return two('=') ? emit(Tok::Ge, 2) : emit(Tok::Gt, 1);
      case '=':
        if (two('=')) return emit(Tok::EqEq, 2);
        break;
      case '&':
        if (two('&')) return emit(Tok::AndAnd, 2);
        break;
      case '|':
        if (two('|')) return emit(Tok::OrOr, 2);
        break;
      case '!': return emit(Tok::Bang, 1);
      default: break;
    }
    throw ParseError(ErrorCode::SyntaxError, t.pos, fmt::format("unexpected character '{}'", c));
  }

 private:
  Token number(Token t) {
    const std::size_t start = i_;
    auto digits = [&] {
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
    };
    digits();
    if (i_ < src_.size() && src_[i_] == '.') {
      ++i_;
      digits();
    }
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      std::size_t j = i_ + 1;
      if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
      if (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) {
        i_ = j;
        digits();
      }
    }
    t.kind = Tok::Number;
    t.text = src_.substr(start, i_ - start);
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
    if (ec != std::errc{} || ptr != t.text.data() + t.text.size()) {
      throw ParseError(ErrorCode::SyntaxError, t.pos, fmt::format("malformed number '{}'", t.text));
    }
    return t;
  }

  std::string_view src_;
  std::size_t i_ = 0;
};

std::optional<Func> lookup_func(std::string_view name) {
  static constexpr std::pair<std::string_view, Func> kFuncs[] = {
      {"sqrt", Func::Sqrt}, {"exp", Func::Exp}, {"abs", Func::Abs}, {"atan", Func::Atan},
      {"sin", Func::Sin},   {"cos", Func::Cos}, {"min", Func::Min}, {"max", Func::Max},
  };
  for (const auto& [n, f] : kFuncs) {
    if (n == name) return f;
  }
  return std::nullopt;
}

// Parses "x12" style names; returns the 1-based index.
std::optional<std::size_t> indexed_name(std::string_view name, char prefix) {
  if (name.size() < 2 || name[0] != prefix) return std::nullopt;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), value);
  if (ec != std::errc{} || ptr != name.data() + name.size() || name[1] == '0') return std::nullopt;
  return value;
}

class Parser {
 public:
  Parser(std::string_view src, const ParseContext& ctx) : lex_(src), ctx_(ctx) { advance(); }

  Expr parse() {
    Expr e = expr();
    if (cur_.kind != Tok::End) fail(cur_.pos, fmt::format("unexpected '{}'", cur_.text));
    return e;
  }

 private:
  [[noreturn]] void fail(std::size_t pos, const std::string& msg, ErrorCode code = ErrorCode::SyntaxError) {
    throw ParseError(code, pos, msg);
  }

  void advance() { cur_ = lex_.next(); }

  void expect(Tok kind, std::string_view what) {
    if (cur_.kind != kind) {
      if (cur_.kind == Tok::End) fail(cur_.pos, fmt::format("expected {} at end of input", what));
      fail(cur_.pos, fmt::format("expected {}, found '{}'", what, cur_.text));
    }
    advance();
  }

  // Wraps factory calls, attaching the operator position to type errors.
  template <typename F>
  Expr build(std::size_t pos, F&& f) {
    try {
      return f();
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.code(), pos, e.what());
    }
  }

  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (cur_.kind == Tok::OrOr) {
      const auto pos = cur_.pos;
      advance();
      Expr rhs = and_expr();
      lhs = build(pos, [&] { return Expr::binary(ExprOp::Or, lhs, rhs); });
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = not_expr();
    while (cur_.kind == Tok::AndAnd) {
      const auto pos = cur_.pos;
      advance();
      Expr rhs = not_expr();
      lhs = build(pos, [&] { return Expr::binary(ExprOp::And, lhs, rhs); });
    }
    return lhs;
  }

  Expr not_expr() {
    if (cur_.kind == Tok::Bang) {
      const auto pos = cur_.pos;
      advance();
      Expr inner = not_expr();
      return build(pos, [&] { return Expr::logical_not(inner); });
    }
    return cmp();
  }

  Expr cmp() {
    Expr lhs = sum();
    std::optional<ExprOp> op;
    switch (cur_.kind) {
      case Tok::Lt: op = ExprOp::Lt; break;
      case Tok::Le: op = ExprOp::Le; break;
      case Tok::Gt: op = ExprOp::Gt; break;
      case Tok::Ge: op = ExprOp::Ge; break;
      case Tok::EqEq: op = ExprOp::Eq; break;
      default: break;
    }
    if (!op) return lhs;
    const auto pos = cur_.pos;
    advance();
    Expr rhs = sum();
    return build(pos, [&] { return Expr::binary(*op, lhs, rhs); });
  }

  Expr sum() {
    Expr lhs = term();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      const auto op = cur_.kind == Tok::Plus ? ExprOp::Add : ExprOp::Sub;
      const auto pos = cur_.pos;
      advance();
      Expr rhs = term();
      lhs = build(pos, [&] { return Expr::binary(op, lhs, rhs); });
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = factor();
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      const auto op = cur_.kind == Tok::Star ? ExprOp::Mul : ExprOp::Div;
      const auto pos = cur_.pos;
      advance();
      Expr rhs = factor();
      lhs = build(pos, [&] { return Expr::binary(op, lhs, rhs); });
    }
    return lhs;
  }

  Expr factor() {
    std::optional<std::size_t> neg_pos;
    if (cur_.kind == Tok::Minus) {
      neg_pos = cur_.pos;
      advance();
    }
    Expr base = atom();
    if (cur_.kind == Tok::Caret) {
      const auto pos = cur_.pos;
      advance();
      bool negative = false;
      if (cur_.kind == Tok::Minus) {
        negative = true;
        advance();
      }
      if (cur_.kind != Tok::Number || cur_.text.find_first_not_of("0123456789") != std::string_view::npos) {
        fail(cur_.pos, "exponent must be an integer literal");
      }
      int exponent = 0;
      auto [ptr, ec] = std::from_chars(cur_.text.data(), cur_.text.data() + cur_.text.size(), exponent);
      if (ec != std::errc{}) fail(cur_.pos, "exponent out of range");
      advance();
      if (negative) exponent = -exponent;
      base = build(pos, [&] { return Expr::power(base, exponent); });
    }
    if (neg_pos) return build(*neg_pos, [&] { return Expr::neg(base); });
    return base;
  }

  Expr atom() {
    const Token tok = cur_;
    switch (tok.kind) {
      case Tok::Number:
        advance();
        return Expr::number(tok.number);
      case Tok::LParen: {
        advance();
        Expr inner = expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        advance();
        if (cur_.kind == Tok::LParen) return call(tok);
        return identifier(tok);
      }
      case Tok::End: fail(tok.pos, "unexpected end of input");
      default: fail(tok.pos, fmt::format("unexpected '{}'", tok.text));
    }
  }

  Expr call(const Token& name) {
    advance();  // '('
    std::vector<Expr> args;
    if (cur_.kind != Tok::RParen) {
      args.push_back(expr());
      while (cur_.kind == Tok::Comma) {
        advance();
        args.push_back(expr());
      }
    }
    expect(Tok::RParen, "')'");
    if (name.text == "if") {
      if (args.size() != 3) {
        fail(name.pos, fmt::format("if takes 3 arguments, got {}", args.size()), ErrorCode::ArityMismatch);
      }
      return build(name.pos, [&] { return Expr::conditional(args[0], args[1], args[2]); });
    }
    const auto f = lookup_func(name.text);
    if (!f) fail(name.pos, fmt::format("unknown function '{}'", name.text), ErrorCode::UnknownIdentifier);
    return build(name.pos, [&] { return Expr::call(*f, std::move(args)); });
  }

  Expr identifier(const Token& tok) {
    const std::string_view name = tok.text;
    if (auto it = ctx_.state_aliases.find(name); it != ctx_.state_aliases.end()) {
      return Expr::state(it->second);
    }
    for (std::size_t i = 0; i < ctx_.params.size(); ++i) {
      if (ctx_.params[i] == name) return Expr::param(i, std::string(name));
    }
    if (auto idx = indexed_name(name, 'x')) {
      if (*idx > ctx_.state_dim) {
        fail(tok.pos, fmt::format("'{}' exceeds state dimension {}", name, ctx_.state_dim),
             ErrorCode::UnknownIdentifier);
      }
      return Expr::state(*idx - 1);
    }
    if (auto idx = indexed_name(name, 'u')) {
      if (*idx > ctx_.input_dim) {
        fail(tok.pos, fmt::format("'{}' exceeds input dimension {}", name, ctx_.input_dim),
             ErrorCode::UnknownIdentifier);
      }
      return Expr::input(*idx - 1);
    }
    if (lookup_func(name) || name == "if") {
      fail(tok.pos, fmt::format("function '{}' used without arguments", name), ErrorCode::ArityMismatch);
    }
    fail(tok.pos, fmt::format("unknown identifier '{}'", name), ErrorCode::UnknownIdentifier);
  }

  Lexer lex_;
  const ParseContext& ctx_;
  Token cur_;
};

}  // namespace

Expr parse_expr(std::string_view text, const ParseContext& ctx) { return Parser(text, ctx).parse(); }

}  // namespace hyzeno
