#include "benfordseq/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "benfordseq/errors.hpp"

namespace benfordseq {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t substream(std::uint64_t seed, std::uint64_t idx) {
  return mix64(seed ^ mix64(idx + 0x51ed2701a9b5d3e7ull));
}

double unit_draw(std::uint64_t trial_seed, std::int64_t n, std::uint64_t counter) {
  std::uint64_t h = mix64(trial_seed);
  h = mix64(h ^ static_cast<std::uint64_t>(n));
  h = mix64(h ^ counter);
  return static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
}

namespace {

Expr make(ExprKind k, Expr a = nullptr, Expr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Expr make_literal(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::literal;
  n->value = v;
  return n;
}

Expr make_call(CallFn fn, Expr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::call;
  n->fn = fn;
  n->a = std::move(a);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr run() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (eat('+'))
        lhs = make(ExprKind::add, lhs, term());
      else if (eat('-'))
        lhs = make(ExprKind::sub, lhs, term());
      else
        return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (eat('*'))
        lhs = make(ExprKind::mul, lhs, unary());
      else if (eat('/'))
        lhs = make(ExprKind::divide, lhs, unary());
      else
        return lhs;
    }
  }

  Expr unary() {
    if (eat('-')) return make(ExprKind::negate, unary());
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (eat('^')) return make(ExprKind::power, base, unary());
    return base;
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected an operand");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected character");
  }

  Expr number() {
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    // Reject a partial parse that strtod stopped inside an exponent ("1e").
    pos_ += static_cast<std::size_t>(end - begin);
    if (!std::isfinite(v)) fail("number out of range");
    return make_literal(v);
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);
    if (name == "n") return make(ExprKind::var_n);
    std::vector<Expr> args;
    skip_ws();
    if (!eat('(')) {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    if (peek() != ')') {
      args.push_back(expr());
      while (eat(',')) args.push_back(expr());
    }
    if (!eat(')')) fail("expected ')'");

    auto arity = [&](std::size_t want) {
      if (args.size() != want) {
        pos_ = start;
        fail("'" + std::string(name) + "' expects " + std::to_string(want) +
             (want == 1 ? " argument" : " arguments"));
      }
    };
    if (name == "exp") { arity(1); return make_call(CallFn::exp_fn, args[0]); }
    if (name == "log") { arity(1); return make_call(CallFn::log_fn, args[0]); }
    if (name == "log10") { arity(1); return make_call(CallFn::log10_fn, args[0]); }
    if (name == "sqrt") { arity(1); return make_call(CallFn::sqrt_fn, args[0]); }
    if (name == "floor") { arity(1); return make_call(CallFn::floor_fn, args[0]); }
    if (name == "abs") { arity(1); return make_call(CallFn::abs_fn, args[0]); }
    if (name == "pow") { arity(2); return make(ExprKind::power, args[0], args[1]); }
    if (name == "uniform") { arity(2); return make(ExprKind::uniform, args[0], args[1]); }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }
};

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::add:
    case ExprKind::sub: return 1;
    case ExprKind::mul:
    case ExprKind::divide: return 2;
    case ExprKind::negate: return 3;
    case ExprKind::power: return 4;
    default: return 5;
  }
}

const char* fn_name(CallFn f) {
  switch (f) {
    case CallFn::exp_fn: return "exp";
    case CallFn::log_fn: return "log";
    case CallFn::log10_fn: return "log10";
    case CallFn::sqrt_fn: return "sqrt";
    case CallFn::floor_fn: return "floor";
    case CallFn::abs_fn: return "abs";
  }
  return "?";
}

void print(const Expr& e, std::string& out, int parent_prec, bool right_side) {
  int prec = precedence(e->kind);
  bool parens = prec < parent_prec || (prec == parent_prec && right_side && prec <= 2);
  if (parens) out += '(';
  switch (e->kind) {
    case ExprKind::literal: {
      char buf[32];
      auto r = std::to_chars(buf, buf + sizeof buf, e->value);
      out.append(buf, r.ptr);
      break;
    }
    case ExprKind::var_n: out += 'n'; break;
    case ExprKind::negate:
      out += '-';
      print(e->a, out, prec, true);
      break;
    case ExprKind::add:
    case ExprKind::sub:
    case ExprKind::mul:
    case ExprKind::divide:
    case ExprKind::power: {
      const char* op = e->kind == ExprKind::add      ? "+"
                       : e->kind == ExprKind::sub    ? "-"
                       : e->kind == ExprKind::mul    ? "*"
                       : e->kind == ExprKind::divide ? "/"
                                                     : "^";
      // "^" is right associative, so its left operand needs parens at equal
      // precedence; the other binaries are left associative.
      bool rassoc = e->kind == ExprKind::power;
      print(e->a, out, rassoc ? prec + 1 : prec, false);
      out += op;
      print(e->b, out, rassoc ? prec : prec + 1, true);
      break;
    }
    case ExprKind::call:
      out += fn_name(e->fn);
      out += '(';
      print(e->a, out, 0, false);
      out += ')';
      break;
    case ExprKind::uniform:
      out += "uniform(";
      print(e->a, out, 0, false);
      out += ',';
      print(e->b, out, 0, false);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).run(); }

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out, 0, false);
  return out;
}

double eval(const Expr& e, EvalContext& ctx) {
  switch (e->kind) {
    case ExprKind::literal: return e->value;
    case ExprKind::var_n: return static_cast<double>(ctx.n);
    case ExprKind::negate: return -eval(e->a, ctx);
    case ExprKind::add: return eval(e->a, ctx) + eval(e->b, ctx);
    case ExprKind::sub: return eval(e->a, ctx) - eval(e->b, ctx);
    case ExprKind::mul: return eval(e->a, ctx) * eval(e->b, ctx);
    case ExprKind::divide: {
      double num = eval(e->a, ctx);
      double den = eval(e->b, ctx);
      if (den == 0.0) throw DomainError("division by zero");
      return num / den;
    }
    case ExprKind::power: {
      double base = eval(e->a, ctx);
      double ex = eval(e->b, ctx);
      if (base < 0.0 && std::rint(ex) != ex)
        throw DomainError("negative base with non-integer exponent");
      if (base == 0.0 && ex < 0.0) throw DomainError("zero base with negative exponent");
      return std::pow(base, ex);
    }
    case ExprKind::call: {
      double x = eval(e->a, ctx);
      switch (e->fn) {
        case CallFn::exp_fn: return std::exp(x);
        case CallFn::log_fn:
          if (x <= 0.0) throw DomainError("log of a non-positive value");
          return std::log(x);
        case CallFn::log10_fn:
          if (x <= 0.0) throw DomainError("log10 of a non-positive value");
          return std::log10(x);
        case CallFn::sqrt_fn:
          if (x < 0.0) throw DomainError("sqrt of a negative value");
          return std::sqrt(x);
        case CallFn::floor_fn: return std::floor(x);
        case CallFn::abs_fn: return std::fabs(x);
      }
      throw DomainError("unknown call");
    }
    case ExprKind::uniform: {
      // Draw first (pre-order position), then evaluate the bounds.
      double u = unit_draw(ctx.trial_seed, ctx.n, ctx.draw_counter++);
      double lo = eval(e->a, ctx);
      double hi = eval(e->b, ctx);
      if (!(lo <= hi)) throw DomainError("uniform(lo, hi) requires lo <= hi");
      return lo + (hi - lo) * u;
    }
  }
  throw DomainError("unknown expression node");
}

bool is_constant(const Expr& e) {
  switch (e->kind) {
    case ExprKind::literal: return true;
    case ExprKind::var_n: return false;
    case ExprKind::uniform: return false;
    case ExprKind::negate:
    case ExprKind::call: return is_constant(e->a);
    default: return is_constant(e->a) && is_constant(e->b);
  }
}

bool has_random(const Expr& e) {
  switch (e->kind) {
    case ExprKind::literal:
    case ExprKind::var_n: return false;
    case ExprKind::uniform: return true;
    case ExprKind::negate:
    case ExprKind::call: return has_random(e->a);
    default: return has_random(e->a) || has_random(e->b);
  }
}

bool structurally_equal(const Expr& x, const Expr& y) {
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case ExprKind::literal: return x->value == y->value;
    case ExprKind::var_n: return true;
    case ExprKind::negate: return structurally_equal(x->a, y->a);
    case ExprKind::call: return x->fn == y->fn && structurally_equal(x->a, y->a);
    default: return structurally_equal(x->a, y->a) && structurally_equal(x->b, y->b);
  }
}

}  // namespace benfordseq
