#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace benfordseq {

// Coefficient expressions over the step variable n.
//
// Grammar (EBNF, also documented in the README):
//   expr    = term { ("+" | "-") term } ;
//   term    = unary { ("*" | "/") unary } ;
//   unary   = "-" unary | power ;
//   power   = atom [ "^" unary ] ;            (* right associative *)
//   atom    = number | "n" | call | "(" expr ")" ;
//   call    = ident "(" expr { "," expr } ")" ;
//   ident   = "exp" | "log" | "log10" | "sqrt" | "floor" | "abs"
//           | "pow" | "uniform" ;
// "^" binds tighter than unary minus: -2^2 evaluates to -4.
// pow(a, b) parses to the same node as a^b.

enum class ExprKind {
  literal,
  var_n,
  negate,
  add,
  sub,
  mul,
  divide,
  power,
  call,
  uniform,
};

enum class CallFn { exp_fn, log_fn, log10_fn, sqrt_fn, floor_fn, abs_fn };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  double value = 0.0;  // literal
  CallFn fn{};         // call
  Expr a, b;           // operands; uniform uses (a, b) as (lo, hi)
};

// Deterministic evaluation state. draw_counter advances once per random
// node visited, in pre-order, so a draw's value depends only on
// (trial_seed, n, position), never on evaluation interleaving.
struct EvalContext {
  std::int64_t n = 1;
  std::uint64_t trial_seed = 0;
  std::uint64_t draw_counter = 0;
};

inline constexpr const char* kGeneratorId = "splitmix64-ctr-v1";

std::uint64_t mix64(std::uint64_t x);

// Independent stream for coefficient slot `idx` under one spec seed; keeps
// same-step draws in different coefficient expressions from colliding.
std::uint64_t substream(std::uint64_t seed, std::uint64_t idx);

// The keyed counter generator behind `uniform`, mapped to [0, 1).
double unit_draw(std::uint64_t trial_seed, std::int64_t n, std::uint64_t counter);

Expr parse_expr(std::string_view text);  // throws ParseError with byte offset
std::string to_string(const Expr& e);    // reparses to a structurally equal tree
double eval(const Expr& e, EvalContext& ctx);  // throws DomainError

bool is_constant(const Expr& e);  // free of n and of random draws
bool has_random(const Expr& e);
bool structurally_equal(const Expr& x, const Expr& y);

}  // namespace benfordseq
