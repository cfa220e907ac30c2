#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "essdyn/sphere.hpp"

namespace essdyn {

/// Expression trees for the map catalog: complex constants, the variable z,
/// arithmetic, integer powers, exp/sin/cos/tan and composition. Symbolic
/// differentiation is closed over this node set.
enum class ExprOp {
    Const,
    Var,
    Neg,
    Add,
    Mul,
    Div,
    Pow,      // integer exponent
    Exp,
    Sin,
    Cos,
    Tan,
    Compose,  // a(b(z))
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprOp op;
    Complex value{};   // Const
    int exponent = 0;  // Pow
    Expr a, b;
};

Expr constant(Complex v);
Expr variable();
Expr neg(Expr a);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div_expr(Expr a, Expr b);
Expr pow_expr(Expr a, int n);
Expr exp_expr(Expr a);
Expr sin_expr(Expr a);
Expr cos_expr(Expr a);
Expr tan_expr(Expr a);
Expr compose_expr(Expr outer, Expr inner);

Expr differentiate(const Expr& e);
std::string to_string(const Expr& e);

/// Extended complex value used during guarded evaluation. Overflow means an
/// intermediate magnitude exceeded the guard Omega = 1e300; Undefined means
/// the value has no meromorphic determination (essential singularity reached,
/// or an indeterminate form like inf - inf).
struct ExtValue {
    enum class Kind { Finite, Infinite, Overflow, Undefined };
    Kind kind = Kind::Finite;
    Complex v{};

    static ExtValue finite(Complex z) { return {Kind::Finite, z}; }
    static ExtValue infinite() { return {Kind::Infinite, {}}; }
    static ExtValue overflow() { return {Kind::Overflow, {}}; }
    static ExtValue undefined() { return {Kind::Undefined, {}}; }
    bool is_finite() const { return kind == Kind::Finite; }
};

/// Overflow guard on intermediate magnitudes.
inline constexpr double kOverflowGuard = 1e300;

ExtValue eval_ext(const Expr& e, const ExtValue& z);

/// Flattened postfix form of an expression tree; avoids pointer-chasing
/// recursion in orbit-heavy code paths. Evaluation applies the same node
/// semantics in the same order as eval_ext, so results are bit-identical.
struct CompiledExpr {
    enum class Op : std::uint8_t {
        Const, Var, Neg, Add, Mul, Div, Pow, Exp, Sin, Cos, Tan,
        EnterEnv,  // pop value, push onto the variable stack (composition)
        LeaveEnv,
    };
    struct Ins {
        Op op;
        int exponent = 0;
        Complex value{};
    };
    std::vector<Ins> code;
    int max_stack = 0;
    int max_env = 0;
};

CompiledExpr compile_expr(const Expr& e);
ExtValue eval_compiled(const CompiledExpr& c, const ExtValue& z);

}  // namespace essdyn
