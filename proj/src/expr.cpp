#include "essdyn/expr.hpp"

#include <cmath>
#include <sstream>

namespace essdyn {

namespace {

Expr node(ExprOp op, Expr a = nullptr, Expr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

bool is_const(const Expr& e, Complex v) {
    return e->op == ExprOp::Const && e->value == v;
}

}  // namespace

Expr constant(Complex v) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Const;
    n->value = v;
    return n;
}

Expr variable() { return node(ExprOp::Var); }
Expr neg(Expr a) { return node(ExprOp::Neg, std::move(a)); }

Expr add(Expr a, Expr b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return node(ExprOp::Add, std::move(a), std::move(b));
}

Expr sub(Expr a, Expr b) { return add(std::move(a), neg(std::move(b))); }

Expr mul(Expr a, Expr b) {
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    return node(ExprOp::Mul, std::move(a), std::move(b));
}

Expr div_expr(Expr a, Expr b) {
    if (is_const(b, 1.0)) return a;
    return node(ExprOp::Div, std::move(a), std::move(b));
}

Expr pow_expr(Expr a, int n) {
    if (n == 1) return a;
    auto e = node(ExprOp::Pow, std::move(a));
    const_cast<ExprNode*>(e.get())->exponent = n;
    return e;
}

Expr exp_expr(Expr a) { return node(ExprOp::Exp, std::move(a)); }
Expr sin_expr(Expr a) { return node(ExprOp::Sin, std::move(a)); }
Expr cos_expr(Expr a) { return node(ExprOp::Cos, std::move(a)); }
Expr tan_expr(Expr a) { return node(ExprOp::Tan, std::move(a)); }
Expr compose_expr(Expr outer, Expr inner) {
    if (inner->op == ExprOp::Var) return outer;
    return node(ExprOp::Compose, std::move(outer), std::move(inner));
}

Expr differentiate(const Expr& e) {
    switch (e->op) {
        case ExprOp::Const: return constant(0.0);
        case ExprOp::Var: return constant(1.0);
        case ExprOp::Neg: return neg(differentiate(e->a));
        case ExprOp::Add: return add(differentiate(e->a), differentiate(e->b));
        case ExprOp::Mul:
            return add(mul(differentiate(e->a), e->b), mul(e->a, differentiate(e->b)));
        case ExprOp::Div:
            return div_expr(sub(mul(differentiate(e->a), e->b), mul(e->a, differentiate(e->b))),
                            pow_expr(e->b, 2));
        case ExprOp::Pow:
            return mul(mul(constant(double(e->exponent)), pow_expr(e->a, e->exponent - 1)),
                       differentiate(e->a));
        case ExprOp::Exp: return mul(exp_expr(e->a), differentiate(e->a));
        case ExprOp::Sin: return mul(cos_expr(e->a), differentiate(e->a));
        case ExprOp::Cos: return neg(mul(sin_expr(e->a), differentiate(e->a)));
        case ExprOp::Tan:
            return mul(add(constant(1.0), pow_expr(tan_expr(e->a), 2)), differentiate(e->a));
        case ExprOp::Compose:
            return mul(compose_expr(differentiate(e->a), e->b), differentiate(e->b));
    }
    return constant(0.0);
}

namespace {

std::string fmt_complex(Complex v) {
    std::ostringstream os;
    if (v.imag() == 0.0) {
        os << v.real();
    } else if (v.real() == 0.0) {
        os << v.imag() << "i";
    } else {
        os << "(" << v.real() << (v.imag() < 0 ? "" : "+") << v.imag() << "i)";
    }
    return os.str();
}

}  // namespace

std::string to_string(const Expr& e) {
    switch (e->op) {
        case ExprOp::Const: return fmt_complex(e->value);
        case ExprOp::Var: return "z";
        case ExprOp::Neg: return "-(" + to_string(e->a) + ")";
        case ExprOp::Add: return "(" + to_string(e->a) + " + " + to_string(e->b) + ")";
        case ExprOp::Mul: return "(" + to_string(e->a) + " * " + to_string(e->b) + ")";
        case ExprOp::Div: return "(" + to_string(e->a) + " / " + to_string(e->b) + ")";
        case ExprOp::Pow: return "(" + to_string(e->a) + ")^" + std::to_string(e->exponent);
        case ExprOp::Exp: return "exp(" + to_string(e->a) + ")";
        case ExprOp::Sin: return "sin(" + to_string(e->a) + ")";
        case ExprOp::Cos: return "cos(" + to_string(e->a) + ")";
        case ExprOp::Tan: return "tan(" + to_string(e->a) + ")";
        case ExprOp::Compose:
            return "(" + to_string(e->a) + ") o (" + to_string(e->b) + ")";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Extended arithmetic
// ---------------------------------------------------------------------------

namespace {

using K = ExtValue::Kind;

// exp overflows the guard once Re exceeds log(1e300); sin/cos once |Im| does.
constexpr double kExpArgLimit = 690.77;

ExtValue check_finite(Complex v) {
    if (std::isnan(v.real()) || std::isnan(v.imag())) return ExtValue::undefined();
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) ||
        std::fabs(v.real()) > kOverflowGuard || std::fabs(v.imag()) > kOverflowGuard)
        return ExtValue::overflow();
    return ExtValue::finite(v);
}

bool big(const ExtValue& x) { return x.kind == K::Infinite || x.kind == K::Overflow; }

ExtValue ext_neg(const ExtValue& a) {
    if (a.is_finite()) return ExtValue::finite(-a.v);
    return a;
}

ExtValue ext_add(const ExtValue& a, const ExtValue& b) {
    if (a.kind == K::Undefined || b.kind == K::Undefined) return ExtValue::undefined();
    if (big(a) && big(b)) return ExtValue::undefined();  // possible cancellation
    if (big(a)) return a;
    if (big(b)) return b;
    return check_finite(a.v + b.v);
}

ExtValue ext_mul(const ExtValue& a, const ExtValue& b) {
    if (a.kind == K::Undefined || b.kind == K::Undefined) return ExtValue::undefined();
    if (big(a) || big(b)) {
        const ExtValue& fin = big(a) ? b : a;
        if (fin.is_finite() && fin.v == 0.0) return ExtValue::undefined();
        if (a.kind == K::Overflow || b.kind == K::Overflow) return ExtValue::overflow();
        return ExtValue::infinite();
    }
    return check_finite(a.v * b.v);
}

ExtValue ext_div(const ExtValue& a, const ExtValue& b) {
    if (a.kind == K::Undefined || b.kind == K::Undefined) return ExtValue::undefined();
    if (big(a) && big(b)) return ExtValue::undefined();
    if (big(b)) return ExtValue::finite(0.0);
    if (b.v == 0.0) {
        if (a.is_finite() && a.v == 0.0) return ExtValue::undefined();
        return a.is_finite() ? ExtValue::infinite() : a;
    }
    if (big(a)) return a;
    return check_finite(a.v / b.v);
}

ExtValue ext_pow(const ExtValue& a, int n) {
    if (a.kind == K::Undefined) return ExtValue::undefined();
    if (n == 0) return big(a) ? ExtValue::undefined() : ExtValue::finite(1.0);
    if (n < 0) return ext_div(ExtValue::finite(1.0), ext_pow(a, -n));
    if (big(a)) return a;
    ExtValue r = ExtValue::finite(1.0);
    for (int i = 0; i < n; ++i) {
        r = ext_mul(r, a);
        if (!r.is_finite()) return r;
    }
    return r;
}

void fused_sincos(double x, double* s, double* c) {
#if defined(__GNUC__)
    __builtin_sincos(x, s, c);
#else
    *s = std::sin(x);
    *c = std::cos(x);
#endif
}

ExtValue ext_exp(const ExtValue& a) {
    if (!a.is_finite()) return ExtValue::undefined();  // essential singularity at inf
    if (a.v.real() > kExpArgLimit) return ExtValue::overflow();
    if (a.v.real() < -746.0) return ExtValue::finite(0.0);
    double s, c;
    fused_sincos(a.v.imag(), &s, &c);
    double m = std::exp(a.v.real());
    return check_finite({m * c, m * s});
}

ExtValue ext_sin(const ExtValue& a) {
    if (!a.is_finite()) return ExtValue::undefined();
    double y = a.v.imag();
    if (std::fabs(y) > kExpArgLimit) return ExtValue::overflow();
    double s, c;
    fused_sincos(a.v.real(), &s, &c);
    return check_finite({s * std::cosh(y), c * std::sinh(y)});
}

ExtValue ext_cos(const ExtValue& a) {
    if (!a.is_finite()) return ExtValue::undefined();
    double y = a.v.imag();
    if (std::fabs(y) > kExpArgLimit) return ExtValue::overflow();
    double s, c;
    fused_sincos(a.v.real(), &s, &c);
    return check_finite({c * std::cosh(y), -s * std::sinh(y)});
}

ExtValue ext_tan(const ExtValue& a) {
    if (!a.is_finite()) return ExtValue::undefined();
    // tan tends to +-i away from the real axis; sin and cos both overflow there.
    if (a.v.imag() > 25.0) return ExtValue::finite(Complex(0.0, 1.0));
    if (a.v.imag() < -25.0) return ExtValue::finite(Complex(0.0, -1.0));
    return ext_div(ext_sin(a), ext_cos(a));
}

}  // namespace

ExtValue eval_ext(const Expr& e, const ExtValue& z) {
    switch (e->op) {
        case ExprOp::Const: return ExtValue::finite(e->value);
        case ExprOp::Var: return z;
        case ExprOp::Neg: return ext_neg(eval_ext(e->a, z));
        case ExprOp::Add: return ext_add(eval_ext(e->a, z), eval_ext(e->b, z));
        case ExprOp::Mul: return ext_mul(eval_ext(e->a, z), eval_ext(e->b, z));
        case ExprOp::Div: return ext_div(eval_ext(e->a, z), eval_ext(e->b, z));
        case ExprOp::Pow: return ext_pow(eval_ext(e->a, z), e->exponent);
        case ExprOp::Exp: return ext_exp(eval_ext(e->a, z));
        case ExprOp::Sin: return ext_sin(eval_ext(e->a, z));
        case ExprOp::Cos: return ext_cos(eval_ext(e->a, z));
        case ExprOp::Tan: return ext_tan(eval_ext(e->a, z));
        case ExprOp::Compose: return eval_ext(e->a, eval_ext(e->b, z));
    }
    return ExtValue::undefined();
}

namespace {

void compile_into(const Expr& e, CompiledExpr& out, int depth, int env,
                  int& stack_peak, int& env_peak) {
    using Op = CompiledExpr::Op;
    stack_peak = std::max(stack_peak, depth + 1);
    env_peak = std::max(env_peak, env);
    switch (e->op) {
        case ExprOp::Const:
            out.code.push_back({Op::Const, 0, e->value});
            return;
        case ExprOp::Var:
            out.code.push_back({Op::Var});
            return;
        case ExprOp::Neg:
            compile_into(e->a, out, depth, env, stack_peak, env_peak);
            out.code.push_back({Op::Neg});
            return;
        case ExprOp::Add:
        case ExprOp::Mul:
        case ExprOp::Div:
            compile_into(e->a, out, depth, env, stack_peak, env_peak);
            compile_into(e->b, out, depth + 1, env, stack_peak, env_peak);
            out.code.push_back({e->op == ExprOp::Add  ? Op::Add
                                : e->op == ExprOp::Mul ? Op::Mul
                                                       : Op::Div});
            return;
        case ExprOp::Pow:
            compile_into(e->a, out, depth, env, stack_peak, env_peak);
            out.code.push_back({Op::Pow, e->exponent});
            return;
        case ExprOp::Exp:
        case ExprOp::Sin:
        case ExprOp::Cos:
        case ExprOp::Tan:
            compile_into(e->a, out, depth, env, stack_peak, env_peak);
            out.code.push_back({e->op == ExprOp::Exp   ? Op::Exp
                                : e->op == ExprOp::Sin ? Op::Sin
                                : e->op == ExprOp::Cos ? Op::Cos
                                                       : Op::Tan});
            return;
        case ExprOp::Compose:
            compile_into(e->b, out, depth, env, stack_peak, env_peak);
            out.code.push_back({Op::EnterEnv});
            compile_into(e->a, out, depth, env + 1, stack_peak, env_peak);
            out.code.push_back({Op::LeaveEnv});
            return;
    }
}

}  // namespace

CompiledExpr compile_expr(const Expr& e) {
    CompiledExpr c;
    int stack_peak = 0, env_peak = 0;
    compile_into(e, c, 0, 1, stack_peak, env_peak);
    c.max_stack = stack_peak;
    c.max_env = env_peak;
    return c;
}

ExtValue eval_compiled(const CompiledExpr& c, const ExtValue& z) {
    using Op = CompiledExpr::Op;
    // Uninitialized scratch space: every slot is written before it is read,
    // and default-constructing the full arrays costs more than the evaluation
    // of a small expression.
    alignas(ExtValue) unsigned char stack_bytes[40 * sizeof(ExtValue)];
    alignas(ExtValue) unsigned char env_bytes[8 * sizeof(ExtValue)];
    std::vector<ExtValue> heap_stack, heap_env;
    ExtValue* stack = reinterpret_cast<ExtValue*>(stack_bytes);
    ExtValue* env = reinterpret_cast<ExtValue*>(env_bytes);
    if (c.max_stack > 40 || c.max_env + 1 > 8) {
        heap_stack.resize(size_t(c.max_stack) + 1);
        heap_env.resize(size_t(c.max_env) + 2);
        stack = heap_stack.data();
        env = heap_env.data();
    }
    int sp = 0, ep = 0;
    env[ep] = z;
    for (const auto& ins : c.code) {
        switch (ins.op) {
            case Op::Const: stack[sp++] = ExtValue::finite(ins.value); break;
            case Op::Var: stack[sp++] = env[ep]; break;
            case Op::Neg: stack[sp - 1] = ext_neg(stack[sp - 1]); break;
            case Op::Add: --sp; stack[sp - 1] = ext_add(stack[sp - 1], stack[sp]); break;
            case Op::Mul: --sp; stack[sp - 1] = ext_mul(stack[sp - 1], stack[sp]); break;
            case Op::Div: --sp; stack[sp - 1] = ext_div(stack[sp - 1], stack[sp]); break;
            case Op::Pow: stack[sp - 1] = ext_pow(stack[sp - 1], ins.exponent); break;
            case Op::Exp: stack[sp - 1] = ext_exp(stack[sp - 1]); break;
            case Op::Sin: stack[sp - 1] = ext_sin(stack[sp - 1]); break;
            case Op::Cos: stack[sp - 1] = ext_cos(stack[sp - 1]); break;
            case Op::Tan: stack[sp - 1] = ext_tan(stack[sp - 1]); break;
            case Op::EnterEnv: env[++ep] = stack[--sp]; break;
            case Op::LeaveEnv: --ep; break;
        }
    }
    return stack[0];
}

}  // namespace essdyn
