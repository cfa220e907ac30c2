#include "essdyn/map_spec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace essdyn {

// ---------------------------------------------------------------------------
// SingularityRule
// ---------------------------------------------------------------------------

SingularityRule SingularityRule::finite_list(std::vector<Complex> pts) {
    return {FiniteList{std::move(pts)}};
}

SingularityRule SingularityRule::lattice(Complex base, double step) {
    return {Lattice{base, step}};
}

SingularityRule SingularityRule::with_infinity(SingularityRule inner) {
    return {WithInfinity{std::make_shared<SingularityRule>(std::move(inner))}};
}

SingularityRule SingularityRule::infinity_only() {
    return with_infinity(finite_list({}));
}

SingularityRule SingularityRule::union_of(std::vector<SingularityRule> parts) {
    Union u;
    for (auto& p : parts) u.parts.push_back(std::make_shared<SingularityRule>(std::move(p)));
    return {std::move(u)};
}

std::optional<std::pair<Complex, double>> SingularityRule::nearest_finite(Complex z) const {
    struct Visitor {
        Complex z;
        std::optional<std::pair<Complex, double>> operator()(const FiniteList& f) const {
            std::optional<std::pair<Complex, double>> best;
            for (const auto& p : f.points) {
                double d = std::abs(z - p);
                if (!best || d < best->second) best = {p, d};
            }
            return best;
        }
        std::optional<std::pair<Complex, double>> operator()(const Lattice& l) const {
            double t = std::round((z.real() - l.base.real()) / l.step);
            Complex p = l.base + t * l.step;
            return {{p, std::abs(z - p)}};
        }
        std::optional<std::pair<Complex, double>> operator()(const WithInfinity& w) const {
            return w.inner->nearest_finite(z);
        }
        std::optional<std::pair<Complex, double>> operator()(const Union& u) const {
            std::optional<std::pair<Complex, double>> best;
            for (const auto& part : u.parts) {
                auto c = part->nearest_finite(z);
                if (c && (!best || c->second < best->second)) best = c;
            }
            return best;
        }
        std::optional<std::pair<Complex, double>> operator()(const Preimage&) const {
            return std::nullopt;
        }
    };
    return std::visit(Visitor{z}, rule);
}

bool SingularityRule::carries_infinity_syntactically() const {
    struct Visitor {
        bool operator()(const SingularityRule::FiniteList&) const { return false; }
        bool operator()(const SingularityRule::Lattice&) const { return true; }
        bool operator()(const SingularityRule::WithInfinity&) const { return true; }
        bool operator()(const SingularityRule::Union& u) const {
            return std::any_of(u.parts.begin(), u.parts.end(), [](const auto& p) {
                return p->carries_infinity_syntactically();
            });
        }
        bool operator()(const SingularityRule::Preimage&) const { return false; }
    };
    return std::visit(Visitor{}, rule);
}

bool SingularityRule::has_preimage_part() const {
    struct Visitor {
        bool operator()(const SingularityRule::Union& u) const {
            return std::any_of(u.parts.begin(), u.parts.end(),
                               [](const auto& p) { return p->has_preimage_part(); });
        }
        bool operator()(const SingularityRule::Preimage&) const { return true; }
        bool operator()(const SingularityRule::FiniteList&) const { return false; }
        bool operator()(const SingularityRule::Lattice&) const { return false; }
        bool operator()(const SingularityRule::WithInfinity& w) const {
            return w.inner->has_preimage_part();
        }
    };
    return std::visit(Visitor{}, rule);
}

std::string class_tag_name(ClassTag t, int m) {
    switch (t) {
        case ClassTag::K0: return "K0";
        case ClassTag::E: return "E";
        case ClassTag::P1: return "P1";
        case ClassTag::P2: return "P2";
        case ClassTag::M: return "M";
        case ClassTag::Km: return "K" + std::to_string(m);
        case ClassTag::Kinf: return "Kinf";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Guarded evaluation
// ---------------------------------------------------------------------------

std::optional<SpherePoint> singular_guard_hit(const MapSpec& map, const SpherePoint& z) {
    const SingularityRule& rule =
        map.is_composed() ? map.comp_inner->singularity_rule : map.singularity_rule;
    if (z.at_infinity) {
        if (rule.carries_infinity_syntactically()) return SpherePoint::infinity();
        return std::nullopt;
    }
    double eps2 = kSingularGuard * kSingularGuard * std::max(1.0, std::norm(z.value));

    // Lattice and short finite-list rules cover every catalog map; handle them
    // inline with squared distances to keep the per-evaluation guard cheap.
    const SingularityRule* r = &rule;
    if (const auto* wi = std::get_if<SingularityRule::WithInfinity>(&r->rule))
        r = wi->inner.get();
    if (const auto* lat = std::get_if<SingularityRule::Lattice>(&r->rule)) {
        double t = std::round((z.value.real() - lat->base.real()) / lat->step);
        Complex p = lat->base + t * lat->step;
        if (std::norm(z.value - p) <= eps2) return SpherePoint::finite(p);
        return std::nullopt;
    }
    if (const auto* fl = std::get_if<SingularityRule::FiniteList>(&r->rule)) {
        for (const auto& p : fl->points)
            if (std::norm(z.value - p) <= eps2) return SpherePoint::finite(p);
        return std::nullopt;
    }

    auto near = rule.nearest_finite(z.value);
    if (near && near->second * near->second <= eps2)
        return SpherePoint::finite(near->first);
    return std::nullopt;
}

namespace {

// Evaluation at infinity when extended arithmetic hits an indeterminate form
// (e.g. z^2/(z-1)): probe the 1/w substitution numerically along several rays.
EvalResult probe_at_infinity(const Expr& expr) {
    static const double angles[] = {0.37, 1.93, 3.51, 5.09};
    static const double radii[] = {1e6, 3.16e7, 1e9};
    std::vector<SpherePoint> results;
    for (double r : radii) {
        for (double th : angles) {
            Complex z = std::polar(r, th);
            ExtValue v = eval_ext(expr, ExtValue::finite(z));
            switch (v.kind) {
                case ExtValue::Kind::Finite:
                    results.push_back(SpherePoint::finite(v.v));
                    break;
                case ExtValue::Kind::Infinite:
                case ExtValue::Kind::Overflow:
                    results.push_back(SpherePoint::infinity());
                    break;
                case ExtValue::Kind::Undefined:
                    return EvalResult::undefined_singular(SpherePoint::infinity());
            }
        }
    }
    for (size_t i = 1; i < results.size(); ++i)
        if (chordal(results[0], results[i]) > 1e-3)
            return EvalResult::undefined_singular(SpherePoint::infinity());
    if (results[0].at_infinity || chordal(results.back(), SpherePoint::infinity()) < 1e-3)
        return EvalResult::at_infinity();
    // Re-evaluate at the largest radius for the best finite estimate.
    ExtValue v = eval_ext(expr, ExtValue::finite(std::polar(1e9, angles[0])));
    return EvalResult::finite(v.v);
}

EvalResult from_ext(const ExtValue& v, const SpherePoint& input, const MapSpec& map) {
    switch (v.kind) {
        case ExtValue::Kind::Finite: return EvalResult::finite(v.v);
        case ExtValue::Kind::Infinite: return EvalResult::at_infinity();
        case ExtValue::Kind::Overflow: return EvalResult::overflowed();
        case ExtValue::Kind::Undefined:
            if (input.at_infinity) return probe_at_infinity(map.expression);
            // An indeterminate form at a finite safe point means the input is
            // a preimage of a singularity of some stage of the map.
            return EvalResult::undefined_singular(input);
    }
    return EvalResult::undefined_singular(input);
}

}  // namespace

EvalResult evaluate(const MapSpec& map, const SpherePoint& z) {
    if (auto hit = singular_guard_hit(map, z)) return EvalResult::undefined_singular(*hit);

    if (map.is_composed()) {
        EvalResult inner = evaluate(*map.comp_inner, z);
        switch (inner.kind) {
            case EvalResult::Kind::Finite:
                return evaluate(*map.comp_outer, inner.value);
            case EvalResult::Kind::AtInfinity:
                return evaluate(*map.comp_outer, SpherePoint::infinity());
            case EvalResult::Kind::UndefinedSingular:
                return inner;  // z is near B(inner) subset B(composed)
            case EvalResult::Kind::OverflowedToInfinity: {
                EvalResult outer = evaluate(*map.comp_outer, SpherePoint::infinity());
                if (outer.kind == EvalResult::Kind::UndefinedSingular)
                    return EvalResult::overflowed();
                return outer;
            }
        }
    }

    ExtValue in = z.at_infinity ? ExtValue::infinite() : ExtValue::finite(z.value);
    ExtValue out = map.compiled ? eval_compiled(*map.compiled, in)
                                : eval_ext(map.expression, in);
    return from_ext(out, z, map);
}

EvalResult derivative(const MapSpec& map, const SpherePoint& z) {
    if (auto hit = singular_guard_hit(map, z)) return EvalResult::undefined_singular(*hit);

    if (z.at_infinity) {
        // Derivative of 1/f(1/w) at the origin; the tree usually carries
        // removable inf/inf forms at w = 0, so take the limit along small
        // probe radii instead of substituting 0 directly.
        Expr inverted = div_expr(
            constant(1.0), compose_expr(map.expression, div_expr(constant(1.0), variable())));
        Expr d = differentiate(inverted);
        ExtValue at0 = eval_ext(d, ExtValue::finite(0.0));
        if (at0.kind != ExtValue::Kind::Undefined)
            return from_ext(at0, SpherePoint::finite(0.0), map);
        static const double angles[] = {0.37, 1.93, 3.51, 5.09};
        static const double radii[] = {1e-6, 1e-7, 1e-8};
        std::vector<SpherePoint> results;
        for (double r : radii)
            for (double th : angles) {
                ExtValue v = eval_ext(d, ExtValue::finite(std::polar(r, th)));
                switch (v.kind) {
                    case ExtValue::Kind::Finite:
                        results.push_back(SpherePoint::finite(v.v));
                        break;
                    case ExtValue::Kind::Infinite:
                    case ExtValue::Kind::Overflow:
                        results.push_back(SpherePoint::infinity());
                        break;
                    case ExtValue::Kind::Undefined:
                        return EvalResult::undefined_singular(SpherePoint::infinity());
                }
            }
        for (size_t i = 1; i < results.size(); ++i)
            if (chordal(results[0], results[i]) > 1e-4)
                return EvalResult::undefined_singular(SpherePoint::infinity());
        if (results.back().at_infinity) return EvalResult::at_infinity();
        return EvalResult::finite(results.back().value);
    }

    if (map.is_composed()) {
        EvalResult inner_val = evaluate(*map.comp_inner, z);
        if (inner_val.kind == EvalResult::Kind::Finite) {
            EvalResult d_outer = derivative(*map.comp_outer, inner_val.value);
            EvalResult d_inner = derivative(*map.comp_inner, z);
            if (d_outer.is_finite() && d_inner.is_finite())
                return EvalResult::finite(d_outer.value.value * d_inner.value.value);
        }
        // Fall through to the symbolic tree for the exceptional branches.
    }

    ExtValue v = eval_ext(differentiate(map.expression), ExtValue::finite(z.value));
    return from_ext(v, z, map);
}

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

MapSpec compose_maps(const MapSpec& outer, const MapSpec& inner) {
    MapSpec r;
    r.label = "(" + outer.label + " o " + inner.label + ")";
    r.expression = compose_expr(outer.expression, inner.expression);
    r.comp_outer = std::make_shared<MapSpec>(outer);
    r.comp_inner = std::make_shared<MapSpec>(inner);

    SingularityRule::Preimage pre{r.comp_inner,
                                  std::make_shared<SingularityRule>(outer.singularity_rule)};
    SingularityRule::Union u;
    u.parts.push_back(std::make_shared<SingularityRule>(inner.singularity_rule));
    u.parts.push_back(std::make_shared<SingularityRule>(SingularityRule{std::move(pre)}));
    r.singularity_rule = SingularityRule{std::move(u)};

    if (outer.class_tag == ClassTag::K0 && inner.class_tag != ClassTag::K0) {
        // Pole-free outer maps preserve the singular set.
        r.class_tag = inner.class_tag;
        r.class_m = inner.class_m;
    } else {
        // The composed cardinality is resolved per window; tag conservatively.
        r.class_tag = ClassTag::Kinf;
    }
    r.declared_singular_values = outer.declared_singular_values;
    r.compiled = std::make_shared<CompiledExpr>(compile_expr(r.expression));
    return r;
}

MapSpec iterate_map(const MapSpec& map, int n) {
    if (n < 1) throw std::invalid_argument("iterate_map: n >= 1 required");
    MapSpec r = map;
    for (int i = 1; i < n; ++i) r = compose_maps(r, map);
    return r;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

namespace {

using std::numbers::pi;

Complex param(const std::map<std::string, Complex>& p, const std::string& k, Complex def) {
    auto it = p.find(k);
    return it == p.end() ? def : it->second;
}

SpherePoint inf_pt() { return SpherePoint::infinity(); }
SpherePoint pt(Complex z) { return SpherePoint::finite(z); }

}  // namespace

MapSpec make_catalog_map(const std::string& label,
                         const std::map<std::string, Complex>& params) {
    Expr z = variable();
    MapSpec m;
    m.label = label;

    if (label == "exp") {
        Complex lam = param(params, "lambda", 1.0);
        m.expression = mul(constant(lam), exp_expr(z));
        m.singularity_rule = SingularityRule::infinity_only();
        m.class_tag = ClassTag::E;
        m.declared_singular_values = {pt(0.0), inf_pt()};
    } else if (label == "sin") {
        Complex lam = param(params, "lambda", 1.0);
        m.expression = mul(constant(lam), sin_expr(z));
        m.singularity_rule = SingularityRule::infinity_only();
        m.class_tag = ClassTag::E;
        m.declared_singular_values = {pt(lam), pt(-lam), inf_pt()};
    } else if (label == "tan") {
        Complex lam = param(params, "lambda", 1.0);
        m.expression = mul(constant(lam), tan_expr(z));
        m.singularity_rule = SingularityRule::infinity_only();
        m.class_tag = ClassTag::M;
        m.declared_singular_values = {pt(lam * Complex(0, 1)), pt(lam * Complex(0, -1))};
    } else if (label == "zexp") {
        Complex lam = param(params, "lambda", 1.0);
        m.expression = mul(constant(lam), mul(z, exp_expr(z)));
        m.singularity_rule = SingularityRule::infinity_only();
        m.class_tag = ClassTag::E;
        m.declared_singular_values = {pt(-lam * std::exp(-1.0)), pt(0.0), inf_pt()};
    } else if (label == "exp_over_z") {
        Complex lam = param(params, "lambda", 1.0);
        m.expression = div_expr(mul(constant(lam), exp_expr(z)), z);
        m.singularity_rule = SingularityRule::infinity_only();
        m.class_tag = ClassTag::P1;
        m.declared_singular_values = {pt(0.0), inf_pt(), pt(lam * std::exp(1.0))};
    } else if (label == "p2") {
        Complex al = param(params, "alpha", 0.25);
        m.expression = exp_expr(mul(constant(al), sub(z, div_expr(constant(1.0), z))));
        m.singularity_rule = SingularityRule::with_infinity(SingularityRule::finite_list({0.0}));
        m.class_tag = ClassTag::P2;
        m.declared_singular_values = {pt(0.0), inf_pt()};
    } else if (label == "exp_mu") {
        Complex lam = param(params, "lambda", 1.0);
        Complex mu = param(params, "mu", 1.0);
        m.expression = add(mul(constant(lam), exp_expr(z)), div_expr(constant(mu), z));
        m.singularity_rule = SingularityRule::infinity_only();
        m.class_tag = ClassTag::M;
        m.declared_singular_values = {pt(0.0), inf_pt()};
    } else if (label == "exptan") {
        m.expression = mul(exp_expr(div_expr(constant(1.0), z)), tan_expr(z));
        m.singularity_rule = SingularityRule::with_infinity(SingularityRule::finite_list({0.0}));
        m.class_tag = ClassTag::Km;
        m.class_m = 2;
        m.declared_singular_values = {pt(0.0), inf_pt(), pt(Complex(0, 1)), pt(Complex(0, -1))};
    } else if (label == "fatou") {
        m.expression = add(add(exp_expr(neg(z)), z), constant(1.0));
        m.singularity_rule = SingularityRule::infinity_only();
        m.class_tag = ClassTag::E;
        m.declared_singular_values = {inf_pt()};
    } else if (label == "h") {
        m.expression = add(neg(exp_expr(z)), div_expr(constant(1.0), z));
        m.singularity_rule = SingularityRule::infinity_only();
        m.class_tag = ClassTag::M;
        m.declared_singular_values = {inf_pt(), pt(0.0)};
    } else if (label == "g") {
        m.expression = add(exp_expr(div_expr(constant(1.0), sin_expr(z))), z);
        m.singularity_rule = SingularityRule::lattice(0.0, pi);
        m.class_tag = ClassTag::Kinf;
        m.declared_singular_values = {pt(0.0), inf_pt()};
    } else if (label == "f") {
        m.expression =
            add(add(exp_expr(div_expr(constant(1.0), sin_expr(z))), z), constant(2 * pi));
        m.singularity_rule = SingularityRule::lattice(0.0, pi);
        m.class_tag = ClassTag::Kinf;
        m.declared_singular_values = {pt(0.0), inf_pt()};
    } else if (label == "fn") {
        int n = int(std::lround(param(params, "n", 3.0).real()));
        if (n < 1) throw std::invalid_argument("fn: n >= 1 required");
        Complex rot = std::exp(Complex(0, 2 * pi / n)) / double(n);
        m.expression = add(exp_expr(div_expr(constant(1.0), sub(pow_expr(z, n), constant(1.0)))),
                           mul(constant(rot), z));
        std::vector<Complex> roots;
        for (int k = 0; k < n; ++k) roots.push_back(std::exp(Complex(0, 2 * pi * k / n)));
        m.singularity_rule = SingularityRule::finite_list(roots);
        m.class_tag = ClassTag::Km;
        m.class_m = n;
        m.declared_singular_values = {pt(0.0), inf_pt()};
    } else if (label == "exp1z_pole") {
        m.expression = add(exp_expr(div_expr(constant(1.0), z)),
                           div_expr(constant(1.0), sub(z, constant(1.0))));
        m.singularity_rule = SingularityRule::finite_list({0.0});
        m.class_tag = ClassTag::Km;
        m.class_m = 1;
        m.declared_singular_values = {pt(0.0), inf_pt()};
    } else if (label == "zsq_over_zm1") {
        m.expression = div_expr(pow_expr(z, 2), sub(z, constant(1.0)));
        m.singularity_rule = SingularityRule::finite_list({});
        m.class_tag = ClassTag::K0;
    } else if (label == "poly_id") {
        m.expression = add(z, constant(0.0));
        m.singularity_rule = SingularityRule::finite_list({});
        m.class_tag = ClassTag::K0;
    } else {
        throw std::invalid_argument("unknown map label: " + label);
    }
    m.compiled = std::make_shared<CompiledExpr>(compile_expr(m.expression));
    return m;
}

std::vector<std::string> catalog_labels() {
    return {"exp",   "sin",    "tan", "zexp", "exp_over_z", "p2",
            "exp_mu", "exptan", "fatou", "h",  "g",          "f",
            "fn",    "exp1z_pole", "zsq_over_zm1", "poly_id"};
}

std::vector<MapSpec> builtin_catalog() {
    std::vector<MapSpec> out;
    for (const auto& l : catalog_labels()) out.push_back(make_catalog_map(l));
    return out;
}

}  // namespace essdyn
