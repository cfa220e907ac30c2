#include "essdyn/singularity.hpp"

#include <algorithm>
#include <cmath>

namespace essdyn {

namespace {

void dedup_sort(std::vector<Complex>& pts, double tol = 1e-9) {
    std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    std::vector<Complex> out;
    for (Complex p : pts) {
        bool dup = false;
        for (const Complex& q : out)
            if (std::abs(p - q) <= tol) {
                dup = true;
                break;
            }
        if (!dup) out.push_back(p);
    }
    pts = std::move(out);
}

bool map_value(const MapSpec& map, Complex z, Complex& out) {
    EvalResult r = evaluate(map, SpherePoint::finite(z));
    if (!r.is_finite()) return false;
    out = r.value.value;
    return true;
}

bool map_deriv(const MapSpec& map, Complex z, Complex& out) {
    EvalResult r = derivative(map, SpherePoint::finite(z));
    if (!r.is_finite()) return false;
    out = r.value.value;
    return true;
}

// Solutions of f(z) = target (target may be infinity: solve 1/f = 0).
std::vector<Complex> solve_preimages(const MapSpec& map, const SpherePoint& target,
                                     const Window& window) {
    std::function<bool(Complex, Complex&)> fn, fd;
    if (target.at_infinity) {
        fn = [&map](Complex z, Complex& out) {
            Complex v;
            if (!map_value(map, z, v) || v == Complex(0.0)) return false;
            out = 1.0 / v;
            return true;
        };
        fd = [&map](Complex z, Complex& out) {
            Complex v, d;
            if (!map_value(map, z, v) || !map_deriv(map, z, d) || v == Complex(0.0))
                return false;
            out = -d / (v * v);
            return true;
        };
    } else {
        Complex e = target.value;
        fn = [&map, e](Complex z, Complex& out) {
            Complex v;
            if (!map_value(map, z, v)) return false;
            out = v - e;
            return true;
        };
        fd = [&map](Complex z, Complex& out) { return map_deriv(map, z, out); };
    }
    return grid_newton_roots(fn, fd, window);
}

// Largest finite |f(z)| seen on a coarse grid over the window; bounds which
// outer-map singularities can be reached from the window at all.
double sampled_range_radius(const MapSpec& map, const Window& window) {
    double r = 10.0;
    const int n = 24;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            Complex z(window.re_min + (ix + 0.5) * window.width() / n,
                      window.im_min + (iy + 0.5) * window.height() / n);
            EvalResult v = evaluate(map, SpherePoint::finite(z));
            if (v.is_finite()) r = std::max(r, std::abs(v.value.value));
        }
    return std::min(r + 1.0, 1e6);
}

// Finite points of a rule inside a disc of radius R (lattices enumerate).
void enumerate_rule_in_disc(const SingularityRule& rule, double R,
                            std::vector<Complex>& out) {
    struct Visitor {
        double R;
        std::vector<Complex>& out;
        void operator()(const SingularityRule::FiniteList& f) const {
            for (Complex p : f.points)
                if (std::abs(p) <= R) out.push_back(p);
        }
        void operator()(const SingularityRule::Lattice& l) const {
            long k0 = std::lround((-R - l.base.real()) / l.step);
            long k1 = std::lround((R - l.base.real()) / l.step);
            for (long k = k0 - 1; k <= k1 + 1; ++k) {
                Complex p = l.base + double(k) * l.step;
                if (std::abs(p) <= R) out.push_back(p);
            }
        }
        void operator()(const SingularityRule::WithInfinity& w) const {
            enumerate_rule_in_disc(*w.inner, R, out);
        }
        void operator()(const SingularityRule::Union& u) const {
            for (const auto& p : u.parts) enumerate_rule_in_disc(*p, R, out);
        }
        void operator()(const SingularityRule::Preimage&) const {
            // Nested preimage rules are resolved one composition level at a
            // time by resolve_rule; a raw enumeration has no finite list.
        }
    };
    std::visit(Visitor{R, out}, rule.rule);
}

bool point_in_rule(const SingularityRule& rule, const SpherePoint& p, double tol) {
    if (p.at_infinity) return rule.carries_infinity_syntactically();
    auto near = rule.nearest_finite(p.value);
    return near && near->second <= tol;
}

void resolve_rule(const SingularityRule& rule, const Window& window, bool sphere_mode,
                  std::vector<Complex>& finite_out, bool& has_inf) {
    struct Visitor {
        const Window& window;
        bool sphere_mode;
        std::vector<Complex>& finite_out;
        bool& has_inf;

        void operator()(const SingularityRule::FiniteList& f) const {
            for (Complex p : f.points)
                if (window.contains(p)) finite_out.push_back(p);
        }
        void operator()(const SingularityRule::Lattice& l) const {
            long k0 = std::lround(std::floor((window.re_min - l.base.real()) / l.step));
            long k1 = std::lround(std::ceil((window.re_max - l.base.real()) / l.step));
            for (long k = k0 - 1; k <= k1 + 1; ++k) {
                Complex p = l.base + double(k) * l.step;
                if (window.contains(p)) finite_out.push_back(p);
            }
            has_inf = has_inf || sphere_mode;
        }
        void operator()(const SingularityRule::WithInfinity& w) const {
            resolve_rule(*w.inner, window, sphere_mode, finite_out, has_inf);
            has_inf = has_inf || sphere_mode;
        }
        void operator()(const SingularityRule::Union& u) const {
            for (const auto& p : u.parts)
                resolve_rule(*p, window, sphere_mode, finite_out, has_inf);
        }
        void operator()(const SingularityRule::Preimage& pre) const {
            const MapSpec& inner = *pre.inner_map;
            double R = sampled_range_radius(inner, window);
            std::vector<Complex> targets;
            enumerate_rule_in_disc(*pre.outer_rule, R, targets);
            dedup_sort(targets);
            for (Complex e : targets) {
                auto roots = solve_preimages(inner, SpherePoint::finite(e), window);
                finite_out.insert(finite_out.end(), roots.begin(), roots.end());
            }
            if (pre.outer_rule->carries_infinity_syntactically()) {
                auto poles = solve_preimages(inner, SpherePoint::infinity(), window);
                finite_out.insert(finite_out.end(), poles.begin(), poles.end());
            }
            if (sphere_mode && !has_inf) {
                EvalResult at_inf = evaluate(inner, SpherePoint::infinity());
                SpherePoint img;
                bool known = false;
                if (at_inf.kind == EvalResult::Kind::Finite) {
                    img = at_inf.value;
                    known = true;
                } else if (at_inf.kind == EvalResult::Kind::AtInfinity ||
                           at_inf.kind == EvalResult::Kind::OverflowedToInfinity) {
                    img = SpherePoint::infinity();
                    known = true;
                }
                if (known && point_in_rule(*pre.outer_rule, img, 1e-6)) has_inf = true;
            }
        }
    };
    std::visit(Visitor{window, sphere_mode, finite_out, has_inf}, rule.rule);
}

}  // namespace

std::vector<SpherePoint> singularities_in_window(const MapSpec& map, const Window& window,
                                                 bool sphere_mode) {
    std::vector<Complex> finite;
    bool has_inf = false;
    resolve_rule(map.singularity_rule, window, sphere_mode, finite, has_inf);
    dedup_sort(finite);
    std::vector<SpherePoint> out;
    for (Complex p : finite) out.push_back(SpherePoint::finite(p));
    if (has_inf) out.push_back(SpherePoint::infinity());
    return out;
}

PreSingularityTree presingularities(const MapSpec& map, const SpherePoint& e, int depth,
                                    const Window& window) {
    PreSingularityTree tree;
    tree.root = e;
    tree.window = window;
    tree.depth = depth;
    std::vector<SpherePoint> targets = {e};
    for (int level = 1; level <= depth; ++level) {
        std::vector<Complex> pts;
        for (const SpherePoint& t : targets) {
            auto roots = solve_preimages(map, t, window);
            pts.insert(pts.end(), roots.begin(), roots.end());
        }
        dedup_sort(pts);
        targets.clear();
        for (Complex p : pts) targets.push_back(SpherePoint::finite(p));
        tree.levels.push_back(std::move(pts));
    }
    return tree;
}

nlohmann::json tree_to_json(const PreSingularityTree& tree) {
    nlohmann::json j;
    j["root"] = tree.root.at_infinity
                    ? nlohmann::json("inf")
                    : nlohmann::json({tree.root.value.real(), tree.root.value.imag()});
    j["window"] = {{"re_min", tree.window.re_min},
                   {"re_max", tree.window.re_max},
                   {"im_min", tree.window.im_min},
                   {"im_max", tree.window.im_max}};
    j["depth"] = tree.depth;
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& level : tree.levels) {
        nlohmann::json pts = nlohmann::json::array();
        for (Complex p : level) pts.push_back({p.real(), p.imag()});
        levels.push_back(pts);
    }
    j["levels"] = levels;
    return j;
}

ClassCountResult composition_class_count(ClassTag tag, int n, int m) {
    switch (tag) {
        case ClassTag::K0:
            return ClassCountResult::finite(0);
        case ClassTag::E:
            return ClassCountResult::finite(1);
        case ClassTag::P1:
            return n == 1 ? ClassCountResult::finite(1) : ClassCountResult::finite(2);
        case ClassTag::P2:
            return ClassCountResult::finite(2);
        case ClassTag::M:
            if (n == 1) return ClassCountResult::finite(1);
            if (n == 2) return ClassCountResult::indeterminate();
            return ClassCountResult::infinite();
        case ClassTag::Km:
            if (n == 1) return ClassCountResult::finite(m);
            if (m >= 3) return ClassCountResult::infinite();
            // m == 2, outside P2: the two-point case mirrors class M.
            if (n == 2) return ClassCountResult::indeterminate();
            return ClassCountResult::infinite();
        case ClassTag::Kinf:
            return ClassCountResult::infinite();
    }
    return ClassCountResult::indeterminate();
}

std::vector<SpherePoint> critical_points(const MapSpec& map, const Window& window) {
    Expr d1 = differentiate(map.expression);
    Expr d2 = differentiate(d1);
    auto eval_tree = [&map](const Expr& e, Complex z, Complex& out) {
        if (singular_guard_hit(map, SpherePoint::finite(z))) return false;
        ExtValue v = eval_ext(e, ExtValue::finite(z));
        if (!v.is_finite()) return false;
        out = v.v;
        return true;
    };
    auto fn = [&](Complex z, Complex& out) { return eval_tree(d1, z, out); };
    auto fd = [&](Complex z, Complex& out) { return eval_tree(d2, z, out); };
    auto roots = grid_newton_roots(fn, fd, window);
    std::vector<SpherePoint> out;
    for (Complex r : roots) out.push_back(SpherePoint::finite(r));
    return out;
}

}  // namespace essdyn
