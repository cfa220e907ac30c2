#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "essdyn/hair.hpp"
#include "essdyn/orbit.hpp"
#include "essdyn/render.hpp"
#include "essdyn/singularity.hpp"

using namespace essdyn;

namespace {

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << std::endl;
        return;
    }
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + out_path);
    os << text << "\n";
}

// "inf" or "re" or "re,im"
SpherePoint parse_point(const std::string& text) {
    if (text == "inf" || text == "infinity") return SpherePoint::infinity();
    double re = 0, im = 0;
    char comma = 0;
    std::istringstream is(text);
    if (!(is >> re)) throw CLI::ValidationError("point", "cannot parse '" + text + "'");
    if (is >> comma >> im && comma != ',')
        throw CLI::ValidationError("point", "cannot parse '" + text + "'");
    return SpherePoint::finite({re, im});
}

// "re_min,re_max,im_min,im_max"
Window parse_window(const std::string& text) {
    Window w;
    char c1, c2, c3;
    std::istringstream is(text);
    if (!(is >> w.re_min >> c1 >> w.re_max >> c2 >> w.im_min >> c3 >> w.im_max) ||
        c1 != ',' || c2 != ',' || c3 != ',' || !w.valid())
        throw CLI::ValidationError("window", "expected re_min,re_max,im_min,im_max");
    return w;
}

std::vector<SpherePoint> parse_cover_targets(const std::string& text) {
    std::vector<SpherePoint> targets;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ';')) targets.push_back(parse_point(item));
    return targets;
}

std::map<std::string, Complex> parse_params(const std::vector<std::string>& kvs) {
    std::map<std::string, Complex> params;
    for (const auto& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("param", "expected name=value");
        SpherePoint p = parse_point(kv.substr(eq + 1));
        params[kv.substr(0, eq)] = p.value;
    }
    return params;
}

nlohmann::json point_json(const SpherePoint& p) {
    if (p.at_infinity) return "inf";
    return {p.value.real(), p.value.imag()};
}

int run(int argc, char** argv) {
    CLI::App app{"dynamics of meromorphic maps with countable essential-singularity sets"};
    app.require_subcommand(1);
    std::string out_path;
    app.add_option("--out", out_path, "write the report to a file instead of stdout");

    // render
    auto* render = app.add_subcommand("render", "render a dynamical plane from a JSON config");
    std::string config_path;
    render->add_option("config", config_path, "config file")->required();

    // classify
    auto* classify = app.add_subcommand("classify", "classify a point's escape behavior");
    std::string cl_map, cl_cover = "inf";
    double cl_re = 0, cl_im = 0;
    std::vector<std::string> cl_params;
    classify->add_option("map", cl_map)->required();
    classify->add_option("re", cl_re)->required();
    classify->add_option("im", cl_im)->required();
    classify->add_option("--cover", cl_cover, "targets 're,im' or 'inf', ';'-separated");
    classify->add_option("--param", cl_params, "map parameter name=value");
    double cl_radius = 0.15;
    classify->add_option("--radius", cl_radius);

    // hair
    auto* hair = app.add_subcommand("hair", "trace an escaping hair and its singular orbit");
    std::string hair_map, hair_curve;
    hair->add_option("map", hair_map)->required();
    hair->add_option("curve", hair_curve,
                     "'wander' / 'hinf' preset, or t0,t1,re0,im0,re1,im1: a segment from "
                     "(re0,im0) toward endpoint (re1,im1), sampled at t0, t0/2, ... down "
                     "to about t1")
        ->required();
    int hair_steps = 8;
    std::string hair_cover = "inf";
    hair->add_option("--steps", hair_steps);
    hair->add_option("--cover", hair_cover);

    // verify-v0
    auto* v0 = app.add_subcommand("verify-v0", "sample the absorbing region");
    int v0_samples = 100000, v0_k = 0;
    std::string v0_map = "g";
    v0->add_option("--samples", v0_samples);
    v0->add_option("--k", v0_k, "2*pi*k translate");
    v0->add_option("--map", v0_map);

    // verify-tinf
    auto* tinf = app.add_subcommand("verify-tinf", "check translation behavior high up");
    double tinf_height = 3.0;
    int tinf_samples = 10000;
    tinf->add_option("--height", tinf_height);
    tinf->add_option("--samples", tinf_samples);

    // presing
    auto* presing = app.add_subcommand("presing", "pre-singularity tree in a window");
    std::string ps_map, ps_e, ps_window;
    int ps_depth = 1;
    presing->add_option("map", ps_map)->required();
    presing->add_option("e", ps_e)->required();
    presing->add_option("depth", ps_depth)->required();
    presing->add_option("window", ps_window)->required();

    // compose
    auto* compose = app.add_subcommand("compose", "singular set of a composition");
    std::string co_outer, co_inner, co_window = "-8,8,-8,8";
    compose->add_option("outer", co_outer)->required();
    compose->add_option("inner", co_inner)->required();
    compose->add_option("--window", co_window);

    // cycle
    auto* cycle = app.add_subcommand("cycle", "refine and classify a periodic cycle");
    std::string cy_map;
    double cy_re = 0, cy_im = 0;
    int cy_period = 1;
    std::vector<std::string> cy_params;
    cycle->add_option("map", cy_map)->required();
    cycle->add_option("re", cy_re)->required();
    cycle->add_option("im", cy_im)->required();
    cycle->add_option("period", cy_period)->required();
    cycle->add_option("--param", cy_params, "map parameter name=value");

    CLI11_PARSE(app, argc, argv);

    if (*render) {
        std::ifstream is(config_path);
        if (!is) throw CLI::ValidationError("config", "cannot read " + config_path);
        nlohmann::json j = nlohmann::json::parse(is);
        RenderConfig config = config_from_json(j);
        ClassImage img = render_plane(config);
        write_ppm(img, config.output_path);
        nlohmann::json rep;
        rep["output"] = config.output_path;
        rep["width"] = img.width;
        rep["height"] = img.height;
        emit(rep.dump(2), out_path);
    } else if (*classify) {
        MapSpec map = make_catalog_map(cl_map, parse_params(cl_params));
        SeparatingCover cover = build_cover(parse_cover_targets(cl_cover), cl_radius);
        SpherePoint z = SpherePoint::finite({cl_re, cl_im});
        std::vector<int> budgets = {1000, 4000, 16000};
        EscapeClass cls = classify_escape(map, z, cover, budgets);
        emit(classification_to_json(map, z, cover, budgets, cls).dump(2), out_path);
    } else if (*hair) {
        MapSpec map = make_catalog_map(hair_map);
        CurveSpec curve;
        SpherePoint endpoint;
        if (hair_curve == "wander") {
            map = make_catalog_map("f");
            curve.from = Complex(-std::numbers::pi / 4 + 0.01, 0.0);
            endpoint = SpherePoint::finite({0.0, 0.0});
        } else if (hair_curve == "hinf") {
            map = make_catalog_map("h");
            curve = h_infinity_hair(map, 3);
            endpoint = SpherePoint::infinity();
        } else {
            double v[6];
            std::istringstream is(hair_curve);
            for (int i = 0; i < 6; ++i) {
                char comma;
                if (i > 0 && (!(is >> comma) || comma != ','))
                    throw CLI::ValidationError("curve", "expected t0,t1,re0,im0,re1,im1");
                if (!(is >> v[i]))
                    throw CLI::ValidationError("curve", "expected t0,t1,re0,im0,re1,im1");
            }
            double t0 = v[0], t1 = v[1];
            if (!(t0 > t1 && t1 > 0.0))
                throw CLI::ValidationError("curve", "need t0 > t1 > 0");
            Complex from(v[2], v[3]), end(v[4], v[5]);
            endpoint = SpherePoint::finite(end);
            // Samples at t0, t0/2, t0/4, ... along z(t) = end + t (from - end);
            // the limit extrapolation expects each parameter to halve. At
            // least 8 samples are taken even when that runs past t1.
            int n = std::clamp(int(std::floor(std::log2(t0 / t1))) + 1, 8, 16);
            for (int i = 0; i < n; ++i)
                curve.explicit_samples.push_back(end + std::ldexp(t0, -i) * (from - end));
            curve.from = from;
        }
        SeparatingCover cover = build_cover(parse_cover_targets(hair_cover), 0.3);
        HairTrace trace = trace_hair(map, curve, endpoint, cover, {1000, 4000, 16000}, 16);
        SingularOrbit so = singular_orbit(map, trace, hair_steps);
        nlohmann::json rep;
        rep["map"] = map.label;
        rep["endpoint"] = point_json(trace.endpoint);
        rep["common_itinerary_present"] = bool(trace.common_itinerary);
        nlohmann::json pts = nlohmann::json::array(), res = nlohmann::json::array();
        for (const auto& p : so.points) pts.push_back(point_json(p));
        for (double r : so.residuals) res.push_back(r);
        rep["singular_orbit"] = {{"points", pts},
                                 {"residuals", res},
                                 {"class", singular_orbit_class_name(so.classification)},
                                 {"period", so.period},
                                 {"heuristic", so.heuristic_flag}};
        emit(rep.dump(2), out_path);
    } else if (*v0) {
        MapSpec map = make_catalog_map(v0_map);
        RegionSpec region{RegionSpec::Kind::V0, v0_k};
        AbsorbingReport rep = verify_absorbing(map, region, v0_samples);
        emit(absorbing_report_to_json(region, rep).dump(2), out_path);
    } else if (*tinf) {
        MapSpec map = make_catalog_map("g");
        TranslationReport rep = verify_translation(map, tinf_height, tinf_samples);
        emit(translation_report_to_json(rep).dump(2), out_path);
    } else if (*presing) {
        MapSpec map = make_catalog_map(ps_map);
        PreSingularityTree tree =
            presingularities(map, parse_point(ps_e), ps_depth, parse_window(ps_window));
        emit(tree_to_json(tree).dump(2), out_path);
    } else if (*compose) {
        MapSpec composed = compose_maps(make_catalog_map(co_outer), make_catalog_map(co_inner));
        auto sings = singularities_in_window(composed, parse_window(co_window), true);
        nlohmann::json rep;
        rep["map"] = composed.label;
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : sings) pts.push_back(point_json(p));
        rep["singularities"] = pts;
        emit(rep.dump(2), out_path);
    } else if (*cycle) {
        MapSpec map = make_catalog_map(cy_map, parse_params(cy_params));
        auto rec = refine_cycle(map, SpherePoint::finite({cy_re, cy_im}), cy_period);
        if (!rec) {
            emit(nlohmann::json{{"error", "no convergence"}}.dump(2), out_path);
            return 1;
        }
        nlohmann::json rep;
        rep["map"] = map.label;
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : rec->points) pts.push_back(point_json(p));
        rep["points"] = pts;
        rep["multiplier"] = {rec->multiplier.real(), rec->multiplier.imag()};
        rep["class"] = cycle_class_name(rec->cls);
        emit(rep.dump(2), out_path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
