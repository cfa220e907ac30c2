#include "essdyn/render.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace essdyn {

namespace {

const char* kKindNames[] = {"escaping-to-point", "escaping-periodic", "escaping-oscillating",
                            "escaping-wandering", "non-escaping", "undecided"};

std::map<std::string, Rgb> default_palette() {
    return {
        {"escaping-to-point", {32, 96, 224}},
        {"escaping-periodic", {64, 192, 160}},
        {"escaping-oscillating", {224, 160, 32}},
        {"escaping-wandering", {192, 48, 160}},
        {"non-escaping", {24, 24, 24}},
        {"undecided", {128, 128, 128}},
    };
}

}  // namespace

void RenderConfig::validate() const {
    if (width < 1 || height < 1) throw InvalidConfig("width/height must be >= 1");
    if (!window.valid()) throw InvalidConfig("window is degenerate");
    if (budget < 1) throw InvalidConfig("budget must be >= 1");
    if (tile_size < 1) throw InvalidConfig("tile_size must be >= 1");
    if (cover_targets.empty()) throw InvalidConfig("cover has no targets");
    for (const char* k : kKindNames)
        if (!palette.count(k)) throw InvalidConfig(std::string("palette misses class ") + k);
}

RenderConfig default_palette_config() {
    RenderConfig c;
    c.palette = default_palette();
    return c;
}

nlohmann::json config_to_json(const RenderConfig& c) {
    nlohmann::json j;
    j["map"] = c.map_label;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : c.map_params) params[k] = {v.real(), v.imag()};
    j["params"] = params;
    j["window"] = {{"re_min", c.window.re_min},
                   {"re_max", c.window.re_max},
                   {"im_min", c.window.im_min},
                   {"im_max", c.window.im_max}};
    j["width"] = c.width;
    j["height"] = c.height;
    j["budget"] = c.budget;
    nlohmann::json targets = nlohmann::json::array();
    for (const auto& t : c.cover_targets)
        targets.push_back(t.at_infinity ? nlohmann::json("inf")
                                        : nlohmann::json({t.value.real(), t.value.imag()}));
    j["cover"] = {{"targets", targets}, {"radius", c.cover_radius}};
    nlohmann::json palette = nlohmann::json::object();
    for (const auto& [k, rgb] : c.palette) palette[k] = {rgb[0], rgb[1], rgb[2]};
    j["palette"] = palette;
    j["tile_size"] = c.tile_size;
    j["output"] = c.output_path;
    j["seed"] = c.seed;
    return j;
}

RenderConfig config_from_json(const nlohmann::json& j) {
    RenderConfig c = default_palette_config();
    c.map_label = j.at("map").get<std::string>();
    if (j.contains("params"))
        for (const auto& [k, v] : j.at("params").items())
            c.map_params[k] = Complex(v.at(0).get<double>(), v.at(1).get<double>());
    const auto& w = j.at("window");
    c.window = {w.at("re_min").get<double>(), w.at("re_max").get<double>(),
                w.at("im_min").get<double>(), w.at("im_max").get<double>()};
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    if (j.contains("budget")) c.budget = j.at("budget").get<int>();
    if (j.contains("cover")) {
        c.cover_targets.clear();
        for (const auto& t : j.at("cover").at("targets")) {
            if (t.is_string())
                c.cover_targets.push_back(SpherePoint::infinity());
            else
                c.cover_targets.push_back(SpherePoint::finite(
                    Complex(t.at(0).get<double>(), t.at(1).get<double>())));
        }
        c.cover_radius = j.at("cover").at("radius").get<double>();
    }
    if (j.contains("palette"))
        for (const auto& [k, v] : j.at("palette").items())
            c.palette[k] = {v.at(0).get<std::uint8_t>(), v.at(1).get<std::uint8_t>(),
                            v.at(2).get<std::uint8_t>()};
    if (j.contains("tile_size")) c.tile_size = j.at("tile_size").get<int>();
    if (j.contains("output")) c.output_path = j.at("output").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

namespace {

int worker_count() {
    if (const char* env = std::getenv("ESSDYN_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

}  // namespace

ClassImage render_plane(const RenderConfig& config) {
    config.validate();
    MapSpec map = make_catalog_map(config.map_label, config.map_params);
    SeparatingCover cover = build_cover(config.cover_targets, config.cover_radius);

    ClassImage img;
    img.width = config.width;
    img.height = config.height;
    img.class_codes.assign(size_t(config.width) * config.height, 0);
    img.rgb.assign(size_t(config.width) * config.height * 3, 0);

    std::array<Rgb, 6> colors;
    for (int k = 0; k < 6; ++k) colors[k] = config.palette.at(kKindNames[k]);

    const double px = config.window.width() / config.width;
    const double py = config.window.height() / config.height;
    const int tiles_x = (config.width + config.tile_size - 1) / config.tile_size;
    const int tiles_y = (config.height + config.tile_size - 1) / config.tile_size;
    const int tile_total = tiles_x * tiles_y;
    const std::vector<int> budgets = {config.budget};

    std::atomic<int> next_tile{0};
    auto worker = [&]() {
        for (;;) {
            int tile = next_tile.fetch_add(1);
            if (tile >= tile_total) return;
            int tx = tile % tiles_x, ty = tile / tiles_x;
            int x0 = tx * config.tile_size, y0 = ty * config.tile_size;
            int x1 = std::min(x0 + config.tile_size, config.width);
            int y1 = std::min(y0 + config.tile_size, config.height);
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    // Row 0 is the top of the window.
                    Complex z(config.window.re_min + (x + 0.5) * px,
                              config.window.im_max - (y + 0.5) * py);
                    EscapeClass cls =
                        classify_escape(map, SpherePoint::finite(z), cover, budgets);
                    size_t idx = size_t(y) * config.width + x;
                    img.class_codes[idx] = std::uint8_t(cls.kind);
                    const Rgb& c = colors[int(cls.kind)];
                    img.rgb[idx * 3] = c[0];
                    img.rgb[idx * 3 + 1] = c[1];
                    img.rgb[idx * 3 + 2] = c[2];
                }
        }
    };

    int workers = std::min(worker_count(), tile_total);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return img;
}

std::string encode_ppm(const ClassImage& image) {
    std::string out = "P6\n" + std::to_string(image.width) + " " +
                      std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
    return out;
}

void write_ppm(const ClassImage& image, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    std::string bytes = encode_ppm(image);
    os.write(bytes.data(), std::streamsize(bytes.size()));
}

}  // namespace essdyn
