#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "essdyn/escape.hpp"

namespace essdyn {

struct InvalidConfig : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Rgb = std::array<std::uint8_t, 3>;

struct RenderConfig {
    std::string map_label = "g";
    std::map<std::string, Complex> map_params;
    Window window;
    int width = 400, height = 300;
    int budget = 500;
    std::vector<SpherePoint> cover_targets;
    double cover_radius = 0.15;
    std::map<std::string, Rgb> palette;  // escape_kind_name -> color
    int tile_size = 64;
    std::string output_path = "plane.ppm";
    std::uint64_t seed = 0;

    void validate() const;
};

RenderConfig default_palette_config();

nlohmann::json config_to_json(const RenderConfig& c);
RenderConfig config_from_json(const nlohmann::json& j);

struct ClassImage {
    int width = 0, height = 0;
    std::vector<std::uint8_t> class_codes;  // EscapeClass::Kind per pixel
    std::vector<std::uint8_t> rgb;          // 3 bytes per pixel, row-major

    std::uint8_t code_at(int x, int y) const { return class_codes[size_t(y) * width + x]; }
};

/// Worker count: ESSDYN_THREADS if set, else hardware concurrency; the image
/// is byte-identical for every tile size and worker count.
ClassImage render_plane(const RenderConfig& config);

std::string encode_ppm(const ClassImage& image);
void write_ppm(const ClassImage& image, const std::string& path);

}  // namespace essdyn
