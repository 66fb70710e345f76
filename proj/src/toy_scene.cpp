#include "dih/toy_scene.hpp"

#include <algorithm>
#include <cmath>

#include "dih/error.hpp"
#include "dih/rng.hpp"

namespace dih {
namespace {

struct Rgb {
    double r, g, b;
};

Rgb hsv_to_rgb(double h, double s, double v) {
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = v - c;
    return {r + m, g + m, b + m};
}

// Stable per-class palette; scenes jitter around these anchors.
Rgb class_base_color(int cls) {
    const double hue = std::fmod(0.02 + 0.61803398875 * (cls - 2), 1.0);
    return hsv_to_rgb(hue, 0.6, 0.85);
}

Rgb jitter(Rgb c, Rng& rng, double amount) {
    auto j = [&](double v) { return std::clamp(v + rng.uniform(-amount, amount), 0.0, 1.0); };
    return {j(c.r), j(c.g), j(c.b)};
}

void put(Image& img, LabelMap& labels, int y, int x, const Rgb& c, int cls) {
    img.at(y, x, 0) = static_cast<float>(std::clamp(c.r, 0.0, 1.0));
    img.at(y, x, 1) = static_cast<float>(std::clamp(c.g, 0.0, 1.0));
    img.at(y, x, 2) = static_cast<float>(std::clamp(c.b, 0.0, 1.0));
    labels.at(y, x) = static_cast<std::uint8_t>(cls);
}

} // namespace

ToyScene generate_toy_scene(std::uint64_t seed, const SceneConfig& config) {
    if (config.width < 8 || config.height < 8) {
        fail(Status::InvalidArgument, "scene dimensions must be at least 8x8");
    }
    if (config.num_classes < 3 || config.num_classes > 25) {
        fail(Status::InvalidArgument, "scene class count must be in [3,25]");
    }
    if (config.min_shapes < 1 || config.max_shapes < config.min_shapes) {
        fail(Status::InvalidArgument, "invalid shape count range");
    }

    Rng rng(Rng::mix(seed, 0x5ce7e5ull));
    const int W = config.width, H = config.height;
    Image img(W, H);
    LabelMap labels(W, H);

    // sky (class 0): vertical gradient
    const Rgb sky_top = jitter({0.35, 0.52, 0.88}, rng, 0.10);
    const Rgb sky_bot = jitter({0.70, 0.80, 0.95}, rng, 0.08);
    const int horizon = static_cast<int>(H * rng.uniform(0.55, 0.75));
    for (int y = 0; y < horizon; ++y) {
        const double t = horizon > 1 ? static_cast<double>(y) / (horizon - 1) : 0.0;
        const Rgb c = {sky_top.r + t * (sky_bot.r - sky_top.r),
                       sky_top.g + t * (sky_bot.g - sky_top.g),
                       sky_top.b + t * (sky_bot.b - sky_top.b)};
        for (int x = 0; x < W; ++x) put(img, labels, y, x, c, 0);
    }

    // ground (class 1): shaded band below the horizon
    const Rgb ground = jitter({0.32, 0.46, 0.20}, rng, 0.10);
    for (int y = horizon; y < H; ++y) {
        const double shade = 1.0 - 0.25 * (static_cast<double>(y - horizon) / std::max(1, H - horizon));
        const Rgb c = {ground.r * shade, ground.g * shade, ground.b * shade};
        for (int x = 0; x < W; ++x) put(img, labels, y, x, c, 1);
    }

    // shapes (classes 2..num_classes-1); geometry follows the class
    const int span = config.max_shapes - config.min_shapes + 1;
    const int shape_count = config.min_shapes + rng.uniform_int(span);
    const int shape_classes = config.num_classes - 2;
    for (int k = 0; k < shape_count; ++k) {
        const int cls = 2 + (k % shape_classes);
        const Rgb color = jitter(class_base_color(cls), rng, 0.08);
        const double cx = rng.uniform(0.18, 0.82) * W;
        const double cy = rng.uniform(0.25, 0.85) * H;
        const double radius = rng.uniform(0.10, 0.22) * std::min(W, H);
        const int kind = (cls - 2) % 3; // 0: circle, 1: rectangle, 2: triangle

        const int y0 = std::max(0, static_cast<int>(cy - radius - 1));
        const int y1 = std::min(H - 1, static_cast<int>(cy + radius + 1));
        const int x0 = std::max(0, static_cast<int>(cx - radius - 1));
        const int x1 = std::min(W - 1, static_cast<int>(cx + radius + 1));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dx = x + 0.5 - cx;
                const double dy = y + 0.5 - cy;
                bool inside = false;
                switch (kind) {
                    case 0: inside = dx * dx + dy * dy <= radius * radius; break;
                    case 1: inside = std::fabs(dx) <= radius * 0.9 && std::fabs(dy) <= radius * 0.7; break;
                    default: // upward triangle
                        inside = dy <= radius * 0.8 && dy >= -radius * 0.8 &&
                                 std::fabs(dx) <= (dy + radius * 0.8) * 0.6;
                        break;
                }
                if (inside) {
                    // mild vertical shading keeps shapes from being flat color
                    const double shade = 1.0 - 0.15 * (dy / (radius + 1e-9));
                    put(img, labels, y, x, {color.r * shade, color.g * shade, color.b * shade}, cls);
                }
            }
        }
    }

    return {std::move(img), std::move(labels)};
}

} // namespace dih
