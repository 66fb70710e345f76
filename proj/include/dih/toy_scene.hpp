#pragma once

#include <cstdint>

#include "dih/image.hpp"

namespace dih {

// Procedural layered scene: sky gradient (class 0), ground (class 1) and
// 1..max_shapes colored shapes cycling through classes 2..num_classes-1.
// Shape geometry is tied to the class so parsing stays learnable even after
// color edits. Fully deterministic for a given seed.
struct SceneConfig {
    int width = 64;
    int height = 64;
    int num_classes = 4; // 3 <= num_classes <= 25
    int min_shapes = 1;
    int max_shapes = 4;
};

struct ToyScene {
    Image image;
    LabelMap labels;
};

ToyScene generate_toy_scene(std::uint64_t seed, const SceneConfig& config);

} // namespace dih
