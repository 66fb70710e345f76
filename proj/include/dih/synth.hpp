#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dih/image.hpp"
#include "dih/manifest.hpp"
#include "dih/toy_scene.hpp"

namespace dih {

// A composite/ground-truth pair. The composite equals the ground truth at
// every pixel where the mask is 0.
struct TrainingPair {
    Image composite;
    Mask mask;
    Image ground_truth;
    LabelMap labels;  // empty when absent
    bool has_labels = false;
};

// composite = color_transfer(ground_truth, region_mask, reference, ...);
// the ground truth is stored unmodified.
TrainingPair synthesize_pair(const Image& ground_truth, const Mask& region_mask,
                             const Image& reference, const Mask& reference_mask, double strength);

struct SynthConfig {
    std::uint64_t seed = 0;
    int count = 8;
    int size = 64;
    int num_classes = 4;
    int pyramid_levels = 2;
    std::vector<double> strengths = {0.4, 0.7, 1.0};
};

// Generates `count` toy scenes, picks a foreground region per scene,
// retrieves the closest other scene by spatial-pyramid label histogram,
// transfers its same-class appearance onto the region, and writes
// composite/mask/ground-truth/label rasters plus a manifest.
// Returns the manifest records (paths resolved).
std::vector<ManifestRecord> synth_dataset(const SynthConfig& config, const std::string& out_dir,
                                          const std::string& manifest_filename = "manifest.tsv");

// In-memory variant of the pipeline above, used by tests and the
// acceptance suite.
std::vector<TrainingPair> synth_pairs(const SynthConfig& config);

} // namespace dih
