#include "dih/synth.hpp"

#include <cstdio>
#include <filesystem>

#include "dih/color_transfer.hpp"
#include "dih/error.hpp"
#include "dih/image_io.hpp"
#include "dih/pyramid.hpp"
#include "dih/rng.hpp"

namespace dih {
namespace {

Mask class_mask(const LabelMap& labels, int cls) {
    Mask m(labels.width, labels.height);
    for (size_t i = 0; i < labels.data.size(); ++i) m.data[i] = labels.data[i] == cls ? 1 : 0;
    return m;
}

// Picks the foreground class for a scene: a seeded choice among shape
// classes with enough pixels, falling back to the ground region.
int pick_region_class(const LabelMap& labels, int num_classes, Rng& rng, size_t min_pixels) {
    std::vector<int> candidates;
    std::vector<size_t> counts(num_classes, 0);
    for (auto v : labels.data) ++counts[v];
    for (int c = 2; c < num_classes; ++c) {
        if (counts[c] >= min_pixels) candidates.push_back(c);
    }
    if (candidates.empty()) return 1;
    return candidates[rng.uniform_int(static_cast<int>(candidates.size()))];
}

struct PreparedScene {
    ToyScene scene;
    PyramidHistogram pyramid;
    int region_class = 1;
    Mask region;
    double strength = 1.0;
};

std::vector<PreparedScene> prepare_scenes(const SynthConfig& config) {
    if (config.count < 2) fail(Status::InvalidArgument, "synth: need at least 2 scenes for retrieval");
    if (config.strengths.empty()) fail(Status::InvalidArgument, "synth: strength set must be non-empty");

    SceneConfig scene_cfg;
    scene_cfg.width = config.size;
    scene_cfg.height = config.size;
    scene_cfg.num_classes = config.num_classes;

    const size_t min_pixels = 16;
    std::vector<PreparedScene> prepared(config.count);
    for (int i = 0; i < config.count; ++i) {
        Rng rng(Rng::mix(config.seed, 0x9a17e0ull + i));
        auto& p = prepared[i];
        p.scene = generate_toy_scene(Rng::mix(config.seed, static_cast<std::uint64_t>(i)), scene_cfg);
        p.pyramid = spatial_pyramid_histogram(p.scene.labels, config.pyramid_levels, config.num_classes);
        p.region_class = pick_region_class(p.scene.labels, config.num_classes, rng, min_pixels);
        p.region = class_mask(p.scene.labels, p.region_class);
        p.strength = config.strengths[rng.uniform_int(static_cast<int>(config.strengths.size()))];
    }
    return prepared;
}

TrainingPair make_pair(const std::vector<PreparedScene>& prepared, int i) {
    const auto& target = prepared[i];

    // rank the other scenes by label-layout similarity
    std::vector<std::pair<int, PyramidHistogram>> corpus;
    for (int j = 0; j < static_cast<int>(prepared.size()); ++j) {
        if (j != i) corpus.emplace_back(j, prepared[j].pyramid);
    }
    const auto ranked = retrieve_reference(target.pyramid, corpus);

    // first ranked scene exposing the same class; ground region as fallback
    const size_t min_pixels = 16;
    int ref_idx = ranked.front();
    int ref_class = 1;
    for (int cand : ranked) {
        Mask m = class_mask(prepared[cand].scene.labels, target.region_class);
        if (m.foreground_count() >= min_pixels) {
            ref_idx = cand;
            ref_class = target.region_class;
            break;
        }
    }
    const Mask ref_mask = class_mask(prepared[ref_idx].scene.labels, ref_class);

    TrainingPair pair = synthesize_pair(target.scene.image, target.region,
                                        prepared[ref_idx].scene.image, ref_mask, target.strength);
    pair.labels = target.scene.labels;
    pair.has_labels = true;
    return pair;
}

} // namespace

TrainingPair synthesize_pair(const Image& ground_truth, const Mask& region_mask,
                             const Image& reference, const Mask& reference_mask, double strength) {
    TrainingPair pair;
    pair.composite = color_transfer(ground_truth, region_mask, reference, reference_mask, strength);
    pair.mask = region_mask;
    pair.ground_truth = ground_truth;
    pair.has_labels = false;
    return pair;
}

std::vector<TrainingPair> synth_pairs(const SynthConfig& config) {
    const auto prepared = prepare_scenes(config);
    std::vector<TrainingPair> pairs;
    pairs.reserve(prepared.size());
    for (int i = 0; i < static_cast<int>(prepared.size()); ++i) pairs.push_back(make_pair(prepared, i));
    return pairs;
}

std::vector<ManifestRecord> synth_dataset(const SynthConfig& config, const std::string& out_dir,
                                          const std::string& manifest_filename) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) fail(Status::Io, "cannot create output directory: " + out_dir);

    const auto prepared = prepare_scenes(config);
    std::vector<ManifestRecord> records;
    char name[64];
    for (int i = 0; i < static_cast<int>(prepared.size()); ++i) {
        const TrainingPair pair = make_pair(prepared, i);
        ManifestRecord rec;
        std::snprintf(name, sizeof(name), "composite_%04d.png", i);
        rec.composite_path = (fs::path(out_dir) / name).string();
        std::snprintf(name, sizeof(name), "mask_%04d.png", i);
        rec.mask_path = (fs::path(out_dir) / name).string();
        std::snprintf(name, sizeof(name), "gt_%04d.png", i);
        rec.ground_truth_path = (fs::path(out_dir) / name).string();
        std::snprintf(name, sizeof(name), "labels_%04d.png", i);
        rec.labelmap_path = (fs::path(out_dir) / name).string();

        save_image(pair.composite, rec.composite_path);
        save_mask(pair.mask, rec.mask_path);
        save_image(pair.ground_truth, rec.ground_truth_path);
        save_labelmap(pair.labels, rec.labelmap_path);
        records.push_back(std::move(rec));
    }
    save_manifest(records, (fs::path(out_dir) / manifest_filename).string());
    return records;
}

} // namespace dih
