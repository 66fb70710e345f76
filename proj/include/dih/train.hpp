#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "dih/manifest.hpp"
#include "dih/network.hpp"
#include "dih/synth.hpp"

namespace dih {

struct TrainConfig {
    double lambda1 = 1.0;
    double lambda2 = 100.0;
    double learning_rate = 1e-3; // on [0,1]-scaled data at toy scale
    int iters_stage1 = 0;
    int iters_stage2 = 0;
    int batch_size = 4;
    std::uint64_t seed = 0;
    bool cross_links = true;

    void validate() const;
};

// Trained model plus the bookkeeping that a checkpoint persists.
struct TrainedModel {
    Network<float> net;
    std::uint64_t iteration = 0;
    std::array<std::uint64_t, 4> rng_state{};
};

// p <- p - lr * g for every parameter; frozen groups are skipped entirely.
template <class T>
void sgd_step(Network<T>& net, double learning_rate, bool freeze_parse_decoder) {
    for (auto ref : net.params()) {
        if (freeze_parse_decoder && ref.group == ParamGroup::ParseDecoder) continue;
        auto& value = *ref.value;
        auto& grad = *ref.grad;
        if (value.size() != grad.size()) fail(Status::DimensionMismatch, "sgd_step: shape mismatch");
        for (size_t i = 0; i < value.size(); ++i) {
            value[i] = static_cast<T>(static_cast<double>(value[i]) -
                                      learning_rate * static_cast<double>(grad[i]));
        }
    }
}

// Loads every record up front; label maps are required when `need_labels`.
std::vector<TrainingPair> load_pairs(const std::vector<ManifestRecord>& records, bool need_labels);

// Two-stage schedule: stage 1 optimizes the combined loss jointly on
// labeled pairs; stage 2 freezes the parsing decoder, sets lambda2 = 0 and
// finetunes the rest. Deterministic given the seed. Writes one CSV row per
// iteration (`iteration,stage,l_rec,l_cro,combined`) to `loss_log` if given.
// `stage1_snapshot`, if non-null, receives the model as of the end of
// stage 1.
TrainedModel train(const std::vector<TrainingPair>& stage1_pairs,
                   const std::vector<TrainingPair>& stage2_pairs, const TrainConfig& config,
                   const ArchConfig& arch, std::ostream* loss_log = nullptr,
                   TrainedModel* stage1_snapshot = nullptr);

TrainedModel train_from_manifests(const std::string& manifest_stage1,
                                  const std::string& manifest_stage2, const TrainConfig& config,
                                  const ArchConfig& arch, std::ostream* loss_log = nullptr,
                                  TrainedModel* stage1_snapshot = nullptr);

} // namespace dih
