#include "dih/train.hpp"

#include <cstdio>

#include "dih/image_io.hpp"
#include "dih/losses.hpp"
#include "dih/rng.hpp"

namespace dih {

void TrainConfig::validate() const {
    if (lambda1 < 0.0 || lambda2 < 0.0) fail(Status::InvalidArgument, "train: lambda weights must be >= 0");
    if (learning_rate <= 0.0) fail(Status::InvalidArgument, "train: learning rate must be > 0");
    if (batch_size < 1) fail(Status::InvalidArgument, "train: batch size must be >= 1");
    if (iters_stage1 < 0 || iters_stage2 < 0) fail(Status::InvalidArgument, "train: iteration counts must be >= 0");
}

std::vector<TrainingPair> load_pairs(const std::vector<ManifestRecord>& records, bool need_labels) {
    std::vector<TrainingPair> pairs;
    pairs.reserve(records.size());
    for (const auto& rec : records) {
        TrainingPair pair;
        pair.composite = load_image(rec.composite_path);
        pair.mask = load_mask(rec.mask_path);
        pair.ground_truth = load_image(rec.ground_truth_path);
        if (!rec.labelmap_path.empty()) {
            pair.labels = load_labelmap(rec.labelmap_path);
            pair.has_labels = true;
        } else if (need_labels) {
            fail(Status::BadManifest, "training stage requires label maps: " + rec.composite_path);
        }
        if (!pair.composite.same_size(pair.ground_truth) || pair.composite.width != pair.mask.width ||
            pair.composite.height != pair.mask.height) {
            fail(Status::DimensionMismatch, "training pair rasters must share dimensions: " + rec.composite_path);
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

namespace {

struct PreparedPair {
    Tensor<float> input;
    Tensor<float> ground_truth;
    const LabelMap* labels;
};

std::vector<PreparedPair> prepare(const std::vector<TrainingPair>& pairs) {
    std::vector<PreparedPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        PreparedPair pp;
        pp.input = Network<float>::make_input(p.composite, p.mask);
        pp.ground_truth = image_to_tensor<float>(p.ground_truth);
        pp.labels = p.has_labels ? &p.labels : nullptr;
        out.push_back(std::move(pp));
    }
    return out;
}

void log_row(std::ostream* log, std::uint64_t iteration, int stage, double rec, double cro,
             double combined) {
    if (!log) return;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%llu,%d,%.9g,%.9g,%.9g\n",
                  static_cast<unsigned long long>(iteration), stage, rec, cro, combined);
    (*log) << buf;
}

// One optimization stage: seeded epoch shuffling, gradients averaged over
// the batch, plain SGD with a fixed learning rate.
void run_stage(Network<float>& net, const std::vector<PreparedPair>& pairs, int iterations,
               double lambda1, double lambda2, double lr, int batch_size, bool freeze_parse,
               int stage_id, Rng& rng, std::uint64_t& iteration, std::ostream* loss_log) {
    if (iterations <= 0) return;
    if (pairs.empty()) fail(Status::InvalidArgument, "train: stage has no training pairs");
    if (lambda2 > 0.0) {
        for (const auto& p : pairs) {
            if (!p.labels) fail(Status::BadManifest, "train: stage with lambda2 > 0 requires label maps");
        }
    }

    net.freeze_parse_stats = freeze_parse;
    std::vector<size_t> order(pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    size_t cursor = order.size(); // forces a shuffle on first use

    for (int it = 0; it < iterations; ++it) {
        net.zero_grads();
        double rec_sum = 0.0, cro_sum = 0.0;
        for (int bi = 0; bi < batch_size; ++bi) {
            if (cursor >= order.size()) {
                // Fisher-Yates with the stage RNG
                for (size_t i = order.size(); i > 1; --i) {
                    const size_t j = static_cast<size_t>(rng.uniform_int(static_cast<int>(i)));
                    std::swap(order[i - 1], order[j]);
                }
                cursor = 0;
            }
            const PreparedPair& p = pairs[order[cursor++]];
            ForwardCache<float> cache;
            JointOutput<float> out = net.forward(p.input, RunMode::Train, &cache);
            CombinedLoss<float> loss = combined_loss(out.harmonized, out.parsing_logits,
                                                     p.ground_truth, p.labels, lambda1, lambda2);
            net.backward(cache, loss.grad_harmonized, loss.grad_logits);
            rec_sum += loss.rec_value;
            cro_sum += loss.cro_value;
        }
        // batch mean
        for (auto ref : net.params()) {
            for (auto& g : *ref.grad) g /= static_cast<float>(batch_size);
        }
        sgd_step(net, lr, freeze_parse);
        ++iteration;
        const double rec = rec_sum / batch_size;
        const double cro = cro_sum / batch_size;
        log_row(loss_log, iteration, stage_id, rec, cro, lambda1 * rec + lambda2 * cro);
    }
    net.freeze_parse_stats = false;
}

} // namespace

TrainedModel train(const std::vector<TrainingPair>& stage1_pairs,
                   const std::vector<TrainingPair>& stage2_pairs, const TrainConfig& config,
                   const ArchConfig& arch, std::ostream* loss_log, TrainedModel* stage1_snapshot) {
    config.validate();
    arch.validate();

    TrainedModel model;
    model.net.build(arch, config.seed);
    model.net.cross_links = config.cross_links;

    const auto prepared1 = prepare(stage1_pairs);
    const auto prepared2 = prepare(stage2_pairs);

    Rng rng(Rng::mix(config.seed, 0x7261ull));
    std::uint64_t iteration = 0;

    run_stage(model.net, prepared1, config.iters_stage1, config.lambda1, config.lambda2,
              config.learning_rate, config.batch_size, /*freeze_parse=*/false, 1, rng, iteration,
              loss_log);
    if (stage1_snapshot) {
        stage1_snapshot->net = model.net;
        stage1_snapshot->iteration = iteration;
        stage1_snapshot->rng_state = rng.state();
    }
    run_stage(model.net, prepared2, config.iters_stage2, config.lambda1, /*lambda2=*/0.0,
              config.learning_rate, config.batch_size, /*freeze_parse=*/true, 2, rng, iteration,
              loss_log);

    model.iteration = iteration;
    model.rng_state = rng.state();
    return model;
}

TrainedModel train_from_manifests(const std::string& manifest_stage1,
                                  const std::string& manifest_stage2, const TrainConfig& config,
                                  const ArchConfig& arch, std::ostream* loss_log,
                                  TrainedModel* stage1_snapshot) {
    const auto records1 = load_manifest(manifest_stage1);
    const bool labels_needed = config.lambda2 > 0.0 && config.iters_stage1 > 0;
    std::vector<TrainingPair> pairs1 = load_pairs(records1, labels_needed);
    std::vector<TrainingPair> pairs2;
    if (manifest_stage2 == manifest_stage1) {
        pairs2 = pairs1;
    } else if (!manifest_stage2.empty()) {
        pairs2 = load_pairs(load_manifest(manifest_stage2), false);
    }
    if (pairs2.empty()) pairs2 = pairs1;
    return train(pairs1, pairs2, config, arch, loss_log, stage1_snapshot);
}

} // namespace dih
