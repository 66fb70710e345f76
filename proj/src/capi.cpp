#include "dih.h"

#include <cstring>
#include <fstream>
#include <string>

#include "dih/bilateral.hpp"
#include "dih/bradley_terry.hpp"
#include "dih/checkpoint.hpp"
#include "dih/color_transfer.hpp"
#include "dih/error.hpp"
#include "dih/gradient_check.hpp"
#include "dih/image_io.hpp"
#include "dih/metrics.hpp"
#include "dih/synth.hpp"
#include "dih/train.hpp"

struct dih_image {
    dih::Image v;
};
struct dih_mask {
    dih::Mask v;
};
struct dih_labelmap {
    dih::LabelMap v;
};
struct dih_model {
    dih::TrainedModel v;
};
struct dih_ranking {
    dih::BtResult v;
};

namespace {

thread_local std::string g_last_error;

dih_status to_status(dih::Status s) { return static_cast<dih_status>(static_cast<int>(s)); }

template <class Fn>
dih_status guarded(Fn&& fn) {
    try {
        fn();
        return DIH_OK;
    } catch (const dih::Error& e) {
        g_last_error = e.what();
        return to_status(e.status());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DIH_ERR_RUNTIME;
    } catch (...) {
        g_last_error = "unknown error";
        return DIH_ERR_RUNTIME;
    }
}

dih_status require(bool condition, const char* message) {
    if (condition) return DIH_OK;
    g_last_error = message;
    return DIH_ERR_INVALID_ARGUMENT;
}

dih::ArchConfig to_arch(const dih_arch_params& p) {
    dih::ArchConfig cfg;
    cfg.input_size = p.input_size;
    cfg.encoder_channels.assign(p.encoder_channels, p.encoder_channels + p.encoder_layer_count);
    cfg.bottleneck_dim = p.bottleneck_dim;
    cfg.num_classes = p.num_classes;
    cfg.kernel_size = p.kernel_size;
    cfg.stride = p.stride;
    return cfg;
}

} // namespace

extern "C" {

const char* dih_status_name(dih_status status) {
    return dih::status_name(static_cast<dih::Status>(static_cast<int>(status)));
}

const char* dih_last_error(void) { return g_last_error.c_str(); }

/* ---- images ---------------------------------------------------------- */

dih_status dih_image_load(const char* path, dih_image** out) {
    if (auto rc = require(path && out, "null argument")) return rc;
    return guarded([&] { *out = new dih_image{dih::load_image(path)}; });
}

dih_status dih_image_save(const dih_image* image, const char* path) {
    if (auto rc = require(image && path, "null argument")) return rc;
    return guarded([&] { dih::save_image(image->v, path); });
}

dih_status dih_image_create(int width, int height, const float* rgb, dih_image** out) {
    if (auto rc = require(out != nullptr, "null argument")) return rc;
    if (auto rc = require(width >= 1 && height >= 1, "dimensions must be >= 1")) return rc;
    return guarded([&] {
        auto* img = new dih_image{dih::Image(width, height)};
        if (rgb) std::memcpy(img->v.data.data(), rgb, img->v.data.size() * sizeof(float));
        *out = img;
    });
}

void dih_image_free(dih_image* image) { delete image; }
int dih_image_width(const dih_image* image) { return image ? image->v.width : 0; }
int dih_image_height(const dih_image* image) { return image ? image->v.height : 0; }
const float* dih_image_pixels(const dih_image* image) { return image ? image->v.data.data() : nullptr; }

dih_status dih_mask_load(const char* path, dih_mask** out) {
    if (auto rc = require(path && out, "null argument")) return rc;
    return guarded([&] { *out = new dih_mask{dih::load_mask(path)}; });
}

dih_status dih_mask_save(const dih_mask* mask, const char* path) {
    if (auto rc = require(mask && path, "null argument")) return rc;
    return guarded([&] { dih::save_mask(mask->v, path); });
}

dih_status dih_mask_create(int width, int height, const uint8_t* values, dih_mask** out) {
    if (auto rc = require(out != nullptr, "null argument")) return rc;
    if (auto rc = require(width >= 1 && height >= 1, "dimensions must be >= 1")) return rc;
    return guarded([&] {
        auto* mask = new dih_mask{dih::Mask(width, height)};
        if (values) {
            for (size_t i = 0; i < mask->v.data.size(); ++i) mask->v.data[i] = values[i] ? 1 : 0;
        }
        *out = mask;
    });
}

void dih_mask_free(dih_mask* mask) { delete mask; }
int dih_mask_width(const dih_mask* mask) { return mask ? mask->v.width : 0; }
int dih_mask_height(const dih_mask* mask) { return mask ? mask->v.height : 0; }
const uint8_t* dih_mask_pixels(const dih_mask* mask) { return mask ? mask->v.data.data() : nullptr; }

dih_status dih_labelmap_load(const char* path, dih_labelmap** out) {
    if (auto rc = require(path && out, "null argument")) return rc;
    return guarded([&] { *out = new dih_labelmap{dih::load_labelmap(path)}; });
}

dih_status dih_labelmap_save(const dih_labelmap* labels, const char* path) {
    if (auto rc = require(labels && path, "null argument")) return rc;
    return guarded([&] { dih::save_labelmap(labels->v, path); });
}

void dih_labelmap_free(dih_labelmap* labels) { delete labels; }
int dih_labelmap_width(const dih_labelmap* labels) { return labels ? labels->v.width : 0; }
int dih_labelmap_height(const dih_labelmap* labels) { return labels ? labels->v.height : 0; }
const uint8_t* dih_labelmap_pixels(const dih_labelmap* labels) {
    return labels ? labels->v.data.data() : nullptr;
}

dih_status dih_composite(const dih_image* foreground, const dih_image* background,
                         const dih_mask* mask, dih_image** out) {
    if (auto rc = require(foreground && background && mask && out, "null argument")) return rc;
    return guarded([&] { *out = new dih_image{dih::composite(foreground->v, background->v, mask->v)}; });
}

dih_status dih_color_transfer(const dih_image* target, const dih_mask* target_mask,
                              const dih_image* reference, const dih_mask* reference_mask,
                              double strength, dih_image** out) {
    if (auto rc = require(target && target_mask && reference && reference_mask && out, "null argument"))
        return rc;
    return guarded([&] {
        *out = new dih_image{
            dih::color_transfer(target->v, target_mask->v, reference->v, reference_mask->v, strength)};
    });
}

/* ---- training data synthesis ----------------------------------------- */

void dih_synth_params_init(dih_synth_params* params) {
    if (!params) return;
    params->seed = 0;
    params->count = 8;
    params->size = 64;
    params->num_classes = 4;
    params->pyramid_levels = 2;
    params->strengths = nullptr;
    params->strength_count = 0;
}

dih_status dih_synth_dataset(const dih_synth_params* params, const char* out_dir) {
    if (auto rc = require(params && out_dir, "null argument")) return rc;
    return guarded([&] {
        dih::SynthConfig cfg;
        cfg.seed = params->seed;
        cfg.count = params->count;
        cfg.size = params->size;
        cfg.num_classes = params->num_classes;
        cfg.pyramid_levels = params->pyramid_levels;
        if (params->strengths && params->strength_count > 0) {
            cfg.strengths.assign(params->strengths, params->strengths + params->strength_count);
        }
        dih::synth_dataset(cfg, out_dir);
    });
}

/* ---- training --------------------------------------------------------- */

void dih_arch_params_init(dih_arch_params* params) {
    if (!params) return;
    static const int kDefaultChannels[3] = {16, 32, 64};
    params->input_size = 64;
    params->encoder_channels = kDefaultChannels;
    params->encoder_layer_count = 3;
    params->bottleneck_dim = 512;
    params->num_classes = 25;
    params->kernel_size = 4;
    params->stride = 2;
}

void dih_train_params_init(dih_train_params* params) {
    if (!params) return;
    params->lambda1 = 1.0;
    params->lambda2 = 100.0;
    params->learning_rate = 1e-3;
    params->iters_stage1 = 0;
    params->iters_stage2 = 0;
    params->batch_size = 4;
    params->seed = 0;
    params->cross_links = 1;
}

dih_status dih_train(const char* manifest_stage1, const char* manifest_stage2,
                     const dih_arch_params* arch, const dih_train_params* train,
                     const char* checkpoint_path, const char* loss_csv_path,
                     const char* stage1_checkpoint_path) {
    if (auto rc = require(manifest_stage1 && arch && train && checkpoint_path, "null argument")) return rc;
    if (auto rc = require(arch->encoder_channels && arch->encoder_layer_count > 0,
                          "architecture needs encoder channels"))
        return rc;
    return guarded([&] {
        dih::TrainConfig cfg;
        cfg.lambda1 = train->lambda1;
        cfg.lambda2 = train->lambda2;
        cfg.learning_rate = train->learning_rate;
        cfg.iters_stage1 = train->iters_stage1;
        cfg.iters_stage2 = train->iters_stage2;
        cfg.batch_size = train->batch_size;
        cfg.seed = train->seed;
        cfg.cross_links = train->cross_links != 0;

        std::ofstream loss_log;
        std::ostream* log_ptr = nullptr;
        if (loss_csv_path) {
            loss_log.open(loss_csv_path, std::ios::binary);
            if (!loss_log) dih::fail(dih::Status::Io, std::string("cannot write loss log: ") + loss_csv_path);
            loss_log << "iteration,stage,l_rec,l_cro,combined\n";
            log_ptr = &loss_log;
        }

        dih::TrainedModel stage1;
        dih::TrainedModel model = dih::train_from_manifests(
            manifest_stage1, manifest_stage2 ? manifest_stage2 : "", cfg, to_arch(*arch), log_ptr,
            stage1_checkpoint_path ? &stage1 : nullptr);
        dih::save_checkpoint(model, checkpoint_path);
        if (stage1_checkpoint_path) dih::save_checkpoint(stage1, stage1_checkpoint_path);
    });
}

/* ---- inference --------------------------------------------------------- */

dih_status dih_model_load(const char* path, dih_model** out) {
    if (auto rc = require(path && out, "null argument")) return rc;
    return guarded([&] { *out = new dih_model{dih::load_checkpoint(path)}; });
}

void dih_model_free(dih_model* model) { delete model; }

int dih_model_input_size(const dih_model* model) {
    return model ? model->v.net.input_size() : 0;
}

dih_status dih_model_set_cross_links(dih_model* model, int enabled) {
    if (auto rc = require(model != nullptr, "null argument")) return rc;
    model->v.net.cross_links = enabled != 0;
    return DIH_OK;
}

dih_status dih_harmonize(dih_model* model, const dih_image* composite, const dih_mask* mask,
                         int composite_background, dih_image** out) {
    if (auto rc = require(model && composite && mask && out, "null argument")) return rc;
    return guarded([&] {
        const dih::Image& comp = composite->v;
        const dih::Mask& m = mask->v;
        if (comp.width != m.width || comp.height != m.height) {
            dih::fail(dih::Status::DimensionMismatch, "harmonize: image and mask must share dimensions");
        }
        const int S = model->v.net.input_size();
        dih::Image input = comp;
        dih::Mask input_mask = m;
        if (comp.width != S || comp.height != S) {
            input = dih::resize_bilinear(comp, S, S);
            input_mask = dih::resize_nearest(m, S, S);
        }
        const dih::Tensor<float> x = dih::Network<float>::make_input(input, input_mask);
        dih::JointOutput<float> result = model->v.net.forward(x, dih::RunMode::Eval, nullptr);
        dih::Image harmonized = dih::Network<float>::to_image(result.harmonized);
        if (composite_background) {
            harmonized = dih::composite(harmonized, input, input_mask);
        }
        *out = new dih_image{std::move(harmonized)};
    });
}

dih_status dih_parse_labels(dih_model* model, const dih_image* composite, const dih_mask* mask,
                            dih_labelmap** out) {
    if (auto rc = require(model && composite && mask && out, "null argument")) return rc;
    return guarded([&] {
        const int S = model->v.net.input_size();
        dih::Image input = composite->v;
        dih::Mask input_mask = mask->v;
        if (input.width != S || input.height != S) {
            input = dih::resize_bilinear(input, S, S);
            input_mask = dih::resize_nearest(input_mask, S, S);
        }
        const dih::Tensor<float> x = dih::Network<float>::make_input(input, input_mask);
        dih::JointOutput<float> result = model->v.net.forward(x, dih::RunMode::Eval, nullptr);
        *out = new dih_labelmap{dih::Network<float>::argmax_labels(result.parsing_logits)};
    });
}

dih_status dih_upsample(const dih_image* low, const dih_image* guide, double sigma_spatial,
                        double sigma_range, int radius, dih_image** out) {
    if (auto rc = require(low && guide && out, "null argument")) return rc;
    return guarded([&] {
        dih::BilateralParams params;
        params.sigma_spatial = sigma_spatial;
        params.sigma_range = sigma_range;
        params.radius = radius > 0 ? radius : static_cast<int>(3.0 * sigma_spatial + 0.5);
        if (params.radius < 1) params.radius = 1;
        *out = new dih_image{dih::joint_bilateral_upsample(low->v, guide->v, params)};
    });
}

/* ---- evaluation -------------------------------------------------------- */

dih_status dih_evaluate(dih_model* model, const char* manifest_path, const char* report_csv_path) {
    if (auto rc = require(model && manifest_path && report_csv_path, "null argument")) return rc;
    return guarded([&] {
        const auto records = dih::load_manifest(manifest_path);
        const dih::EvalReport report = dih::evaluate_dataset(model->v, records);
        dih::write_eval_report(report, report_csv_path);
    });
}

dih_status dih_mse(const dih_image* a, const dih_image* b, double* out) {
    if (auto rc = require(a && b && out, "null argument")) return rc;
    return guarded([&] { *out = dih::mse(a->v, b->v); });
}

dih_status dih_psnr(const dih_image* a, const dih_image* b, double* out) {
    if (auto rc = require(a && b && out, "null argument")) return rc;
    return guarded([&] { *out = dih::psnr(a->v, b->v); });
}

dih_status dih_mean_iou(const dih_labelmap* predicted, const dih_labelmap* ground_truth,
                        int num_classes, double* out) {
    if (auto rc = require(predicted && ground_truth && out, "null argument")) return rc;
    return guarded([&] { *out = dih::mean_iou(predicted->v, ground_truth->v, num_classes).mean; });
}

/* ---- pairwise ranking -------------------------------------------------- */

dih_status dih_rank_pairwise_csv(const char* csv_path, double tolerance, int max_iters,
                                 dih_ranking** out) {
    if (auto rc = require(csv_path && out, "null argument")) return rc;
    return guarded([&] {
        const dih::PairwiseCounts counts = dih::load_pairwise_csv(csv_path);
        *out = new dih_ranking{dih::bt_scores(counts, tolerance, max_iters)};
    });
}

int dih_ranking_count(const dih_ranking* ranking) {
    return ranking ? static_cast<int>(ranking->v.ids.size()) : 0;
}

const char* dih_ranking_id(const dih_ranking* ranking, int index) {
    if (!ranking || index < 0 || index >= static_cast<int>(ranking->v.ids.size())) return nullptr;
    return ranking->v.ids[static_cast<size_t>(index)].c_str();
}

double dih_ranking_score(const dih_ranking* ranking, int index) {
    if (!ranking || index < 0 || index >= static_cast<int>(ranking->v.scores.size())) return 0.0;
    return ranking->v.scores[static_cast<size_t>(index)];
}

void dih_ranking_free(dih_ranking* ranking) { delete ranking; }

/* ---- gradient check ----------------------------------------------------- */

dih_status dih_gradient_check(double epsilon, uint64_t seed, int sample_count,
                              double* max_rel_error) {
    if (auto rc = require(max_rel_error != nullptr, "null argument")) return rc;
    if (auto rc = require(epsilon > 0.0 && sample_count > 0, "epsilon and sample count must be > 0"))
        return rc;
    return guarded([&] {
        const dih::GradientCheckResult res = dih::run_standard_gradient_check(epsilon, seed, sample_count);
        *max_rel_error = res.max_rel_error;
    });
}

} /* extern "C" */
