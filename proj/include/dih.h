/* dih — deep image harmonization toolkit, public C API.
 *
 * All functions return DIH_OK on success or a status code describing the
 * failure; dih_last_error() returns a thread-local message for the most
 * recent failure. Handles are opaque and owned by the caller via the
 * matching *_free function.
 */
#ifndef DIH_H
#define DIH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef DIH_API
#define DIH_API __attribute__((visibility("default")))
#endif

typedef enum dih_status {
    DIH_OK = 0,
    DIH_ERR_INVALID_ARGUMENT = 1,
    DIH_ERR_NOT_FOUND = 2,
    DIH_ERR_UNSUPPORTED_FORMAT = 3,
    DIH_ERR_CORRUPT_DATA = 4,
    DIH_ERR_IO = 5,
    DIH_ERR_DIMENSION_MISMATCH = 6,
    DIH_ERR_EMPTY_REGION = 7,
    DIH_ERR_VERSION_MISMATCH = 8,
    DIH_ERR_CHECKSUM = 9,
    DIH_ERR_BAD_MANIFEST = 10,
    DIH_ERR_DISCONNECTED_GRAPH = 11,
    DIH_ERR_RUNTIME = 12
} dih_status;

DIH_API const char* dih_status_name(dih_status status);
DIH_API const char* dih_last_error(void);

typedef struct dih_image dih_image;       /* H x W x 3 floats in [0,1] */
typedef struct dih_mask dih_mask;         /* H x W bytes, strictly {0,1} */
typedef struct dih_labelmap dih_labelmap; /* H x W class indices */
typedef struct dih_model dih_model;       /* trained network handle */
typedef struct dih_ranking dih_ranking;   /* fitted pairwise ranking */

/* ---- images ---------------------------------------------------------- */

DIH_API dih_status dih_image_load(const char* path, dih_image** out);
DIH_API dih_status dih_image_save(const dih_image* image, const char* path);
/* `rgb` may be NULL for a zero image; otherwise height*width*3 floats. */
DIH_API dih_status dih_image_create(int width, int height, const float* rgb, dih_image** out);
DIH_API void dih_image_free(dih_image* image);
DIH_API int dih_image_width(const dih_image* image);
DIH_API int dih_image_height(const dih_image* image);
DIH_API const float* dih_image_pixels(const dih_image* image);

DIH_API dih_status dih_mask_load(const char* path, dih_mask** out);
DIH_API dih_status dih_mask_save(const dih_mask* mask, const char* path);
DIH_API dih_status dih_mask_create(int width, int height, const uint8_t* values, dih_mask** out);
DIH_API void dih_mask_free(dih_mask* mask);
DIH_API int dih_mask_width(const dih_mask* mask);
DIH_API int dih_mask_height(const dih_mask* mask);
DIH_API const uint8_t* dih_mask_pixels(const dih_mask* mask);

DIH_API dih_status dih_labelmap_load(const char* path, dih_labelmap** out);
DIH_API dih_status dih_labelmap_save(const dih_labelmap* labels, const char* path);
DIH_API void dih_labelmap_free(dih_labelmap* labels);
DIH_API int dih_labelmap_width(const dih_labelmap* labels);
DIH_API int dih_labelmap_height(const dih_labelmap* labels);
DIH_API const uint8_t* dih_labelmap_pixels(const dih_labelmap* labels);

/* Cut-and-paste: foreground where mask=1, background elsewhere. */
DIH_API dih_status dih_composite(const dih_image* foreground, const dih_image* background,
                                 const dih_mask* mask, dih_image** out);

/* Histogram-matching color transfer (luminance + color temperature) from
 * the reference region onto the target region, blended by `strength`. */
DIH_API dih_status dih_color_transfer(const dih_image* target, const dih_mask* target_mask,
                                      const dih_image* reference, const dih_mask* reference_mask,
                                      double strength, dih_image** out);

/* ---- training data synthesis ----------------------------------------- */

typedef struct dih_synth_params {
    uint64_t seed;
    int count;          /* number of pairs (>= 2) */
    int size;           /* square scene size in pixels */
    int num_classes;    /* 3..25 */
    int pyramid_levels; /* retrieval pyramid depth */
    const double* strengths; /* transfer strengths; NULL for {0.4,0.7,1.0} */
    int strength_count;
} dih_synth_params;

DIH_API void dih_synth_params_init(dih_synth_params* params);
DIH_API dih_status dih_synth_dataset(const dih_synth_params* params, const char* out_dir);

/* ---- training --------------------------------------------------------- */

typedef struct dih_arch_params {
    int input_size;
    const int* encoder_channels;
    int encoder_layer_count;
    int bottleneck_dim;
    int num_classes;
    int kernel_size;
    int stride;
} dih_arch_params;

DIH_API void dih_arch_params_init(dih_arch_params* params);

typedef struct dih_train_params {
    double lambda1;       /* reconstruction weight, default 1 */
    double lambda2;       /* parsing weight, default 100 */
    double learning_rate; /* fixed SGD step, default 1e-3 */
    int iters_stage1;     /* joint stage */
    int iters_stage2;     /* finetune stage (parsing decoder frozen) */
    int batch_size;
    uint64_t seed;
    int cross_links; /* 0 severs the cross-decoder links (ablation) */
} dih_train_params;

DIH_API void dih_train_params_init(dih_train_params* params);

/* Two-stage training from manifests. `manifest_stage2` may be NULL to
 * reuse stage 1 data; `loss_csv_path` and `stage1_checkpoint_path` are
 * optional outputs. */
DIH_API dih_status dih_train(const char* manifest_stage1, const char* manifest_stage2,
                             const dih_arch_params* arch, const dih_train_params* train,
                             const char* checkpoint_path, const char* loss_csv_path,
                             const char* stage1_checkpoint_path);

/* ---- inference --------------------------------------------------------- */

DIH_API dih_status dih_model_load(const char* path, dih_model** out);
DIH_API void dih_model_free(dih_model* model);
DIH_API int dih_model_input_size(const dih_model* model);
DIH_API dih_status dih_model_set_cross_links(dih_model* model, int enabled);

/* Eval-mode harmonization. Inputs that do not match the model resolution
 * are resampled to it. When `composite_background` is nonzero the original
 * background pixels are pasted back over the network output. */
DIH_API dih_status dih_harmonize(dih_model* model, const dih_image* composite,
                                 const dih_mask* mask, int composite_background, dih_image** out);

/* Per-pixel argmax of the scene-parsing logits. */
DIH_API dih_status dih_parse_labels(dih_model* model, const dih_image* composite,
                                    const dih_mask* mask, dih_labelmap** out);

/* Joint bilateral upsampling of `low` guided by the full-resolution
 * composite. `radius` <= 0 selects 3 * sigma_spatial. */
DIH_API dih_status dih_upsample(const dih_image* low, const dih_image* guide,
                                double sigma_spatial, double sigma_range, int radius,
                                dih_image** out);

/* ---- evaluation -------------------------------------------------------- */

/* Harmonizes every manifest record and writes the report CSV
 * (`image,mse,psnr,iou_mean,baseline_mse,baseline_psnr`). */
DIH_API dih_status dih_evaluate(dih_model* model, const char* manifest_path,
                                const char* report_csv_path);

DIH_API dih_status dih_mse(const dih_image* a, const dih_image* b, double* out);
DIH_API dih_status dih_psnr(const dih_image* a, const dih_image* b, double* out);
DIH_API dih_status dih_mean_iou(const dih_labelmap* predicted, const dih_labelmap* ground_truth,
                                int num_classes, double* out);

/* ---- pairwise ranking -------------------------------------------------- */

/* Fits Bradley-Terry strengths from a `winner_id,loser_id` CSV. */
DIH_API dih_status dih_rank_pairwise_csv(const char* csv_path, double tolerance, int max_iters,
                                         dih_ranking** out);
DIH_API int dih_ranking_count(const dih_ranking* ranking);
DIH_API const char* dih_ranking_id(const dih_ranking* ranking, int index);
DIH_API double dih_ranking_score(const dih_ranking* ranking, int index);
DIH_API void dih_ranking_free(dih_ranking* ranking);

/* ---- gradient check ----------------------------------------------------- */

/* Double-precision finite-difference check of the joint network's
 * gradients on a tiny architecture; writes the max relative error. */
DIH_API dih_status dih_gradient_check(double epsilon, uint64_t seed, int sample_count,
                                      double* max_rel_error);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DIH_H */
