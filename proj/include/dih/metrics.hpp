#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dih/image.hpp"
#include "dih/manifest.hpp"
#include "dih/train.hpp"

namespace dih {

// Mean squared error on the 8-bit scale (values x255 before differencing),
// averaged over all pixels and channels. Range [0, 65025].
double mse(const Image& a, const Image& b);

// 10*log10(255^2 / mse); identical images report the 99 dB cap.
double psnr(const Image& a, const Image& b);
double psnr_from_mse(double mse_value);

struct IouResult {
    std::vector<double> per_class; // NaN for classes absent from both maps
    double mean = 0.0;
};

// Per class c: |pred=c AND gt=c| / |pred=c OR gt=c|; classes absent from
// both maps are excluded from the mean.
IouResult mean_iou(const LabelMap& predicted, const LabelMap& ground_truth, int num_classes);

struct EvalRow {
    std::string image;
    double mse = 0.0;
    double psnr = 0.0;
    std::optional<double> iou_mean;
    double baseline_mse = 0.0;  // cut-and-paste: composite vs ground truth
    double baseline_psnr = 0.0;
    std::optional<std::string> error; // per-record failures are reported, not fatal
};

struct EvalReport {
    std::vector<EvalRow> rows;
    double mean_mse = 0.0;
    double mean_psnr = 0.0;
    std::optional<double> mean_iou;
    double mean_baseline_mse = 0.0;
    double mean_baseline_psnr = 0.0;
};

// Runs eval-mode harmonization per record (background pasted back, matching
// the harmonize command's default), scores it against the ground truth and
// reports the cut-and-paste baseline alongside.
EvalReport evaluate_dataset(TrainedModel& model, const std::vector<ManifestRecord>& records);

// CSV with header `image,mse,psnr,iou_mean,baseline_mse,baseline_psnr`,
// one row per image plus a trailing `mean` row.
void write_eval_report(const EvalReport& report, const std::string& path);

} // namespace dih
