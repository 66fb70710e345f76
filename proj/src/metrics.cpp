#include "dih/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "dih/error.hpp"
#include "dih/image_io.hpp"

namespace dih {

double mse(const Image& a, const Image& b) {
    if (!a.same_size(b)) fail(Status::DimensionMismatch, "mse: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = (static_cast<double>(a.data[i]) - static_cast<double>(b.data[i])) * 255.0;
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double psnr_from_mse(double mse_value) {
    constexpr double kCap = 99.0;
    if (mse_value <= 0.0) return kCap;
    return std::min(kCap, 10.0 * std::log10(255.0 * 255.0 / mse_value));
}

double psnr(const Image& a, const Image& b) { return psnr_from_mse(mse(a, b)); }

IouResult mean_iou(const LabelMap& predicted, const LabelMap& ground_truth, int num_classes) {
    if (predicted.width != ground_truth.width || predicted.height != ground_truth.height) {
        fail(Status::DimensionMismatch, "mean_iou: shape mismatch");
    }
    std::vector<size_t> inter(num_classes, 0), pred_n(num_classes, 0), gt_n(num_classes, 0);
    for (size_t i = 0; i < predicted.data.size(); ++i) {
        const int p = predicted.data[i];
        const int g = ground_truth.data[i];
        if (p >= num_classes || g >= num_classes) fail(Status::InvalidArgument, "mean_iou: label out of range");
        ++pred_n[p];
        ++gt_n[g];
        if (p == g) ++inter[p];
    }
    IouResult res;
    res.per_class.assign(num_classes, std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    int present = 0;
    for (int c = 0; c < num_classes; ++c) {
        const size_t uni = pred_n[c] + gt_n[c] - inter[c];
        if (uni == 0) continue; // absent from both maps
        res.per_class[c] = static_cast<double>(inter[c]) / static_cast<double>(uni);
        sum += res.per_class[c];
        ++present;
    }
    res.mean = present > 0 ? sum / present : 0.0;
    return res;
}

EvalReport evaluate_dataset(TrainedModel& model, const std::vector<ManifestRecord>& records) {
    EvalReport report;
    double sum_mse = 0.0, sum_psnr = 0.0, sum_bmse = 0.0, sum_bpsnr = 0.0, sum_iou = 0.0;
    int scored = 0, scored_iou = 0;

    for (const auto& rec : records) {
        EvalRow row;
        row.image = rec.composite_path;
        try {
            const Image comp = load_image(rec.composite_path);
            const Mask mask = load_mask(rec.mask_path);
            const Image gt = load_image(rec.ground_truth_path);

            Image input = comp;
            Mask input_mask = mask;
            const int S = model.net.input_size();
            if (comp.width != S || comp.height != S) {
                input = resize_bilinear(comp, S, S);
                input_mask = resize_nearest(mask, S, S);
            }
            const Tensor<float> x = Network<float>::make_input(input, input_mask);
            JointOutput<float> out = model.net.forward(x, RunMode::Eval, nullptr);
            Image harmonized = Network<float>::to_image(out.harmonized);
            if (harmonized.same_size(comp)) {
                harmonized = composite(harmonized, comp, mask); // keep the true background
            }

            Image gt_scored = gt.same_size(harmonized) ? gt : resize_bilinear(gt, S, S);
            row.mse = mse(harmonized, gt_scored);
            row.psnr = psnr_from_mse(row.mse);
            row.baseline_mse = mse(comp.same_size(gt) ? comp : input, gt_scored);
            row.baseline_psnr = psnr_from_mse(row.baseline_mse);

            if (!rec.labelmap_path.empty()) {
                const LabelMap gt_labels = load_labelmap(rec.labelmap_path);
                const LabelMap pred = Network<float>::argmax_labels(out.parsing_logits);
                if (pred.width == gt_labels.width && pred.height == gt_labels.height) {
                    row.iou_mean = mean_iou(pred, gt_labels, model.net.cfg.num_classes).mean;
                    sum_iou += *row.iou_mean;
                    ++scored_iou;
                }
            }

            sum_mse += row.mse;
            sum_psnr += row.psnr;
            sum_bmse += row.baseline_mse;
            sum_bpsnr += row.baseline_psnr;
            ++scored;
        } catch (const Error& e) {
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }

    if (scored > 0) {
        report.mean_mse = sum_mse / scored;
        report.mean_psnr = sum_psnr / scored;
        report.mean_baseline_mse = sum_bmse / scored;
        report.mean_baseline_psnr = sum_bpsnr / scored;
    }
    if (scored_iou > 0) report.mean_iou = sum_iou / scored_iou;
    return report;
}

void write_eval_report(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Status::Io, "cannot write report: " + path);
    out << "image,mse,psnr,iou_mean,baseline_mse,baseline_psnr\n";
    char buf[256];
    auto fmt = [&](const EvalRow& row, const std::string& name) {
        if (row.error) {
            out << name << ",error,error,error,error,error\n";
            return;
        }
        if (row.iou_mean) {
            std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f\n", name.c_str(), row.mse,
                          row.psnr, *row.iou_mean, row.baseline_mse, row.baseline_psnr);
        } else {
            std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,-,%.6f,%.6f\n", name.c_str(), row.mse,
                          row.psnr, row.baseline_mse, row.baseline_psnr);
        }
        out << buf;
    };
    for (const auto& row : report.rows) fmt(row, row.image);

    EvalRow mean_row;
    mean_row.mse = report.mean_mse;
    mean_row.psnr = report.mean_psnr;
    mean_row.iou_mean = report.mean_iou;
    mean_row.baseline_mse = report.mean_baseline_mse;
    mean_row.baseline_psnr = report.mean_baseline_psnr;
    fmt(mean_row, "mean");
    if (!out) fail(Status::Io, "report write failed: " + path);
}

} // namespace dih
