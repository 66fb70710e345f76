#pragma once

#include <cmath>
#include <vector>

#include "dih/error.hpp"
#include "dih/image.hpp"
#include "dih/tensor.hpp"

namespace dih {

template <class T>
struct LossResult {
    double value = 0.0;
    Tensor<T> grad;
};

// L2 reconstruction loss over the entire image (not just the foreground):
// 1/2 * sum over pixels and channels of squared differences, with gradient
// (prediction - target). Inputs are on the [0,1] scale.
template <class T>
LossResult<T> reconstruction_loss(const Tensor<T>& predicted, const Tensor<T>& target) {
    if (predicted.shape != target.shape) fail(Status::DimensionMismatch, "reconstruction_loss: shape mismatch");
    LossResult<T> res;
    res.grad = Tensor<T>(predicted.shape);
    double acc = 0.0;
    for (size_t i = 0; i < predicted.numel(); ++i) {
        const double d = static_cast<double>(predicted.v[i]) - static_cast<double>(target.v[i]);
        acc += d * d;
        res.grad.v[i] = static_cast<T>(d);
    }
    res.value = 0.5 * acc;
    return res;
}

template <class T>
Tensor<T> image_to_tensor(const Image& img) {
    Tensor<T> t({3, img.height, img.width});
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) t.at(c, y, x) = static_cast<T>(img.at(y, x, c));
        }
    }
    return t;
}

// Pixel-wise cross-entropy with the standard softmax, summed over pixels.
// Numerically stabilized by max subtraction; gradient is softmax minus the
// one-hot target per pixel.
template <class T>
LossResult<T> parsing_loss(const Tensor<T>& logits, const LabelMap& labels) {
    const int C = logits.extent(0), H = logits.extent(1), W = logits.extent(2);
    if (labels.height != H || labels.width != W) fail(Status::DimensionMismatch, "parsing_loss: shape mismatch");
    LossResult<T> res;
    res.grad = Tensor<T>(logits.shape);
    double total = 0.0;
    std::vector<double> p(C);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const int label = labels.at(y, x);
            if (label >= C) fail(Status::InvalidArgument, "parsing_loss: label out of range");
            double mx = static_cast<double>(logits.at(0, y, x));
            for (int c = 1; c < C; ++c) mx = std::max(mx, static_cast<double>(logits.at(c, y, x)));
            double z = 0.0;
            for (int c = 0; c < C; ++c) {
                p[c] = std::exp(static_cast<double>(logits.at(c, y, x)) - mx);
                z += p[c];
            }
            total += std::log(z) - (static_cast<double>(logits.at(label, y, x)) - mx);
            for (int c = 0; c < C; ++c) {
                res.grad.at(c, y, x) = static_cast<T>(p[c] / z - (c == label ? 1.0 : 0.0));
            }
        }
    }
    res.value = total;
    return res;
}

// lambda1 * reconstruction + lambda2 * parsing. Output gradients are the
// lambda-weighted sums; labels are required whenever lambda2 > 0.
template <class T>
struct CombinedLoss {
    double value = 0.0;
    double rec_value = 0.0;
    double cro_value = 0.0;
    Tensor<T> grad_harmonized;
    Tensor<T> grad_logits;
};

template <class T>
CombinedLoss<T> combined_loss(const Tensor<T>& harmonized, const Tensor<T>& logits,
                              const Tensor<T>& ground_truth, const LabelMap* labels,
                              double lambda1, double lambda2) {
    CombinedLoss<T> out;
    LossResult<T> rec = reconstruction_loss(harmonized, ground_truth);
    out.rec_value = rec.value;
    out.grad_harmonized = std::move(rec.grad);
    for (auto& g : out.grad_harmonized.v) g = static_cast<T>(static_cast<double>(g) * lambda1);

    if (lambda2 > 0.0) {
        if (!labels) fail(Status::InvalidArgument, "combined_loss: labels required when lambda2 > 0");
        LossResult<T> cro = parsing_loss(logits, *labels);
        out.cro_value = cro.value;
        out.grad_logits = std::move(cro.grad);
        for (auto& g : out.grad_logits.v) g = static_cast<T>(static_cast<double>(g) * lambda2);
    } else {
        out.cro_value = 0.0;
        out.grad_logits = Tensor<T>(logits.shape);
    }
    out.value = lambda1 * out.rec_value + lambda2 * out.cro_value;
    return out;
}

} // namespace dih
