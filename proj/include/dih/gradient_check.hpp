#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "dih/losses.hpp"
#include "dih/network.hpp"
#include "dih/rng.hpp"

namespace dih {

// Compares analytic gradients of the combined loss against central finite
// differences on a double-precision network with random inputs. Returns the
// maximum relative error |g_a - g_n| / max(|g_a|, |g_n|, 1e-8) over at
// least `sample_count` randomly sampled parameters.
struct GradientCheckResult {
    double max_rel_error = 0.0;
    int samples = 0;
};

inline GradientCheckResult gradient_check(Network<double>& net, const Tensor<double>& input,
                                          const Tensor<double>& ground_truth, const LabelMap& labels,
                                          double lambda1, double lambda2, double epsilon,
                                          int sample_count, std::uint64_t seed) {
    auto loss_at = [&]() {
        ForwardCache<double> cache;
        JointOutput<double> out = net.forward(input, RunMode::Train, &cache);
        const CombinedLoss<double> loss =
            combined_loss(out.harmonized, out.parsing_logits, ground_truth, &labels, lambda1, lambda2);
        return loss.value;
    };

    // analytic gradients
    net.zero_grads();
    ForwardCache<double> cache;
    JointOutput<double> out = net.forward(input, RunMode::Train, &cache);
    const CombinedLoss<double> loss =
        combined_loss(out.harmonized, out.parsing_logits, ground_truth, &labels, lambda1, lambda2);
    net.backward(cache, loss.grad_harmonized, loss.grad_logits);

    auto refs = net.params();
    size_t total = 0;
    for (const auto& r : refs) total += r.value->size();

    Rng rng(Rng::mix(seed, 0x9c0ull));
    GradientCheckResult result;
    const int wanted = std::min<size_t>(static_cast<size_t>(sample_count), total);
    for (int s = 0; s < wanted; ++s) {
        size_t flat = static_cast<size_t>(rng.uniform() * static_cast<double>(total));
        flat = std::min(flat, total - 1);
        size_t ti = 0;
        while (flat >= refs[ti].value->size()) {
            flat -= refs[ti].value->size();
            ++ti;
        }
        double& p = (*refs[ti].value)[flat];
        const double analytic = (*refs[ti].grad)[flat];
        const double saved = p;
        p = saved + epsilon;
        const double lp = loss_at();
        p = saved - epsilon;
        const double lm = loss_at();
        p = saved;
        const double numeric = (lp - lm) / (2.0 * epsilon);
        const double rel = std::abs(analytic - numeric) /
                           std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        result.max_rel_error = std::max(result.max_rel_error, rel);
        ++result.samples;
    }
    return result;
}

// Builds the standard tiny double-precision network plus random inputs and
// runs the check; used by the CLI and the acceptance suite.
inline GradientCheckResult run_standard_gradient_check(double epsilon, std::uint64_t seed,
                                                       int sample_count) {
    ArchConfig cfg;
    cfg.input_size = 8;
    cfg.encoder_channels = {6, 8};
    cfg.bottleneck_dim = 16;
    cfg.num_classes = 4;
    cfg.kernel_size = 4;
    cfg.stride = 2;

    Network<double> net(cfg, seed);
    Rng rng(Rng::mix(seed, 0xdadull));

    Tensor<double> input({4, cfg.input_size, cfg.input_size});
    for (auto& v : input.v) v = rng.uniform();
    // the mask channel stays binary
    for (int y = 0; y < cfg.input_size; ++y) {
        for (int x = 0; x < cfg.input_size; ++x) {
            input.at(3, y, x) = rng.uniform() < 0.5 ? 0.0 : 1.0;
        }
    }
    Tensor<double> gt({3, cfg.input_size, cfg.input_size});
    for (auto& v : gt.v) v = rng.uniform();
    LabelMap labels(cfg.input_size, cfg.input_size);
    for (auto& l : labels.data) l = static_cast<std::uint8_t>(rng.uniform_int(cfg.num_classes));

    return gradient_check(net, input, gt, labels, 1.0, 100.0, epsilon, sample_count, seed);
}

} // namespace dih
