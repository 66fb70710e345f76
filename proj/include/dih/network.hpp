#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "dih/image.hpp"
#include "dih/layers.hpp"

namespace dih {

// Architecture of the joint encoder-decoder. The decoders mirror the
// encoder layer-for-layer; padding is derived so every conv divides (and
// every deconv multiplies) the spatial extent by the stride exactly.
struct ArchConfig {
    int input_size = 64;
    std::vector<int> encoder_channels = {16, 32, 64};
    int bottleneck_dim = 512;
    int num_classes = 25;
    int kernel_size = 4;
    int stride = 2;

    int depth() const { return static_cast<int>(encoder_channels.size()); }
    int padding() const { return (kernel_size - stride) / 2; }
    int bottleneck_spatial() const {
        int s = input_size;
        for (int i = 0; i < depth(); ++i) s /= stride;
        return s;
    }
    void validate() const;
    bool operator==(const ArchConfig&) const = default;
};

inline void ArchConfig::validate() const {
    if (encoder_channels.empty()) fail(Status::InvalidArgument, "arch: need at least one encoder layer");
    if (stride < 1 || kernel_size < stride || (kernel_size - stride) % 2 != 0) {
        fail(Status::InvalidArgument, "arch: kernel/stride must satisfy k >= s with k-s even");
    }
    if (num_classes < 2) fail(Status::InvalidArgument, "arch: num_classes must be >= 2");
    if (bottleneck_dim < 1) fail(Status::InvalidArgument, "arch: bottleneck_dim must be >= 1");
    int s = input_size;
    for (int i = 0; i < depth(); ++i) {
        if (s % stride != 0) fail(Status::InvalidArgument, "arch: input size not divisible by stride^depth");
        s /= stride;
    }
    if (s < 1) fail(Status::InvalidArgument, "arch: bottleneck spatial size collapsed to zero");
    for (int c : encoder_channels) {
        if (c < 1) fail(Status::InvalidArgument, "arch: channel counts must be >= 1");
    }
}

enum class ParamGroup { Encoder, HarmDecoder, ParseDecoder };

template <class T>
struct ParamRef {
    std::vector<T>* value;
    std::vector<T>* grad;
    ParamGroup group;
};

template <class T>
struct JointOutput {
    Tensor<T> harmonized;     // 3 x S x S, linear (clamped only at export)
    Tensor<T> parsing_logits; // num_classes x S x S
};

template <class T>
struct ForwardCache {
    bool valid = false;
    std::vector<Tensor<T>> enc_inputs; // conv input per encoder layer
    std::vector<NormActCache<T>> enc_norm;
    std::vector<Tensor<T>> enc_out;    // post-norm activations e[i]
    std::vector<T> enc_fc_in;          // flattened e[D-1]
    std::vector<T> enc_fc_pre;         // pre-ELU bottleneck
    std::vector<T> bottleneck;         // post-ELU bottleneck

    struct DecoderCache {
        std::vector<T> fc_pre;                // pre-ELU
        Tensor<T> fc_out;                     // reshaped post-ELU
        std::vector<Tensor<T>> deconv_inputs; // post-concat inputs
        std::vector<NormActCache<T>> norm;    // for layers 0..D-2
    };
    DecoderCache harm, parse;
};

// The joint network: shared encoder (convs + fully connected bottleneck),
// harmonization decoder and scene-parsing decoder (transposed convs), with
// per-layer skip links from the encoder into both decoders and parsing
// feature maps concatenated into the harmonization decoder at every layer
// except the last. No pooling anywhere.
template <class T>
struct Network {
    ArchConfig cfg;
    bool cross_links = true;        // ablation switch for the cross-decoder links
    bool freeze_parse_stats = false; // stop running-stat updates in the parsing decoder

    std::vector<ConvLayer<T>> enc;
    std::vector<NormActLayer<T>> enc_norm;
    DenseLayer<T> enc_fc;

    struct Decoder {
        DenseLayer<T> fc;
        std::vector<DeconvLayer<T>> deconv;
        std::vector<NormActLayer<T>> norm; // D-1 entries
    };
    Decoder harm, parse;

    Network() = default;
    Network(const ArchConfig& config, std::uint64_t seed) { build(config, seed); }

    void build(const ArchConfig& config, std::uint64_t seed);

    int input_size() const { return cfg.input_size; }

    // channel/shape bookkeeping -------------------------------------------

    int deconv_out_channels(int j, bool parsing) const {
        const int D = cfg.depth();
        if (j == D - 1) return parsing ? cfg.num_classes : 3;
        return cfg.encoder_channels[static_cast<size_t>(D - 2 - j)];
    }

    int skip_channels(int j) const {
        return cfg.encoder_channels[static_cast<size_t>(cfg.depth() - 1 - j)];
    }

    // parsing feature consumed by harmonization deconv j (j <= D-2)
    int cross_channels(int j) const {
        const int D = cfg.depth();
        if (j == 0) return cfg.encoder_channels[static_cast<size_t>(D - 1)];
        return cfg.encoder_channels[static_cast<size_t>(D - 1 - j)];
    }

    int feature_spatial(int j) const { // spatial extent of p_feat[j] / deconv j input
        int sp = cfg.bottleneck_spatial();
        for (int i = 0; i < j; ++i) sp *= cfg.stride;
        return sp;
    }

    int deconv_in_channels(int j, bool parsing) const {
        const int D = cfg.depth();
        const int prev = j == 0 ? cfg.encoder_channels[static_cast<size_t>(D - 1)]
                                : deconv_out_channels(j - 1, parsing);
        int in = prev + skip_channels(j);
        if (!parsing && j <= D - 2) in += cross_channels(j);
        return in;
    }

    // core passes ----------------------------------------------------------

    JointOutput<T> forward(const Tensor<T>& input, RunMode mode, ForwardCache<T>* cache);
    void backward(const ForwardCache<T>& cache, const Tensor<T>& grad_harmonized,
                  const Tensor<T>& grad_logits);

    void zero_grads();
    std::vector<ParamRef<T>> params();
    std::vector<std::vector<T>*> running_state();

    // conversions ----------------------------------------------------------

    static Tensor<T> make_input(const Image& composite, const Mask& mask);
    static Image to_image(const Tensor<T>& t); // clamps to [0,1]
    static LabelMap argmax_labels(const Tensor<T>& logits);

private:
    Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& parts) const;
};

// ---------------------------------------------------------------------------

template <class T>
void Network<T>::build(const ArchConfig& config, std::uint64_t seed) {
    config.validate();
    cfg = config;
    const int D = cfg.depth();
    const int hb = cfg.bottleneck_spatial();
    const int deep_c = cfg.encoder_channels[static_cast<size_t>(D - 1)];

    Rng rng(Rng::mix(seed, 0xd1ull));

    enc.assign(D, {});
    enc_norm.assign(D, {});
    int in_c = 4; // RGB + mask
    for (int i = 0; i < D; ++i) {
        enc[i].init(in_c, cfg.encoder_channels[static_cast<size_t>(i)], cfg.kernel_size, cfg.stride,
                    cfg.padding(), rng);
        enc_norm[i].init(cfg.encoder_channels[static_cast<size_t>(i)]);
        in_c = cfg.encoder_channels[static_cast<size_t>(i)];
    }
    enc_fc.init(deep_c * hb * hb, cfg.bottleneck_dim, rng);

    auto build_decoder = [&](Decoder& dec, bool parsing) {
        dec.fc.init(cfg.bottleneck_dim, deep_c * hb * hb, rng);
        dec.deconv.assign(D, {});
        dec.norm.assign(D > 0 ? D - 1 : 0, {});
        for (int j = 0; j < D; ++j) {
            dec.deconv[j].init(deconv_in_channels(j, parsing), deconv_out_channels(j, parsing),
                               cfg.kernel_size, cfg.stride, cfg.padding(), rng);
            if (j < D - 1) dec.norm[j].init(deconv_out_channels(j, parsing));
        }
    };
    build_decoder(harm, false);
    build_decoder(parse, true);
}

template <class T>
Tensor<T> Network<T>::concat_channels(const std::vector<const Tensor<T>*>& parts) const {
    int total_c = 0;
    const int h = parts.front()->extent(1);
    const int w = parts.front()->extent(2);
    for (const auto* p : parts) total_c += p->extent(0);
    Tensor<T> out({total_c, h, w});
    size_t off = 0;
    for (const auto* p : parts) {
        std::copy(p->v.begin(), p->v.end(), out.v.begin() + off);
        off += p->numel();
    }
    return out;
}

template <class T>
JointOutput<T> Network<T>::forward(const Tensor<T>& input, RunMode mode, ForwardCache<T>* cache) {
    if (input.shape.size() != 3 || input.extent(0) != 4 || input.extent(1) != cfg.input_size ||
        input.extent(2) != cfg.input_size) {
        fail(Status::DimensionMismatch, "forward: input must be 4 x S x S for the configured size");
    }
    const int D = cfg.depth();
    const int hb = cfg.bottleneck_spatial();
    const int deep_c = cfg.encoder_channels[static_cast<size_t>(D - 1)];
    const bool train = mode == RunMode::Train;
    if (cache) {
        *cache = ForwardCache<T>{};
        cache->valid = train;
        cache->enc_inputs.resize(D);
        cache->enc_norm.resize(D);
        cache->harm.deconv_inputs.resize(D);
        cache->harm.norm.resize(D > 0 ? D - 1 : 0);
        cache->parse.deconv_inputs.resize(D);
        cache->parse.norm.resize(D > 0 ? D - 1 : 0);
    }

    // encoder
    Tensor<T> a = input;
    std::vector<Tensor<T>> e(D);
    for (int i = 0; i < D; ++i) {
        if (cache) cache->enc_inputs[i] = a;
        Tensor<T> pre = enc[i].forward(a);
        e[i] = enc_norm[i].forward(pre, mode, cache ? &cache->enc_norm[i] : nullptr, train);
        a = e[i];
    }

    // bottleneck
    std::vector<T> flat(e[D - 1].v.begin(), e[D - 1].v.end());
    std::vector<T> fc_pre = enc_fc.forward(flat);
    std::vector<T> bottleneck(fc_pre.size());
    for (size_t i = 0; i < fc_pre.size(); ++i) bottleneck[i] = elu(fc_pre[i]);
    if (cache) {
        cache->enc_out = e;
        cache->enc_fc_in = std::move(flat);
        cache->enc_fc_pre = fc_pre;
        cache->bottleneck = bottleneck;
    }

    // run one decoder; returns (final output, features p_feat[0..D-2])
    auto run_decoder = [&](Decoder& dec, bool parsing, const std::vector<Tensor<T>>& cross_feats,
                           typename ForwardCache<T>::DecoderCache* dc)
        -> std::pair<Tensor<T>, std::vector<Tensor<T>>> {
        const bool update_stats = train && !(parsing && freeze_parse_stats);
        std::vector<T> fpre = dec.fc.forward(bottleneck);
        Tensor<T> feat({deep_c, hb, hb});
        for (size_t i = 0; i < fpre.size(); ++i) feat.v[i] = elu(fpre[i]);
        if (dc) {
            dc->fc_pre = fpre;
            dc->fc_out = feat;
        }
        std::vector<Tensor<T>> features(D > 0 ? D - 1 : 0);
        Tensor<T> prev = std::move(feat);
        Tensor<T> out;
        for (int j = 0; j < D; ++j) {
            if (j <= D - 2) features[static_cast<size_t>(j)] = prev; // p_feat[j]
            std::vector<const Tensor<T>*> parts = {&prev, &e[static_cast<size_t>(D - 1 - j)]};
            Tensor<T> zeros_cross;
            if (!parsing && j <= D - 2) {
                if (cross_links) {
                    parts.push_back(&cross_feats[static_cast<size_t>(j)]);
                } else {
                    zeros_cross = Tensor<T>({cross_channels(j), prev.extent(1), prev.extent(2)});
                    parts.push_back(&zeros_cross);
                }
            }
            Tensor<T> in = concat_channels(parts);
            if (dc) dc->deconv_inputs[static_cast<size_t>(j)] = in;
            Tensor<T> pre = dec.deconv[static_cast<size_t>(j)].forward(in);
            if (j < D - 1) {
                out = dec.norm[static_cast<size_t>(j)].forward(
                    pre, mode, dc ? &dc->norm[static_cast<size_t>(j)] : nullptr, update_stats);
            } else {
                out = std::move(pre);
            }
            prev = out;
        }
        return {std::move(out), std::move(features)};
    };

    auto [logits, parse_features] = run_decoder(parse, true, {}, cache ? &cache->parse : nullptr);
    auto [harm_out, harm_features] =
        run_decoder(harm, false, parse_features, cache ? &cache->harm : nullptr);
    (void)harm_features;

    JointOutput<T> out;
    out.harmonized = std::move(harm_out);
    out.parsing_logits = std::move(logits);
    return out;
}

template <class T>
void Network<T>::backward(const ForwardCache<T>& cache, const Tensor<T>& grad_harmonized,
                          const Tensor<T>& grad_logits) {
    if (!cache.valid) fail(Status::InvalidArgument, "backward: cache must come from a train-mode forward");
    const int D = cfg.depth();

    std::vector<Tensor<T>> e_grad(D);
    for (int i = 0; i < D; ++i) e_grad[i] = Tensor<T>(cache.enc_out[static_cast<size_t>(i)].shape);
    std::vector<T> bottleneck_grad(static_cast<size_t>(cfg.bottleneck_dim), T(0));

    // cross_grad[j]: gradient flowing into parsing feature p_feat[j]
    std::vector<Tensor<T>> cross_grad(D > 0 ? D - 1 : 0);
    for (int j = 0; j <= D - 2; ++j) {
        const int sp = feature_spatial(j);
        cross_grad[static_cast<size_t>(j)] = Tensor<T>({cross_channels(j), sp, sp});
    }

    auto backward_decoder = [&](Decoder& dec, bool parsing,
                                const typename ForwardCache<T>::DecoderCache& dc, Tensor<T> g) {
        for (int j = D - 1; j >= 0; --j) {
            if (parsing && j + 1 <= D - 2) {
                // the harmonization decoder's pull on p_feat[j+1]
                const auto& cg = cross_grad[static_cast<size_t>(j + 1)];
                for (size_t i = 0; i < g.numel(); ++i) g.v[i] += cg.v[i];
            }
            if (j < D - 1) {
                g = dec.norm[static_cast<size_t>(j)].backward(g, dc.norm[static_cast<size_t>(j)]);
            }
            Tensor<T> gin = dec.deconv[static_cast<size_t>(j)].backward(
                dc.deconv_inputs[static_cast<size_t>(j)], g);

            // split the concatenation gradient back to its sources
            const int gh = gin.extent(1), gw = gin.extent(2);
            std::vector<int> prev_shape =
                j == 0 ? dc.fc_out.shape
                       : std::vector<int>{deconv_out_channels(j - 1, parsing), gh, gw};
            Tensor<T> gprev(prev_shape);
            Tensor<T>* skip_dst = &e_grad[static_cast<size_t>(D - 1 - j)];
            size_t off = 0;
            for (size_t i = 0; i < gprev.numel(); ++i) gprev.v[i] = gin.v[off + i];
            off += gprev.numel();
            for (size_t i = 0; i < skip_dst->numel(); ++i) skip_dst->v[i] += gin.v[off + i];
            off += skip_dst->numel();
            if (!parsing && j <= D - 2) {
                if (cross_links) {
                    auto& cg = cross_grad[static_cast<size_t>(j)];
                    for (size_t i = 0; i < cg.numel(); ++i) cg.v[i] += gin.v[off + i];
                }
                // severed links: the zero-filled slot absorbs the gradient
            }
            g = std::move(gprev);
        }
        if (parsing && D >= 2) {
            const auto& cg = cross_grad[0];
            for (size_t i = 0; i < g.numel(); ++i) g.v[i] += cg.v[i];
        }
        // through the decoder's fully connected expansion
        std::vector<T> gfc(g.v.begin(), g.v.end());
        for (size_t i = 0; i < gfc.size(); ++i) gfc[i] *= elu_grad(dc.fc_pre[i]);
        std::vector<T> gb = dec.fc.backward(cache.bottleneck, gfc);
        for (size_t i = 0; i < gb.size(); ++i) bottleneck_grad[i] += gb[i];
    };

    // harmonization first: it feeds cross_grad, which the parsing pass consumes
    backward_decoder(harm, false, cache.harm, grad_harmonized);
    backward_decoder(parse, true, cache.parse, grad_logits);

    // bottleneck
    std::vector<T> gpre(bottleneck_grad.size());
    for (size_t i = 0; i < gpre.size(); ++i) gpre[i] = bottleneck_grad[i] * elu_grad(cache.enc_fc_pre[i]);
    std::vector<T> gflat = enc_fc.backward(cache.enc_fc_in, gpre);
    {
        auto& tail = e_grad[static_cast<size_t>(D - 1)];
        for (size_t i = 0; i < tail.numel(); ++i) tail.v[i] += gflat[i];
    }

    // encoder
    for (int i = D - 1; i >= 0; --i) {
        Tensor<T> g = enc_norm[static_cast<size_t>(i)].backward(e_grad[static_cast<size_t>(i)],
                                                                cache.enc_norm[static_cast<size_t>(i)]);
        Tensor<T> gin = enc[static_cast<size_t>(i)].backward(cache.enc_inputs[static_cast<size_t>(i)], g);
        if (i > 0) {
            auto& prev = e_grad[static_cast<size_t>(i - 1)];
            for (size_t n = 0; n < prev.numel(); ++n) prev.v[n] += gin.v[n];
        }
    }
}

template <class T>
void Network<T>::zero_grads() {
    for (auto ref : params()) std::fill(ref.grad->begin(), ref.grad->end(), T(0));
}

template <class T>
std::vector<ParamRef<T>> Network<T>::params() {
    std::vector<ParamRef<T>> out;
    for (size_t i = 0; i < enc.size(); ++i) {
        out.push_back({&enc[i].W, &enc[i].gW, ParamGroup::Encoder});
        out.push_back({&enc[i].b, &enc[i].gb, ParamGroup::Encoder});
        out.push_back({&enc_norm[i].gamma, &enc_norm[i].g_gamma, ParamGroup::Encoder});
        out.push_back({&enc_norm[i].beta, &enc_norm[i].g_beta, ParamGroup::Encoder});
    }
    out.push_back({&enc_fc.W, &enc_fc.gW, ParamGroup::Encoder});
    out.push_back({&enc_fc.b, &enc_fc.gb, ParamGroup::Encoder});

    auto add_decoder = [&out](Decoder& dec, ParamGroup group) {
        out.push_back({&dec.fc.W, &dec.fc.gW, group});
        out.push_back({&dec.fc.b, &dec.fc.gb, group});
        for (size_t j = 0; j < dec.deconv.size(); ++j) {
            out.push_back({&dec.deconv[j].W, &dec.deconv[j].gW, group});
            out.push_back({&dec.deconv[j].b, &dec.deconv[j].gb, group});
            if (j < dec.norm.size()) {
                out.push_back({&dec.norm[j].gamma, &dec.norm[j].g_gamma, group});
                out.push_back({&dec.norm[j].beta, &dec.norm[j].g_beta, group});
            }
        }
    };
    add_decoder(harm, ParamGroup::HarmDecoder);
    add_decoder(parse, ParamGroup::ParseDecoder);
    return out;
}

template <class T>
std::vector<std::vector<T>*> Network<T>::running_state() {
    std::vector<std::vector<T>*> out;
    for (auto& n : enc_norm) {
        out.push_back(&n.run_mean);
        out.push_back(&n.run_var);
    }
    for (auto* dec : {&harm, &parse}) {
        for (auto& n : dec->norm) {
            out.push_back(&n.run_mean);
            out.push_back(&n.run_var);
        }
    }
    return out;
}

template <class T>
Tensor<T> Network<T>::make_input(const Image& composite, const Mask& mask) {
    if (composite.width != mask.width || composite.height != mask.height) {
        fail(Status::DimensionMismatch, "make_input: image and mask must share dimensions");
    }
    const int h = composite.height, w = composite.width;
    Tensor<T> x({4, h, w});
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            for (int c = 0; c < 3; ++c) x.at(c, y, xx) = static_cast<T>(composite.at(y, xx, c));
            x.at(3, y, xx) = static_cast<T>(mask.at(y, xx));
        }
    }
    return x;
}

template <class T>
Image Network<T>::to_image(const Tensor<T>& t) {
    const int h = t.extent(1), w = t.extent(2);
    Image img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = static_cast<double>(t.at(c, y, x));
                img.at(y, x, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return img;
}

template <class T>
LabelMap Network<T>::argmax_labels(const Tensor<T>& logits) {
    const int C = logits.extent(0), h = logits.extent(1), w = logits.extent(2);
    LabelMap labels(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int best = 0;
            T best_v = logits.at(0, y, x);
            for (int c = 1; c < C; ++c) {
                const T v = logits.at(c, y, x);
                if (v > best_v) {
                    best_v = v;
                    best = c;
                }
            }
            labels.at(y, x) = static_cast<std::uint8_t>(best);
        }
    }
    return labels;
}

} // namespace dih
