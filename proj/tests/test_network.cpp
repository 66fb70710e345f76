#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dih/gradient_check.hpp"
#include "dih/layers.hpp"
#include "dih/losses.hpp"
#include "dih/network.hpp"
#include "dih/rng.hpp"
#include "dih/train.hpp"

using namespace dih;

namespace {

// Direct-summation convolution oracle (independent of the im2col path).
template <class T>
Tensor<T> naive_conv(const Tensor<T>& x, const std::vector<T>& W, const std::vector<T>& b,
                     int out_c, int k, int stride, int pad) {
    const int in_c = x.extent(0), H = x.extent(1), Wd = x.extent(2);
    const int OH = (H + 2 * pad - k) / stride + 1;
    const int OW = (Wd + 2 * pad - k) / stride + 1;
    Tensor<T> y({out_c, OH, OW});
    for (int oc = 0; oc < out_c; ++oc) {
        for (int oy = 0; oy < OH; ++oy) {
            for (int ox = 0; ox < OW; ++ox) {
                T acc = b[oc];
                for (int ic = 0; ic < in_c; ++ic) {
                    for (int ky = 0; ky < k; ++ky) {
                        for (int kx = 0; kx < k; ++kx) {
                            const int iy = oy * stride - pad + ky;
                            const int ix = ox * stride - pad + kx;
                            if (iy < 0 || iy >= H || ix < 0 || ix >= Wd) continue;
                            acc += W[((static_cast<size_t>(oc) * in_c + ic) * k + ky) * k + kx] *
                                   x.at(ic, iy, ix);
                        }
                    }
                }
                y.at(oc, oy, ox) = acc;
            }
        }
    }
    return y;
}

template <class T>
double dot(const Tensor<T>& a, const Tensor<T>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.numel(); ++i) acc += static_cast<double>(a.v[i]) * static_cast<double>(b.v[i]);
    return acc;
}

ArchConfig tiny_arch() {
    ArchConfig cfg;
    cfg.input_size = 8;
    cfg.encoder_channels = {6, 8};
    cfg.bottleneck_dim = 16;
    cfg.num_classes = 4;
    cfg.kernel_size = 4;
    cfg.stride = 2;
    return cfg;
}

} // namespace

TEST_CASE("conv2d basics") {
    SUBCASE("a 1x1 identity kernel passes the input through") {
        ConvLayer<double> conv;
        Rng rng(1);
        conv.init(1, 1, 1, 1, 0, rng);
        conv.W = {1.0};
        conv.b = {0.0};
        Tensor<double> x({1, 3, 3});
        for (size_t i = 0; i < x.numel(); ++i) x.v[i] = static_cast<double>(i) * 0.5;
        const Tensor<double> y = conv.forward(x);
        CHECK(y.v == x.v);
    }

    SUBCASE("all-ones 3x3 input and kernel give 9 at the center") {
        ConvLayer<double> conv;
        Rng rng(1);
        conv.init(1, 1, 3, 1, 1, rng);
        std::fill(conv.W.begin(), conv.W.end(), 1.0);
        conv.b = {0.0};
        Tensor<double> x({1, 3, 3});
        x.fill(1.0);
        const Tensor<double> y = conv.forward(x);
        CHECK(y.at(0, 1, 1) == doctest::Approx(9.0));
        CHECK(y.at(0, 0, 0) == doctest::Approx(4.0)); // corner sees a 2x2 window
    }

    SUBCASE("zero weights with bias give a constant image") {
        ConvLayer<double> conv;
        Rng rng(1);
        conv.init(2, 3, 3, 1, 1, rng);
        std::fill(conv.W.begin(), conv.W.end(), 0.0);
        conv.b = {0.5, -1.0, 2.0};
        Tensor<double> x({2, 4, 4});
        x.fill(0.7);
        const Tensor<double> y = conv.forward(x);
        for (int oy = 0; oy < 4; ++oy) {
            for (int ox = 0; ox < 4; ++ox) {
                CHECK(y.at(0, oy, ox) == doctest::Approx(0.5));
                CHECK(y.at(1, oy, ox) == doctest::Approx(-1.0));
                CHECK(y.at(2, oy, ox) == doctest::Approx(2.0));
            }
        }
    }

    SUBCASE("random convs match the direct-summation oracle") {
        Rng rng(42);
        for (int trial = 0; trial < 10; ++trial) {
            ConvLayer<double> conv;
            const int in_c = 1 + rng.uniform_int(3);
            const int out_c = 1 + rng.uniform_int(3);
            const int k = 1 + 2 * rng.uniform_int(2); // 1 or 3
            conv.init(in_c, out_c, k, 1, k / 2, rng);
            for (auto& b : conv.b) b = rng.uniform(-1.0, 1.0);
            Tensor<double> x({in_c, 5, 6});
            for (auto& v : x.v) v = rng.uniform(-1.0, 1.0);
            const Tensor<double> got = conv.forward(x);
            const Tensor<double> want = naive_conv(x, conv.W, conv.b, out_c, k, 1, k / 2);
            REQUIRE(got.shape == want.shape);
            for (size_t i = 0; i < got.numel(); ++i) {
                CHECK(got.v[i] == doctest::Approx(want.v[i]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("transposed conv is the exact adjoint of conv") {
    Rng rng(7);
    for (int trial = 0; trial < 8; ++trial) {
        const int in_c = 1 + rng.uniform_int(3);
        const int out_c = 1 + rng.uniform_int(3);
        const int k = 4, stride = 2, pad = 1;

        ConvLayer<double> conv;
        conv.init(in_c, out_c, k, stride, pad, rng);

        DeconvLayer<double> deconv;
        deconv.init(out_c, in_c, k, stride, pad, rng);
        deconv.W = conv.W; // same buffer layout: (co, ci, k, k) == (in_d, out_d, k, k)
        std::fill(deconv.b.begin(), deconv.b.end(), 0.0);

        Tensor<double> x({in_c, 8, 8});
        for (auto& v : x.v) v = rng.uniform(-1.0, 1.0);
        Tensor<double> y({out_c, 4, 4});
        for (auto& v : y.v) v = rng.uniform(-1.0, 1.0);

        // <conv(x), y> == <x, deconv(y)> for zero bias
        std::fill(conv.b.begin(), conv.b.end(), 0.0);
        const double lhs = dot(conv.forward(x), y);
        const double rhs = dot(x, deconv.forward(y));
        CHECK(std::fabs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("transposed conv shapes and zero cases") {
    Rng rng(3);
    DeconvLayer<double> deconv;
    deconv.init(2, 3, 4, 2, 1, rng);

    SUBCASE("stride-2 doubles an 8x8 input to 16x16") {
        Tensor<double> x({2, 8, 8});
        const Tensor<double> y = deconv.forward(x);
        CHECK(y.extent(0) == 3);
        CHECK(y.extent(1) == 16);
        CHECK(y.extent(2) == 16);
    }

    SUBCASE("zero input produces a bias-only output") {
        deconv.b = {0.25, -0.5, 1.5};
        Tensor<double> x({2, 8, 8});
        const Tensor<double> y = deconv.forward(x);
        for (int oy = 0; oy < 16; ++oy) {
            for (int ox = 0; ox < 16; ++ox) {
                CHECK(y.at(0, oy, ox) == doctest::Approx(0.25));
                CHECK(y.at(1, oy, ox) == doctest::Approx(-0.5));
                CHECK(y.at(2, oy, ox) == doctest::Approx(1.5));
            }
        }
    }
}

TEST_CASE("norm_act: ELU values and train-mode standardization") {
    CHECK(elu(0.0) == doctest::Approx(0.0));
    CHECK(elu(-1.0) == doctest::Approx(std::expm1(-1.0)).epsilon(1e-12)); // ~ -0.6321205588
    CHECK(elu(2.5) == doctest::Approx(2.5));
    CHECK(elu_grad(-1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    NormActLayer<double> norm;
    norm.init(3);
    Rng rng(19);
    Tensor<double> x({3, 16, 16});
    for (auto& v : x.v) v = rng.uniform(-2.0, 5.0);

    NormActCache<double> cache;
    norm.forward(x, RunMode::Train, &cache);
    // gamma=1, beta=0: the pre-activation is standardized per channel
    const int hw = 16 * 16;
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0, var = 0.0;
        for (int i = 0; i < hw; ++i) mean += cache.act_in[static_cast<size_t>(c) * hw + i];
        mean /= hw;
        for (int i = 0; i < hw; ++i) {
            const double d = cache.act_in[static_cast<size_t>(c) * hw + i] - mean;
            var += d * d;
        }
        var /= hw;
        CHECK(std::fabs(mean) < 1e-3);
        CHECK(std::fabs(var - 1.0) < 1e-3);
    }
}

TEST_CASE("network construction") {
    SUBCASE("identical seeds give parameter-identical networks") {
        const ArchConfig cfg = tiny_arch();
        Network<float> a(cfg, 11), b(cfg, 11), c(cfg, 12);
        auto pa = a.params(), pb = b.params(), pc = c.params();
        REQUIRE(pa.size() == pb.size());
        bool all_equal = true, any_diff_c = false;
        for (size_t i = 0; i < pa.size(); ++i) {
            if (*pa[i].value != *pb[i].value) all_equal = false;
            if (*pa[i].value != *pc[i].value) any_diff_c = true;
        }
        CHECK(all_equal);
        CHECK(any_diff_c);
    }

    SUBCASE("64x64 with two stride-2 layers bottoms out at 16x16") {
        ArchConfig cfg;
        cfg.input_size = 64;
        cfg.encoder_channels = {8, 8};
        cfg.bottleneck_dim = 32;
        CHECK(cfg.bottleneck_spatial() == 16);
    }

    SUBCASE("indivisible sizes are rejected") {
        ArchConfig cfg;
        cfg.input_size = 36; // 36/2=18, 18/2=9, 9/2 fails
        cfg.encoder_channels = {4, 4, 4};
        CHECK_THROWS_AS(cfg.validate(), Error);
    }

    SUBCASE("harmonization and parsing heads produce full-resolution outputs") {
        ArchConfig cfg;
        cfg.input_size = 64;
        cfg.encoder_channels = {8, 12, 16};
        cfg.bottleneck_dim = 64;
        cfg.num_classes = 25;
        Network<float> net(cfg, 5);
        Tensor<float> x({4, 64, 64});
        Rng rng(1);
        for (auto& v : x.v) v = static_cast<float>(rng.uniform());
        const JointOutput<float> out = net.forward(x, RunMode::Eval, nullptr);
        CHECK(out.harmonized.shape == std::vector<int>{3, 64, 64});
        CHECK(out.parsing_logits.shape == std::vector<int>{25, 64, 64});
    }
}

TEST_CASE("shape algebra holds over random valid configs") {
    Rng rng(23);
    for (int trial = 0; trial < 8; ++trial) {
        ArchConfig cfg;
        const int depth = 1 + rng.uniform_int(3);
        cfg.encoder_channels.clear();
        for (int i = 0; i < depth; ++i) cfg.encoder_channels.push_back(2 + rng.uniform_int(6));
        cfg.stride = 2;
        cfg.kernel_size = rng.uniform() < 0.5 ? 4 : 6;
        cfg.input_size = 8 << depth;
        cfg.bottleneck_dim = 4 + rng.uniform_int(28);
        cfg.num_classes = 2 + rng.uniform_int(23);
        cfg.validate();

        Network<double> net(cfg, 1000 + trial);
        Tensor<double> x({4, cfg.input_size, cfg.input_size});
        for (auto& v : x.v) v = rng.uniform();
        const JointOutput<double> out = net.forward(x, RunMode::Eval, nullptr);
        CHECK(out.harmonized.shape == std::vector<int>{3, cfg.input_size, cfg.input_size});
        CHECK(out.parsing_logits.shape ==
              std::vector<int>{cfg.num_classes, cfg.input_size, cfg.input_size});
    }
}

TEST_CASE("eval-mode forward is a pure function of parameters and input") {
    const ArchConfig cfg = tiny_arch();
    Network<float> net(cfg, 77);
    Tensor<float> x({4, 8, 8});
    Rng rng(2);
    for (auto& v : x.v) v = static_cast<float>(rng.uniform());
    const JointOutput<float> a = net.forward(x, RunMode::Eval, nullptr);
    const JointOutput<float> b = net.forward(x, RunMode::Eval, nullptr);
    CHECK(a.harmonized.v == b.harmonized.v);
    CHECK(a.parsing_logits.v == b.parsing_logits.v);
}

TEST_CASE("severing the cross-decoder links changes the harmonized output") {
    const ArchConfig cfg = tiny_arch();
    Network<float> net(cfg, 31);

    // brief training so the parsing features carry signal
    Rng rng(4);
    Tensor<float> x({4, 8, 8});
    for (auto& v : x.v) v = static_cast<float>(rng.uniform());
    Tensor<float> gt({3, 8, 8});
    for (auto& v : gt.v) v = static_cast<float>(rng.uniform());
    LabelMap labels(8, 8);
    for (auto& l : labels.data) l = static_cast<std::uint8_t>(rng.uniform_int(4));
    for (int it = 0; it < 5; ++it) {
        net.zero_grads();
        ForwardCache<float> cache;
        JointOutput<float> out = net.forward(x, RunMode::Train, &cache);
        CombinedLoss<float> loss =
            combined_loss(out.harmonized, out.parsing_logits, gt, &labels, 1.0, 100.0);
        net.backward(cache, loss.grad_harmonized, loss.grad_logits);
        sgd_step(net, 1e-4, false);
    }

    const JointOutput<float> joint = net.forward(x, RunMode::Eval, nullptr);
    net.cross_links = false;
    const JointOutput<float> severed = net.forward(x, RunMode::Eval, nullptr);
    net.cross_links = true;
    CHECK(joint.harmonized.v != severed.harmonized.v);
    // the parsing path does not depend on the cross links
    CHECK(joint.parsing_logits.v == severed.parsing_logits.v);
}

TEST_CASE("backward propagates nothing for zero upstream gradients") {
    const ArchConfig cfg = tiny_arch();
    Network<double> net(cfg, 13);
    Tensor<double> x({4, 8, 8});
    Rng rng(6);
    for (auto& v : x.v) v = rng.uniform();

    net.zero_grads();
    ForwardCache<double> cache;
    const JointOutput<double> out = net.forward(x, RunMode::Train, &cache);
    Tensor<double> zero_h(out.harmonized.shape);
    Tensor<double> zero_l(out.parsing_logits.shape);
    net.backward(cache, zero_h, zero_l);
    for (auto ref : net.params()) {
        for (double g : *ref.grad) CHECK(g == 0.0);
    }
}

TEST_CASE("layer backward accumulates into parameter gradients") {
    const ArchConfig cfg = tiny_arch();
    Network<double> net(cfg, 21);
    Tensor<double> x({4, 8, 8});
    Rng rng(8);
    for (auto& v : x.v) v = rng.uniform();

    net.zero_grads();
    ForwardCache<double> cache;
    net.forward(x, RunMode::Train, &cache);

    auto& dec = net.harm.deconv[0];
    const Tensor<double>& input = cache.harm.deconv_inputs[0];
    Tensor<double> gy({dec.out_c, dec.out_size(input.extent(1)), dec.out_size(input.extent(2))});
    for (auto& v : gy.v) v = rng.uniform(-1.0, 1.0);
    const Tensor<double> gin = dec.backward(input, gy);
    CHECK(gin.shape == input.shape);
    // backward through the same weights twice accumulates exactly 2x
    std::vector<double> gw_once = dec.gW;
    dec.backward(input, gy);
    for (size_t i = 0; i < gw_once.size(); ++i) {
        CHECK(dec.gW[i] == doctest::Approx(2.0 * gw_once[i]).epsilon(1e-12));
    }
}

TEST_CASE("freezing the parsing decoder stops its updates but keeps its features") {
    const ArchConfig cfg = tiny_arch();
    Network<float> net(cfg, 99);
    Tensor<float> x({4, 8, 8});
    Rng rng(10);
    for (auto& v : x.v) v = static_cast<float>(rng.uniform());
    Tensor<float> gt({3, 8, 8});
    for (auto& v : gt.v) v = static_cast<float>(rng.uniform());

    std::vector<std::vector<float>> parse_before;
    for (auto ref : net.params()) {
        if (ref.group == ParamGroup::ParseDecoder) parse_before.push_back(*ref.value);
    }

    net.zero_grads();
    ForwardCache<float> cache;
    JointOutput<float> out = net.forward(x, RunMode::Train, &cache);
    CombinedLoss<float> loss = combined_loss(out.harmonized, out.parsing_logits, gt,
                                             static_cast<const LabelMap*>(nullptr), 1.0, 0.0);
    net.backward(cache, loss.grad_harmonized, loss.grad_logits);
    sgd_step(net, 1e-2, /*freeze_parse_decoder=*/true);

    size_t idx = 0;
    for (auto ref : net.params()) {
        if (ref.group == ParamGroup::ParseDecoder) {
            CHECK(*ref.value == parse_before[idx]);
            ++idx;
        }
    }
    // encoder still learns (gradient flows through the frozen decoder's features)
    Network<float> fresh(cfg, 99);
    auto fresh_params = fresh.params();
    auto params = net.params();
    bool encoder_changed = false;
    for (size_t i = 0; i < params.size(); ++i) {
        if (params[i].group == ParamGroup::Encoder && *params[i].value != *fresh_params[i].value) {
            encoder_changed = true;
        }
    }
    CHECK(encoder_changed);
}

TEST_CASE("analytic gradients match central finite differences") {
    const GradientCheckResult res = run_standard_gradient_check(1e-5, 1, 200);
    CHECK(res.samples >= 200);
    CHECK(res.max_rel_error < 1e-4);
}

TEST_CASE("gradient check is deterministic given the seed") {
    const GradientCheckResult a = run_standard_gradient_check(1e-5, 3, 64);
    const GradientCheckResult b = run_standard_gradient_check(1e-5, 3, 64);
    CHECK(a.max_rel_error == b.max_rel_error);
}
