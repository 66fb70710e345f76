#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <zlib.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dih/checkpoint.hpp"
#include "dih/losses.hpp"
#include "dih/rng.hpp"
#include "dih/synth.hpp"
#include "dih/train.hpp"

using namespace dih;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "dih_training_test";
    fs::create_directories(dir);
    return dir;
}

ArchConfig tiny_arch() {
    ArchConfig cfg;
    cfg.input_size = 16;
    cfg.encoder_channels = {6, 8};
    cfg.bottleneck_dim = 24;
    cfg.num_classes = 4;
    return cfg;
}

std::vector<TrainingPair> tiny_pairs(int count, int size) {
    SynthConfig cfg;
    cfg.seed = 77;
    cfg.count = count;
    cfg.size = size;
    return synth_pairs(cfg);
}

bool params_equal(Network<float>& a, Network<float>& b) {
    auto pa = a.params();
    auto pb = b.params();
    if (pa.size() != pb.size()) return false;
    for (size_t i = 0; i < pa.size(); ++i) {
        if (*pa[i].value != *pb[i].value) return false;
    }
    return true;
}

std::string file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("reconstruction loss") {
    SUBCASE("zero at the minimum with zero gradient") {
        Tensor<double> y({3, 2, 2});
        for (size_t i = 0; i < y.numel(); ++i) y.v[i] = 0.1 * static_cast<double>(i);
        const LossResult<double> res = reconstruction_loss(y, y);
        CHECK(res.value == 0.0);
        for (double g : res.grad.v) CHECK(g == 0.0);
    }

    SUBCASE("single-element case: 1/2 * 1^2") {
        Tensor<double> pred({1, 1, 1});
        Tensor<double> target({1, 1, 1});
        pred.v[0] = 1.0;
        target.v[0] = 0.0;
        const LossResult<double> res = reconstruction_loss(pred, target);
        CHECK(res.value == doctest::Approx(0.5));
        CHECK(res.grad.v[0] == doctest::Approx(1.0));
    }

    SUBCASE("random tensors match the elementwise oracle to 1e-10") {
        Rng rng(15);
        Tensor<double> pred({3, 4, 4});
        Tensor<double> target({3, 4, 4});
        for (auto& v : pred.v) v = rng.uniform();
        for (auto& v : target.v) v = rng.uniform();
        const LossResult<double> res = reconstruction_loss(pred, target);
        double expected = 0.0;
        for (size_t i = 0; i < pred.numel(); ++i) {
            expected += 0.5 * (pred.v[i] - target.v[i]) * (pred.v[i] - target.v[i]);
        }
        CHECK(std::fabs(res.value - expected) < 1e-10);
    }

    SUBCASE("positive whenever the prediction differs") {
        Rng rng(8);
        Tensor<double> pred({3, 3, 3});
        for (auto& v : pred.v) v = rng.uniform();
        Tensor<double> target = pred;
        target.v[5] += 1e-6;
        CHECK(reconstruction_loss(pred, target).value > 0.0);
    }

    SUBCASE("shape mismatch is rejected") {
        Tensor<double> a({3, 2, 2}), b({3, 2, 3});
        CHECK_THROWS_AS(reconstruction_loss(a, b), Error);
    }
}

TEST_CASE("parsing loss") {
    SUBCASE("uniform logits cost ln(C) per pixel") {
        Tensor<double> logits({25, 1, 1});
        logits.fill(0.37); // any constant
        LabelMap labels(1, 1);
        labels.at(0, 0) = 13;
        const LossResult<double> res = parsing_loss(logits, labels);
        CHECK(res.value == doctest::Approx(std::log(25.0)).epsilon(1e-12)); // ~3.21888
    }

    SUBCASE("loss decreases monotonically as the true logit grows") {
        LabelMap labels(1, 1);
        labels.at(0, 0) = 1;
        double prev = 1e18;
        for (double z : {0.0, 1.0, 2.0, 4.0, 8.0, 16.0}) {
            Tensor<double> logits({3, 1, 1});
            logits.v = {0.0, z, 0.0};
            const double value = parsing_loss(logits, labels).value;
            CHECK(value < prev);
            prev = value;
        }
        CHECK(prev < 1e-6); // approaches zero in the limit
    }

    SUBCASE("per-pixel gradients sum to zero across classes") {
        Rng rng(31);
        Tensor<double> logits({6, 3, 3});
        for (auto& v : logits.v) v = rng.uniform(-3.0, 3.0);
        LabelMap labels(3, 3);
        for (auto& l : labels.data) l = static_cast<std::uint8_t>(rng.uniform_int(6));
        const LossResult<double> res = parsing_loss(logits, labels);
        for (int y = 0; y < 3; ++y) {
            for (int x = 0; x < 3; ++x) {
                double sum = 0.0;
                for (int c = 0; c < 6; ++c) sum += res.grad.at(c, y, x);
                CHECK(std::fabs(sum) < 1e-12);
            }
        }
    }

    SUBCASE("out-of-range labels are rejected") {
        Tensor<double> logits({3, 1, 1});
        LabelMap labels(1, 1);
        labels.at(0, 0) = 3;
        CHECK_THROWS_AS(parsing_loss(logits, labels), Error);
    }
}

TEST_CASE("combined loss composes the weighted parts") {
    Rng rng(5);
    Tensor<double> harm({3, 4, 4}), gt({3, 4, 4});
    Tensor<double> logits({4, 4, 4});
    for (auto& v : harm.v) v = rng.uniform();
    for (auto& v : gt.v) v = rng.uniform();
    for (auto& v : logits.v) v = rng.uniform(-2.0, 2.0);
    LabelMap labels(4, 4);
    for (auto& l : labels.data) l = static_cast<std::uint8_t>(rng.uniform_int(4));

    SUBCASE("lambda2 = 0 equals the reconstruction loss exactly") {
        const CombinedLoss<double> res = combined_loss(harm, logits, gt, &labels, 1.0, 0.0);
        CHECK(res.value == reconstruction_loss(harm, gt).value);
        for (double g : res.grad_logits.v) CHECK(g == 0.0);
    }

    SUBCASE("lambda1 = 0 equals lambda2 times the parsing loss exactly") {
        const CombinedLoss<double> res = combined_loss(harm, logits, gt, &labels, 0.0, 100.0);
        CHECK(res.value == doctest::Approx(100.0 * parsing_loss(logits, labels).value).epsilon(1e-12));
        for (double g : res.grad_harmonized.v) CHECK(g == 0.0);
    }

    SUBCASE("default weights compose the two oracles") {
        const CombinedLoss<double> res = combined_loss(harm, logits, gt, &labels, 1.0, 100.0);
        const double expected =
            1.0 * reconstruction_loss(harm, gt).value + 100.0 * parsing_loss(logits, labels).value;
        CHECK(res.value == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("linear in the lambda weights for fixed outputs") {
        const double mixed = combined_loss(harm, logits, gt, &labels, 2.0, 3.0).value;
        const double rec_only = combined_loss(harm, logits, gt, &labels, 1.0, 0.0).value;
        const double cro_only = combined_loss(harm, logits, gt, &labels, 0.0, 1.0).value;
        CHECK(mixed == doctest::Approx(2.0 * rec_only + 3.0 * cro_only).epsilon(1e-12));
    }

    SUBCASE("missing labels with lambda2 > 0 are rejected") {
        CHECK_THROWS_AS(
            combined_loss(harm, logits, gt, static_cast<const LabelMap*>(nullptr), 1.0, 100.0), Error);
    }
}

TEST_CASE("sgd steps") {
    const ArchConfig cfg = tiny_arch();

    SUBCASE("learning rate zero leaves parameters unchanged") {
        Network<float> net(cfg, 4);
        Network<float> copy = net;
        for (auto ref : net.params()) {
            for (auto& g : *ref.grad) g = 1.0f;
        }
        sgd_step(net, 0.0, false);
        CHECK(params_equal(net, copy));
    }

    SUBCASE("p=1, g=2, lr=0.1 gives 0.8") {
        Network<float> net(cfg, 4);
        auto refs = net.params();
        (*refs[0].value)[0] = 1.0f;
        (*refs[0].grad)[0] = 2.0f;
        sgd_step(net, 0.1, false);
        CHECK((*net.params()[0].value)[0] == doctest::Approx(0.8f));
    }

    SUBCASE("a frozen parsing decoder is bit-identical after the step") {
        Network<float> net(cfg, 4);
        std::vector<std::vector<float>> before;
        for (auto ref : net.params()) {
            if (ref.group == ParamGroup::ParseDecoder) before.push_back(*ref.value);
            for (auto& g : *ref.grad) g = 0.5f;
        }
        sgd_step(net, 0.1, true);
        size_t idx = 0;
        for (auto ref : net.params()) {
            if (ref.group == ParamGroup::ParseDecoder) {
                CHECK(*ref.value == before[idx]);
                ++idx;
            }
        }
    }
}

TEST_CASE("a single small sgd step does not increase the loss (statistically)") {
    // 100 random nets at lr 1e-4; curvature may cause a rare increase.
    const ArchConfig cfg = tiny_arch();
    Rng rng(2024);
    int violations = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        Network<float> net(cfg, 5000 + t);
        Tensor<float> x({4, 16, 16});
        for (auto& v : x.v) v = static_cast<float>(rng.uniform());
        Tensor<float> gt({3, 16, 16});
        for (auto& v : gt.v) v = static_cast<float>(rng.uniform());
        LabelMap labels(16, 16);
        for (auto& l : labels.data) l = static_cast<std::uint8_t>(rng.uniform_int(4));

        net.zero_grads();
        ForwardCache<float> cache;
        JointOutput<float> out = net.forward(x, RunMode::Train, &cache);
        const CombinedLoss<float> before =
            combined_loss(out.harmonized, out.parsing_logits, gt, &labels, 1.0, 100.0);
        net.backward(cache, before.grad_harmonized, before.grad_logits);
        sgd_step(net, 1e-4, false);

        JointOutput<float> out2 = net.forward(x, RunMode::Train, nullptr);
        const CombinedLoss<float> after =
            combined_loss(out2.harmonized, out2.parsing_logits, gt, &labels, 1.0, 100.0);
        if (after.value > before.value) ++violations;
    }
    CHECK(violations <= 2);
}

TEST_CASE("training runs the two-stage schedule") {
    const auto pairs = tiny_pairs(4, 16);
    const ArchConfig arch = tiny_arch();

    TrainConfig cfg;
    cfg.seed = 9;
    cfg.learning_rate = 5e-4;
    cfg.batch_size = 2;

    SUBCASE("combined loss decreases on 50-iteration window averages") {
        cfg.iters_stage1 = 200;
        cfg.iters_stage2 = 0;
        std::ostringstream log;
        train(pairs, pairs, cfg, arch, &log);
        std::istringstream in(log.str());
        std::string line;
        std::vector<double> combined;
        while (std::getline(in, line)) {
            const size_t last = line.rfind(',');
            combined.push_back(std::stod(line.substr(last + 1)));
        }
        REQUIRE(combined.size() == 200);
        auto window = [&](int lo) {
            double s = 0.0;
            for (int i = lo; i < lo + 50; ++i) s += combined[static_cast<size_t>(i)];
            return s / 50.0;
        };
        CHECK(window(50) < window(0));
        CHECK(window(100) < window(50));
        CHECK(window(150) < window(100));
    }

    SUBCASE("stage 2 with zero iterations leaves the parsing decoder at the stage-1 result") {
        cfg.iters_stage1 = 8;
        cfg.iters_stage2 = 0;
        TrainedModel stage1;
        TrainedModel final = train(pairs, pairs, cfg, arch, nullptr, &stage1);
        auto pf = final.net.params();
        auto ps = stage1.net.params();
        for (size_t i = 0; i < pf.size(); ++i) {
            if (pf[i].group == ParamGroup::ParseDecoder) CHECK(*pf[i].value == *ps[i].value);
        }
    }

    SUBCASE("the parsing decoder stays constant across all of stage 2") {
        cfg.iters_stage1 = 8;
        cfg.iters_stage2 = 12;
        TrainedModel stage1;
        TrainedModel final = train(pairs, pairs, cfg, arch, nullptr, &stage1);
        auto pf = final.net.params();
        auto ps = stage1.net.params();
        bool harm_changed = false;
        for (size_t i = 0; i < pf.size(); ++i) {
            if (pf[i].group == ParamGroup::ParseDecoder) {
                CHECK(*pf[i].value == *ps[i].value);
            } else if (pf[i].group == ParamGroup::HarmDecoder && *pf[i].value != *ps[i].value) {
                harm_changed = true;
            }
        }
        CHECK(harm_changed);
    }

    SUBCASE("identical seeds and data give identical checkpoints") {
        cfg.iters_stage1 = 10;
        cfg.iters_stage2 = 5;
        const TrainedModel a = train(pairs, pairs, cfg, arch);
        const TrainedModel b = train(pairs, pairs, cfg, arch);
        const auto dir = temp_dir();
        save_checkpoint(a, (dir / "a.ckpt").string());
        save_checkpoint(b, (dir / "b.ckpt").string());
        CHECK(file_bytes(dir / "a.ckpt") == file_bytes(dir / "b.ckpt"));
    }

    SUBCASE("stage 1 without labels is rejected") {
        std::vector<TrainingPair> no_labels = pairs;
        for (auto& p : no_labels) p.has_labels = false;
        cfg.iters_stage1 = 2;
        cfg.iters_stage2 = 0;
        try {
            train(no_labels, no_labels, cfg, arch);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.status() == Status::BadManifest);
        }
    }
}

TEST_CASE("checkpoint round trips") {
    const auto pairs = tiny_pairs(2, 16);
    const ArchConfig arch = tiny_arch();
    TrainConfig cfg;
    cfg.seed = 3;
    cfg.iters_stage1 = 4;
    cfg.iters_stage2 = 0;
    cfg.batch_size = 2;
    TrainedModel model = train(pairs, pairs, cfg, arch);

    const auto dir = temp_dir();
    const auto path = (dir / "model.ckpt").string();
    save_checkpoint(model, path);

    SUBCASE("save -> load -> save is byte-identical") {
        TrainedModel loaded = load_checkpoint(path);
        const auto path2 = (dir / "model2.ckpt").string();
        save_checkpoint(loaded, path2);
        CHECK(file_bytes(path) == file_bytes(path2));
    }

    SUBCASE("round trip reproduces eval-mode outputs bit-identically") {
        TrainedModel loaded = load_checkpoint(path);
        Rng rng(12);
        Tensor<float> x({4, 16, 16});
        for (auto& v : x.v) v = static_cast<float>(rng.uniform());
        const JointOutput<float> a = model.net.forward(x, RunMode::Eval, nullptr);
        const JointOutput<float> b = loaded.net.forward(x, RunMode::Eval, nullptr);
        CHECK(a.harmonized.v == b.harmonized.v);
        CHECK(a.parsing_logits.v == b.parsing_logits.v);
    }

    SUBCASE("truncated files fail the checksum") {
        std::string bytes = file_bytes(path);
        bytes.resize(bytes.size() - 5);
        const auto tpath = (dir / "truncated.ckpt").string();
        std::ofstream out(tpath, std::ios::binary);
        out << bytes;
        out.close();
        try {
            load_checkpoint(tpath);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.status() == Status::ChecksumMismatch);
        }
    }

    SUBCASE("a wrong version byte is a version error, not a crash") {
        std::string bytes = file_bytes(path);
        bytes[4] = 9; // version field follows the magic
        // re-stamp the trailing checksum so only the version is wrong
        const std::uint32_t crc = static_cast<std::uint32_t>(
            crc32(0UL, reinterpret_cast<const Bytef*>(bytes.data()),
                  static_cast<uInt>(bytes.size() - 4)));
        bytes[bytes.size() - 4] = static_cast<char>(crc & 0xff);
        bytes[bytes.size() - 3] = static_cast<char>((crc >> 8) & 0xff);
        bytes[bytes.size() - 2] = static_cast<char>((crc >> 16) & 0xff);
        bytes[bytes.size() - 1] = static_cast<char>((crc >> 24) & 0xff);
        const auto vpath = (dir / "badversion.ckpt").string();
        std::ofstream out(vpath, std::ios::binary);
        out << bytes;
        out.close();
        try {
            load_checkpoint(vpath);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.status() == Status::VersionMismatch);
        }
    }
}
