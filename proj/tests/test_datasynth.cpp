#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dih/color.hpp"
#include "dih/color_transfer.hpp"
#include "dih/error.hpp"
#include "dih/histogram.hpp"
#include "dih/pyramid.hpp"
#include "dih/rng.hpp"
#include "dih/synth.hpp"
#include "dih/toy_scene.hpp"

using namespace dih;

namespace {

// Brute-force histogram matching oracle: exact empirical quantile mapping
// (sort-based), no binning. Used to predict region statistics.
std::vector<double> oracle_quantile_match(const std::vector<double>& source,
                                          const std::vector<double>& reference) {
    std::vector<double> sorted_src = source;
    std::vector<double> sorted_ref = reference;
    std::sort(sorted_src.begin(), sorted_src.end());
    std::sort(sorted_ref.begin(), sorted_ref.end());
    std::vector<double> out(source.size());
    for (size_t i = 0; i < source.size(); ++i) {
        const auto it = std::lower_bound(sorted_src.begin(), sorted_src.end(), source[i]);
        const double q = static_cast<double>(it - sorted_src.begin()) /
                         static_cast<double>(sorted_src.size() - (sorted_src.size() > 1 ? 1 : 0));
        const size_t j = std::min(sorted_ref.size() - 1,
                                  static_cast<size_t>(q * static_cast<double>(sorted_ref.size() - 1) + 0.5));
        out[i] = sorted_ref[j];
    }
    return out;
}

double region_mean_b(const Image& img, const Mask& mask) {
    double sum = 0.0;
    size_t n = 0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (!mask.at(y, x)) continue;
            double L, a, b;
            srgb_to_lab(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2), L, a, b);
            sum += b;
            ++n;
        }
    }
    return sum / static_cast<double>(n);
}

} // namespace

TEST_CASE("self-matching yields an identity LUT within one bin width") {
    Rng rng(11);
    std::vector<double> values(4000);
    for (auto& v : values) v = rng.uniform();
    const Histogram h = build_histogram(values, 256, 0.0, 1.0);
    const TransferLUT lut = match_histograms(h, h);
    const double bin_width = 1.0 / 256.0;
    for (int i = 0; i < 256; ++i) {
        const double center = h.bin_center(i);
        CHECK(std::fabs(lut.values[i] - center) <= bin_width + 1e-12);
    }
}

TEST_CASE("matching a shifted uniform distribution recovers the closed-form shift") {
    // source uniform on [0, 0.5], reference uniform on [0.5, 1]:
    // F_s(x) = 2x, G_r^{-1}(u) = 0.5 + u/2, so the map is x -> x + 0.5.
    Histogram src(256, 0.0, 1.0), ref(256, 0.0, 1.0);
    for (int i = 0; i < 128; ++i) {
        src.counts[i] = 1.0;
        ref.counts[128 + i] = 1.0;
    }
    src.total = ref.total = 128.0;
    const TransferLUT lut = match_histograms(src, ref);
    const double bin_width = 1.0 / 256.0;
    for (int i = 0; i < 128; ++i) {
        const double x = src.bin_center(i);
        CHECK(std::fabs(lut.values[i] - (x + 0.5)) <= bin_width + 1e-12);
    }
}

TEST_CASE("a point-mass reference gives a constant LUT") {
    Rng rng(3);
    std::vector<double> values(500);
    for (auto& v : values) v = rng.uniform();
    const Histogram src = build_histogram(values, 256, 0.0, 1.0);
    Histogram ref(256, 0.0, 1.0);
    ref.add(0.625);
    const TransferLUT lut = match_histograms(src, ref);
    const double target = ref.bin_center(ref.bin_index(0.625));
    for (double v : lut.values) CHECK(v == doctest::Approx(target));
}

TEST_CASE("empty histograms are rejected") {
    Histogram empty(256, 0.0, 1.0);
    Histogram filled(256, 0.0, 1.0);
    filled.add(0.5);
    CHECK_THROWS_AS(match_histograms(empty, filled), Error);
    CHECK_THROWS_AS(match_histograms(filled, empty), Error);
}

TEST_CASE("transfer LUTs are monotone for random histogram pairs") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        Histogram a(64, 0.0, 1.0), b(64, 0.0, 1.0);
        const int na = 1 + rng.uniform_int(400);
        const int nb = 1 + rng.uniform_int(400);
        for (int i = 0; i < na; ++i) a.add(rng.uniform() * rng.uniform());
        for (int i = 0; i < nb; ++i) b.add(0.3 + 0.7 * rng.uniform());
        const TransferLUT lut = match_histograms(a, b);
        CHECK(lut.is_monotone());
    }
}

TEST_CASE("color transfer honors the strength blend and the mask") {
    const SceneConfig cfg{.width = 48, .height = 48, .num_classes = 4};
    const ToyScene target = generate_toy_scene(21, cfg);
    const ToyScene reference = generate_toy_scene(22, cfg);

    Mask tmask(48, 48);
    Mask rmask(48, 48);
    for (size_t i = 0; i < tmask.data.size(); ++i) {
        tmask.data[i] = target.labels.data[i] == 1 ? 1 : 0;
        rmask.data[i] = reference.labels.data[i] == 1 ? 1 : 0;
    }
    REQUIRE(tmask.foreground_count() > 0);
    REQUIRE(rmask.foreground_count() > 0);

    SUBCASE("strength 0 is the exact identity") {
        const Image out = color_transfer(target.image, tmask, reference.image, rmask, 0.0);
        CHECK(out.data == target.image.data);
    }

    SUBCASE("background pixels are bit-identical for any strength") {
        const Image out = color_transfer(target.image, tmask, reference.image, rmask, 1.0);
        for (int y = 0; y < 48; ++y) {
            for (int x = 0; x < 48; ++x) {
                if (tmask.at(y, x)) continue;
                for (int c = 0; c < 3; ++c) CHECK(out.at(y, x, c) == target.image.at(y, x, c));
            }
        }
    }

    SUBCASE("self-transfer is identity within 8-bit quantization") {
        const Image out = color_transfer(target.image, tmask, target.image, tmask, 1.0);
        float worst = 0.0f;
        for (size_t i = 0; i < out.data.size(); ++i) {
            worst = std::max(worst, std::fabs(out.data[i] - target.image.data[i]));
        }
        CHECK(worst <= 2.0f / 255.0f);
    }

    SUBCASE("empty regions are rejected") {
        Mask empty(48, 48, 0);
        CHECK_THROWS_AS(color_transfer(target.image, empty, reference.image, rmask, 1.0), Error);
        CHECK_THROWS_AS(color_transfer(target.image, tmask, reference.image, empty, 1.0), Error);
    }
}

TEST_CASE("full-strength transfer moves the region's color temperature to the reference's") {
    // noisy gray target region, blue-tinted reference region
    Image target(32, 32);
    Image reference(32, 32);
    Rng rng(5);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            for (int c = 0; c < 3; ++c) {
                target.at(y, x, c) = static_cast<float>(0.45 + 0.1 * rng.uniform());
            }
            reference.at(y, x, 0) = static_cast<float>(0.40 + 0.1 * rng.uniform());
            reference.at(y, x, 1) = static_cast<float>(0.50 + 0.1 * rng.uniform());
            reference.at(y, x, 2) = static_cast<float>(0.72 + 0.1 * rng.uniform());
        }
    }
    Mask full(32, 32, 1);

    const Image out = color_transfer(target, full, reference, full, 1.0);

    // oracle: exact quantile matching of the Lab-b values predicts the mean
    std::vector<double> src_b, ref_b;
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            double L, a, b;
            srgb_to_lab(target.at(y, x, 0), target.at(y, x, 1), target.at(y, x, 2), L, a, b);
            src_b.push_back(b);
            srgb_to_lab(reference.at(y, x, 0), reference.at(y, x, 1), reference.at(y, x, 2), L, a, b);
            ref_b.push_back(b);
        }
    }
    const auto matched = oracle_quantile_match(src_b, ref_b);
    const double oracle_mean = std::accumulate(matched.begin(), matched.end(), 0.0) / matched.size();
    const double ref_mean = std::accumulate(ref_b.begin(), ref_b.end(), 0.0) / ref_b.size();
    CHECK(std::fabs(oracle_mean - ref_mean) < 1.0); // the oracle lands on the region target

    const double out_mean = region_mean_b(out, full);
    CHECK(std::fabs(out_mean - ref_mean) < 1.0);
}

TEST_CASE("spatial pyramid histograms") {
    SUBCASE("levels 0 is the plain normalized histogram") {
        LabelMap labels(4, 4);
        labels.at(0, 0) = 1;
        labels.at(0, 1) = 1;
        labels.at(3, 3) = 2;
        const PyramidHistogram p = spatial_pyramid_histogram(labels, 0, 3);
        REQUIRE(p.cells.size() == 1);
        REQUIRE(p.cells[0].size() == 1);
        CHECK(p.weights[0] == doctest::Approx(1.0));
        CHECK(p.cells[0][0][0] == doctest::Approx(13.0 / 16.0));
        CHECK(p.cells[0][0][1] == doctest::Approx(2.0 / 16.0));
        CHECK(p.cells[0][0][2] == doctest::Approx(1.0 / 16.0));
    }

    SUBCASE("constant label maps produce point masses in every cell") {
        LabelMap labels(8, 8);
        for (auto& v : labels.data) v = 3;
        const PyramidHistogram p = spatial_pyramid_histogram(labels, 2, 5);
        for (const auto& level : p.cells) {
            for (const auto& cell : level) {
                CHECK(cell[3] == doctest::Approx(1.0));
            }
        }
    }

    SUBCASE("2x2 map at level 1 gives one point mass per cell") {
        LabelMap labels(2, 2);
        labels.at(0, 0) = 0;
        labels.at(0, 1) = 1;
        labels.at(1, 0) = 2;
        labels.at(1, 1) = 3;
        const PyramidHistogram p = spatial_pyramid_histogram(labels, 1, 4);
        REQUIRE(p.cells[1].size() == 4);
        CHECK(p.cells[1][0][0] == doctest::Approx(1.0));
        CHECK(p.cells[1][1][1] == doctest::Approx(1.0));
        CHECK(p.cells[1][2][2] == doctest::Approx(1.0));
        CHECK(p.cells[1][3][3] == doctest::Approx(1.0));
    }

    SUBCASE("level weights sum to one and cells are normalized") {
        Rng rng(17);
        for (int trial = 0; trial < 20; ++trial) {
            LabelMap labels(16, 16);
            for (auto& v : labels.data) v = static_cast<std::uint8_t>(rng.uniform_int(6));
            const int levels = rng.uniform_int(4);
            const PyramidHistogram p = spatial_pyramid_histogram(labels, levels, 6);
            double wsum = 0.0;
            for (double w : p.weights) wsum += w;
            CHECK(wsum == doctest::Approx(1.0));
            for (const auto& level : p.cells) {
                for (const auto& cell : level) {
                    const double s = std::accumulate(cell.begin(), cell.end(), 0.0);
                    CHECK((s == doctest::Approx(1.0) || s == doctest::Approx(0.0)));
                }
            }
        }
    }
}

TEST_CASE("pyramid retrieval") {
    const SceneConfig cfg{.width = 32, .height = 32, .num_classes = 4};
    const auto scene_a = generate_toy_scene(100, cfg);
    const auto scene_b = generate_toy_scene(101, cfg);
    const auto scene_c = generate_toy_scene(102, cfg);
    const auto pa = spatial_pyramid_histogram(scene_a.labels, 2, 4);
    const auto pb = spatial_pyramid_histogram(scene_b.labels, 2, 4);
    const auto pc = spatial_pyramid_histogram(scene_c.labels, 2, 4);

    SUBCASE("a query present in the corpus ranks first with distance zero") {
        const auto ranked = retrieve_reference(pa, {{0, pb}, {1, pa}, {2, pc}});
        CHECK(ranked.front() == 1);
        CHECK(pyramid_distance(pa, pa) == doctest::Approx(0.0));
    }

    SUBCASE("a corpus of one returns that id") {
        const auto ranked = retrieve_reference(pa, {{42, pb}});
        REQUIRE(ranked.size() == 1);
        CHECK(ranked[0] == 42);
    }

    SUBCASE("disjoint supports rank the matching map first") {
        LabelMap zeros(8, 8), ones(8, 8);
        for (auto& v : ones.data) v = 1;
        const auto p0 = spatial_pyramid_histogram(zeros, 1, 2);
        const auto p1 = spatial_pyramid_histogram(ones, 1, 2);
        const auto ranked = retrieve_reference(p0, {{7, p1}, {9, p0}});
        CHECK(ranked.front() == 9);
        CHECK(pyramid_distance(p0, p1) == doctest::Approx(1.0));
    }

    SUBCASE("the distance behaves like a metric on identical supports") {
        CHECK(pyramid_distance(pa, pb) == doctest::Approx(pyramid_distance(pb, pa)));
        CHECK(pyramid_distance(pa, pc) >= 0.0);
        CHECK(pyramid_distance(pb, pb) == doctest::Approx(0.0));
    }

    SUBCASE("mismatched shapes are rejected") {
        const auto p_shallow = spatial_pyramid_histogram(scene_a.labels, 1, 4);
        CHECK_THROWS_AS(pyramid_distance(pa, p_shallow), Error);
    }
}

TEST_CASE("toy scenes are deterministic and class-bounded") {
    const SceneConfig cfg{.width = 64, .height = 64, .num_classes = 4};
    const ToyScene a1 = generate_toy_scene(7, cfg);
    const ToyScene a2 = generate_toy_scene(7, cfg);
    CHECK(a1.image.data == a2.image.data);
    CHECK(a1.labels.data == a2.labels.data);

    const ToyScene b = generate_toy_scene(8, cfg);
    CHECK(a1.image.data != b.image.data);

    for (auto v : a1.labels.data) CHECK(v < 4);

    CHECK_THROWS_AS(generate_toy_scene(7, SceneConfig{.width = 64, .height = 64, .num_classes = 2}),
                    Error);
}

TEST_CASE("synthesized pairs satisfy the training-pair contract") {
    const SceneConfig cfg{.width = 48, .height = 48, .num_classes = 4};
    const ToyScene target = generate_toy_scene(31, cfg);
    const ToyScene reference = generate_toy_scene(32, cfg);
    Mask region(48, 48);
    Mask ref_region(48, 48);
    for (size_t i = 0; i < region.data.size(); ++i) {
        region.data[i] = target.labels.data[i] >= 2 ? 1 : 0;
        ref_region.data[i] = reference.labels.data[i] >= 2 ? 1 : 0;
    }
    REQUIRE(region.foreground_count() > 0);
    REQUIRE(ref_region.foreground_count() > 0);

    SUBCASE("strength 0 gives a degenerate pair") {
        const TrainingPair pair = synthesize_pair(target.image, region, reference.image, ref_region, 0.0);
        CHECK(pair.composite.data == pair.ground_truth.data);
    }

    SUBCASE("background is bit-exact at any strength") {
        const TrainingPair pair = synthesize_pair(target.image, region, reference.image, ref_region, 0.7);
        for (int y = 0; y < 48; ++y) {
            for (int x = 0; x < 48; ++x) {
                if (region.at(y, x)) continue;
                for (int c = 0; c < 3; ++c) {
                    CHECK(pair.composite.at(y, x, c) == pair.ground_truth.at(y, x, c));
                }
            }
        }
    }

    SUBCASE("full-strength transfer against a distinct reference changes the region") {
        const TrainingPair pair = synthesize_pair(target.image, region, reference.image, ref_region, 1.0);
        size_t changed = 0;
        for (int y = 0; y < 48; ++y) {
            for (int x = 0; x < 48; ++x) {
                if (!region.at(y, x)) continue;
                for (int c = 0; c < 3; ++c) {
                    if (pair.composite.at(y, x, c) != pair.ground_truth.at(y, x, c)) ++changed;
                }
            }
        }
        CHECK(changed > 0);
    }
}

TEST_CASE("the in-memory synth pipeline holds the pair invariant") {
    SynthConfig cfg;
    cfg.seed = 5;
    cfg.count = 6;
    cfg.size = 32;
    const auto pairs = synth_pairs(cfg);
    REQUIRE(pairs.size() == 6);
    for (const auto& pair : pairs) {
        CHECK(pair.has_labels);
        for (size_t i = 0; i < pair.mask.data.size(); ++i) {
            if (pair.mask.data[i]) continue;
            for (int c = 0; c < 3; ++c) {
                CHECK(pair.composite.data[i * 3 + c] == pair.ground_truth.data[i * 3 + c]);
            }
        }
    }
}
