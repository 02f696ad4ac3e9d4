#include <gtest/gtest.h>

#include <chrono>
#include <sstream>
#include <thread>

#include "blindsynth/metrics.hpp"
#include "support/metric_suite.hpp"

using namespace blindsynth;
using namespace blindsynth::metrics;
using suite::amt;
using suite::bin;

namespace {

BinaryMap random_binary(Xoshiro256& rng, int h, int w) {
    BinaryMap b(h, w);
    for (auto& v : b.values()) v = static_cast<std::uint8_t>(rng.below(2));
    return b;
}

BlindnessMap random_amount(Xoshiro256& rng, int h, int w) {
    BlindnessMap b(h, w);
    for (float& v : b.values()) v = static_cast<float>(rng.uniform());
    return b;
}

}  // namespace

TEST(MetricExamples, AllFrozenExamplesPass) {
    for (const auto& c : suite::metric_examples()) EXPECT_TRUE(c.ok) << c.name;
}

TEST(Fuse, ScalarExampleAndClamp) {
    const BlindnessMap f = fuse_maps(amt(1, 1, {0.5f}), amt(1, 1, {0.3f}), 0.8, 0.2, amt(1, 1, {1.0f}));
    EXPECT_NEAR(f.at(0, 0), 0.56, 1e-6);
    const BlindnessMap one(2, 2, 1, 1.0f);
    const BlindnessMap sum = fuse_maps(one, one, 1.0, 1.0, one);
    for (float v : sum.values()) EXPECT_EQ(v, 1.0f);
}

TEST(Fuse, Errors) {
    const BlindnessMap a(2, 2);
    EXPECT_THROW((void)fuse_maps(a, BlindnessMap(2, 3), 0.5, 0.5, a), SizeMismatchError);
    EXPECT_THROW((void)fuse_maps(a, a, 0.5, 0.5, BlindnessMap(3, 2)), SizeMismatchError);
    EXPECT_THROW((void)fuse_maps(a, a, 1.5, 0.5, a), std::invalid_argument);
    EXPECT_THROW((void)fuse_maps(a, a, 0.5, -0.1, a), std::invalid_argument);
}

TEST(Binarize, ExamplesAndErrors) {
    EXPECT_DOUBLE_EQ(binarization_threshold(amt(1, 2, {0.0f, 1.0f}), 0.455), 0.455);
    EXPECT_EQ(binarize(amt(1, 2, {0.2f, 0.9f})), bin(1, 2, {0, 1}));
    const BinaryMap c = binarize(BlindnessMap(4, 5, 1, 0.7f));
    for (auto v : c.values()) EXPECT_EQ(v, 0);
    EXPECT_THROW((void)binarize(BlindnessMap()), std::invalid_argument);
    // alpha = 0 puts tau at v_min: everything above the minimum is blind.
    EXPECT_EQ(binarize(amt(1, 3, {0.1f, 0.1f, 0.2f}), 0.0), bin(1, 3, {0, 0, 1}));
}

TEST(Binarize, AffineInvarianceOnThousandMaps) {
    EXPECT_EQ(suite::affine_invariance_failures(1000, 12345), 0);
}

TEST(Binarize, AgreesWithThresholdFormula) {
    Xoshiro256 rng(3);
    for (int k = 0; k < 200; ++k) {
        const BlindnessMap m = random_amount(rng, 6, 7);
        const double tau = binarization_threshold(m);
        const BinaryMap b = binarize(m);
        for (std::size_t i = 0; i < b.values().size(); ++i) {
            ASSERT_EQ(b.values()[i], m.values()[i] > tau ? 1 : 0);
        }
    }
}

TEST(Accuracy, ComplementSumsToOne) {
    Xoshiro256 rng(4);
    for (int k = 0; k < 200; ++k) {
        const BinaryMap b = random_binary(rng, 5, 6);
        const BinaryMap g = random_binary(rng, 5, 6);
        EXPECT_DOUBLE_EQ(accuracy(b, g) + accuracy(complement(b), g), 1.0);
    }
}

TEST(Metrics, SymmetricUnderJointComplement) {
    Xoshiro256 rng(5);
    for (int k = 0; k < 200; ++k) {
        const BinaryMap b = random_binary(rng, 4, 4);
        const BinaryMap g = random_binary(rng, 4, 4);
        EXPECT_EQ(accuracy(b, g), accuracy(complement(b), complement(g)));
        EXPECT_EQ(miou(b, g), miou(complement(b), complement(g)));
    }
}

TEST(Metrics, RangesAndMseBelowMae) {
    Xoshiro256 rng(6);
    for (int k = 0; k < 300; ++k) {
        const int h = 1 + static_cast<int>(rng.below(6));
        const int w = 1 + static_cast<int>(rng.below(6));
        const BinaryMap b = random_binary(rng, h, w);
        const BinaryMap g = random_binary(rng, h, w);
        for (double v : {accuracy(b, g), miou(b, g), f_measure(b, g)}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        const auto e = mae_mse(random_amount(rng, h, w), random_amount(rng, h, w));
        EXPECT_LE(e.mse, e.mae);
        EXPECT_GE(e.mse, 0.0);
        EXPECT_LE(e.mae, 1.0);
    }
}

TEST(Metrics, MiouAndFMatchBruteForce) {
    Xoshiro256 rng(7);
    for (int k = 0; k < 300; ++k) {
        const BinaryMap b = random_binary(rng, 3, 5);
        const BinaryMap g = random_binary(rng, 3, 5);
        double inter[2] = {0, 0}, uni[2] = {0, 0}, tp = 0, pred = 0, pos = 0;
        for (std::size_t i = 0; i < b.values().size(); ++i) {
            for (int c = 0; c < 2; ++c) {
                const bool in_b = b.values()[i] == (c == 0 ? 1 : 0);
                const bool in_g = g.values()[i] == (c == 0 ? 1 : 0);
                inter[c] += in_b && in_g;
                uni[c] += in_b || in_g;
            }
            tp += b.values()[i] && g.values()[i];
            pred += b.values()[i];
            pos += g.values()[i];
        }
        const double expect_miou = 0.5 * ((uni[0] ? inter[0] / uni[0] : 1.0) + (uni[1] ? inter[1] / uni[1] : 1.0));
        EXPECT_NEAR(miou(b, g), expect_miou, 1e-12);
        if (pred > 0 && pos > 0 && tp > 0) {
            const double p = tp / pred, r = tp / pos;
            EXPECT_NEAR(f_measure(b, g), 2 * p * r / (p + r), 1e-12);
        }
    }
}

TEST(FMeasure, VerbatimFormAwayFromOne) {
    // P = 2/3, R = 1/2, beta = 2: (1 + 2) P R / (4 P + R).
    const BinaryMap gt = bin(2, 4, {1, 1, 1, 1, 0, 0, 0, 0});
    const BinaryMap b = bin(2, 4, {1, 1, 0, 0, 1, 0, 0, 0});
    const double p = 2.0 / 3.0, r = 0.5;
    EXPECT_NEAR(f_measure(b, gt, 2.0), 3 * p * r / (4 * p + r), 1e-12);
}

TEST(Metrics, SizeMismatch) {
    EXPECT_THROW((void)accuracy(BinaryMap(2, 2), BinaryMap(2, 3)), SizeMismatchError);
    EXPECT_THROW((void)miou(BinaryMap(2, 2), BinaryMap(3, 2)), SizeMismatchError);
    EXPECT_THROW((void)f_measure(BinaryMap(2, 2), BinaryMap(1, 2)), SizeMismatchError);
    EXPECT_THROW((void)mae_mse(BlindnessMap(2, 2), BlindnessMap(1, 2)), SizeMismatchError);
    EXPECT_THROW((void)accuracy_variance(std::vector<double>{}), std::invalid_argument);
}

TEST(MeasureFps, SleepingProcess) {
    const std::vector<int> frames(25, 0);
    const double fps =
        measure_fps([](int) { std::this_thread::sleep_for(std::chrono::milliseconds(10)); }, frames);
    EXPECT_GE(fps, 90.0);
    EXPECT_LE(fps, 110.0);
}

TEST(MeasureFps, DoublingWorkHalvesFps) {
    auto busy = [](int units) {
        return [units](int) {
            volatile double acc = 0.0;
            for (int i = 0; i < units * 200000; ++i) acc = acc + 1e-9 * i;
        };
    };
    const std::vector<int> frames(20, 0);
    auto best = [&](auto fn) {
        double b = 0.0;
        for (int r = 0; r < 3; ++r) b = std::max(b, measure_fps(fn, frames));
        return b;
    };
    const double one = best(busy(1));
    const double two = best(busy(2));
    EXPECT_GE(two, 0.8 * one / 2.0);
    EXPECT_LE(two, 1.2 * one / 2.0);
}

TEST(MeasureFps, IdentityIsFastAndWarmupIsUntimed) {
    const std::vector<BlindnessMap> frames(50, BlindnessMap(2, 2));
    EXPECT_GT(measure_fps([](const BlindnessMap& m) { (void)m; }, frames), 1000.0);
    int calls = 0;
    const std::vector<int> ten(10, 0);
    const double fps = measure_fps(
        [&](int) {
            if (calls++ < 5) std::this_thread::sleep_for(std::chrono::milliseconds(50));
        },
        ten);
    EXPECT_EQ(calls, 10);
    EXPECT_GT(fps, 1000.0);
    EXPECT_THROW((void)measure_fps([](int) {}, std::vector<int>(9, 0)), std::invalid_argument);
}

TEST(Report, AccumulatorMeansAndVariance) {
    ReportAccumulator acc;
    acc.add({0.8, 0.5, 0.6, 0.1, 0.02});
    acc.add({0.9, 0.7, 0.6, 0.2, 0.04});
    acc.add({1.0, 0.9, 0.9, 0.3, 0.09});
    acc.add_classification(true);
    acc.add_classification(false);
    const EvalReport r = acc.report(42.0);
    EXPECT_EQ(r.n_samples, 3u);
    EXPECT_NEAR(r.accuracy, 0.9, 1e-12);
    EXPECT_NEAR(r.accuracy_variance, 0.02 / 3.0, 1e-12);
    EXPECT_NEAR(r.miou, 0.7, 1e-12);
    EXPECT_NEAR(r.f_measure, 0.7, 1e-12);
    EXPECT_NEAR(r.mae, 0.2, 1e-12);
    EXPECT_NEAR(r.mse, 0.05, 1e-12);
    EXPECT_EQ(r.fps, 42.0);
    EXPECT_EQ(r.classification_accuracy, 0.5);
}

TEST(Report, PerfectPredictionScoresOne) {
    const BlindnessMap gt = amt(2, 2, {0.0f, 0.2f, 0.7f, 1.0f});
    const ImageScore s = score_image(gt, gt);
    EXPECT_EQ(s.accuracy, 1.0);
    EXPECT_EQ(s.miou, 1.0);
    EXPECT_EQ(s.f_measure, 1.0);
    EXPECT_EQ(s.mae, 0.0);
    EXPECT_EQ(s.mse, 0.0);
    // All-clear ground truth and prediction.
    const ImageScore z = score_image(BlindnessMap(3, 3), BlindnessMap(3, 3));
    EXPECT_EQ(z.accuracy, 1.0);
    EXPECT_EQ(z.miou, 1.0);
    EXPECT_EQ(z.f_measure, 1.0);
}

TEST(Report, JsonFieldNamesAndRoundTrip) {
    EvalReport r;
    r.accuracy = 0.9;
    r.accuracy_variance = 0.01;
    r.f_measure = 0.8;
    r.miou = 0.7;
    r.mae = 0.1;
    r.mse = 0.02;
    r.fps = 120.5;
    r.classification_accuracy = 1.0;
    r.n_samples = 17;
    const nlohmann::json j = r;
    for (const char* k : {"accuracy", "accuracy_variance", "f_measure", "miou", "mae", "mse", "fps",
                          "classification_accuracy", "n_samples"}) {
        EXPECT_TRUE(j.contains(k)) << k;
    }
    EXPECT_EQ(j.size(), 9u);
    const EvalReport back = j.get<EvalReport>();
    EXPECT_EQ(nlohmann::json(back), j);
}

TEST(PrCurveTest, CsvShapeAndMonotoneRecall) {
    Xoshiro256 rng(8);
    PrCurve curve;
    for (int k = 0; k < 5; ++k) curve.add(random_amount(rng, 8, 8), random_amount(rng, 8, 8));
    const auto pts = curve.points();
    ASSERT_EQ(pts.size(), 256u);
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LE(pts[i].recall, pts[i - 1].recall);
    std::ostringstream os;
    curve.write_csv(os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "threshold,precision,recall");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 256);
}

TEST(PrCurveTest, PerfectPredictionHasUnitPrecisionAboveTau) {
    // Prediction equal to a {0,1} ground truth: every threshold below 1 is
    // perfect.
    const BlindnessMap gt = amt(2, 2, {0.0f, 1.0f, 1.0f, 0.0f});
    PrCurve curve;
    curve.add(gt, gt);
    const auto pts = curve.points();
    for (int t = 0; t < 255; ++t) {
        EXPECT_EQ(pts[t].precision, 1.0);
        EXPECT_EQ(pts[t].recall, 1.0);
    }
}
