#include <gtest/gtest.h>

#include <cmath>

#include "blindsynth/core/random.hpp"
#include "blindsynth/guided_filter.hpp"
#include "blindsynth/haze.hpp"
#include "blindsynth/synthetic.hpp"
#include "support/oracles.hpp"

using namespace blindsynth;
using namespace blindsynth::haze;

namespace {

DepthMap constant_depth(int h, int w, float d) {
    DepthMap m(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) m.set(y, x, d);
    }
    return m;
}

RasterImage random_image(int h, int w, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    RasterImage img(h, w, 3);
    for (float& v : img.values()) v = static_cast<float>(rng.uniform());
    return img;
}

}  // namespace

TEST(Transmission, ScalarExamples) {
    EXPECT_EQ(transmission(0.0, 1.3), 1.0);
    EXPECT_NEAR(transmission(2.0, 0.5), 0.367879, 1e-6);
    EXPECT_LT(transmission(25.0, 2.0), 1e-20);
}

TEST(Transmission, MapMatchesScalarAndIsMonotone) {
    const auto f = synthetic::render_toy_frame({.height = 20, .width = 30, .seed = 2}, 0);
    const BlindnessMap t = transmission_from_depth(f.depth, 0.04);
    std::vector<std::pair<float, float>> dt;
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 30; ++x) {
            EXPECT_FLOAT_EQ(t.at(y, x), static_cast<float>(std::exp(-0.04 * f.depth.depth(y, x))));
            EXPECT_GT(t.at(y, x), 0.0f);
            EXPECT_LE(t.at(y, x), 1.0f);
            dt.emplace_back(f.depth.depth(y, x), t.at(y, x));
        }
    }
    std::sort(dt.begin(), dt.end());
    for (std::size_t i = 1; i < dt.size(); ++i) EXPECT_LE(dt[i].second, dt[i - 1].second);
}

TEST(Transmission, RejectsSparseDepthAndBadBeta) {
    DepthMap d(2, 2);
    d.set(0, 0, 1.0f);
    EXPECT_THROW((void)transmission_from_depth(d, 1.0), std::invalid_argument);
    EXPECT_THROW((void)transmission_from_depth(constant_depth(2, 2, 1.0f), 0.0), std::invalid_argument);
}

TEST(HazeGroundTruth, Examples) {
    BlindnessMap t(1, 3, 1, std::vector<float>{1.0f, 0.0f, 0.367879f});
    const BlindnessMap g = haze_ground_truth(t);
    EXPECT_EQ(g.at(0, 0), 0.0f);
    EXPECT_EQ(g.at(0, 1), 1.0f);
    EXPECT_NEAR(g.at(0, 2), 0.632121, 1e-6);
    const BlindnessMap back = haze_ground_truth(g);
    for (int x = 0; x < 3; ++x) EXPECT_NEAR(back.at(0, x), t.at(0, x), 1e-7);
}

TEST(SynthesizeHaze, Examples) {
    const RasterImage J = random_image(4, 5, 3);
    const AtmosphericLight A{{0.9f, 0.85f, 0.8f}};
    EXPECT_EQ(synthesize_haze(J, BlindnessMap(4, 5, 1, 1.0f), A), J);
    const RasterImage all_a = synthesize_haze(J, BlindnessMap(4, 5, 1, 0.0f), A);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 5; ++x) {
            for (int c = 0; c < 3; ++c) EXPECT_EQ(all_a.at(y, x, c), A.rgb[c]);
        }
    }
    const RasterImage one = synthesize_haze(RasterImage(1, 1, 3, 0.8f), BlindnessMap(1, 1, 1, 0.367879f),
                                            AtmosphericLight{{1.0f, 1.0f, 1.0f}});
    EXPECT_NEAR(one.at(0, 0, 0), 0.926424, 1e-6);
    EXPECT_THROW((void)synthesize_haze(J, BlindnessMap(4, 4), A), SizeMismatchError);
}

TEST(SynthesizeHaze, InversionRecoversClean) {
    const auto f = synthetic::render_toy_frame({.height = 40, .width = 60, .seed = 8}, 0);
    const AtmosphericLight A = estimate_atmospheric_light(f.rgb);
    const BlindnessMap t = transmission_from_depth(f.depth, 0.05);
    const RasterImage I = synthesize_haze(f.rgb, t, A);
    const RasterImage J = invert_haze(I, t, A, 0.05);
    for (int y = 0; y < 40; ++y) {
        for (int x = 0; x < 60; ++x) {
            if (t.at(y, x) <= 0.05f) continue;
            for (int c = 0; c < 3; ++c) ASSERT_NEAR(J.at(y, x, c), f.rgb.at(y, x, c), 1e-5);
        }
    }
}

TEST(DarkChannel, Examples) {
    for (float g : {0.0f, 0.37f, 1.0f}) {
        const ScalarMap d = dark_channel(RasterImage(5, 6, 3, g), 3);
        for (float v : d.values()) EXPECT_EQ(v, g);
    }
    RasterImage img(3, 3, 3, 0.6f);
    img.at(1, 1, 0) = 0.1f;
    img.at(1, 1, 1) = 0.5f;
    img.at(1, 1, 2) = 0.9f;
    const ScalarMap dimg = dark_channel(img, 3);
    for (float v : dimg.values()) EXPECT_EQ(v, 0.1f);
    RasterImage corner(3, 3, 3, 0.6f);
    corner.at(0, 0, 0) = 0.1f;
    const ScalarMap dc = dark_channel(corner, 3);
    EXPECT_EQ(dc.at(1, 1), 0.1f);
    EXPECT_EQ(dc.at(2, 2), 0.6f);
    EXPECT_THROW((void)dark_channel(RasterImage(3, 3, 1), 3), std::invalid_argument);
}

TEST(DarkChannel, MatchesBruteForceAndBoundedByPixelMin) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const RasterImage img = random_image(11, 13, seed);
        for (int patch : {1, 3, 7, 15}) {
            const ScalarMap d = dark_channel(img, patch);
            const auto want = oracle::dark_channel(img, patch);
            for (int y = 0; y < 11; ++y) {
                for (int x = 0; x < 13; ++x) {
                    const std::size_t i = static_cast<std::size_t>(y) * 13 + x;
                    ASSERT_EQ(d.values()[i], static_cast<float>(want[i]));
                    ASSERT_LE(d.at(y, x), std::min({img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)}));
                }
            }
        }
    }
}

TEST(AtmosphericLight, Examples) {
    EXPECT_EQ(estimate_atmospheric_light(RasterImage(8, 8, 3, 0.4f)).rgb, (std::array<float, 3>{0.4f, 0.4f, 0.4f}));
    RasterImage white(40, 40, 3, 0.3f);
    for (int y = 10; y < 30; ++y) {
        for (int x = 5; x < 25; ++x) {
            for (int c = 0; c < 3; ++c) white.at(y, x, c) = 1.0f;
        }
    }
    EXPECT_EQ(estimate_atmospheric_light(white).rgb, (std::array<float, 3>{1.0f, 1.0f, 1.0f}));

    // 90% dark gray, 10% bright region.
    RasterImage two(50, 50, 3);
    for (int y = 0; y < 50; ++y) {
        for (int x = 0; x < 50; ++x) {
            const bool bright = x < 5;
            two.at(y, x, 0) = bright ? 0.9f : 0.2f;
            two.at(y, x, 1) = bright ? 0.8f : 0.2f;
            two.at(y, x, 2) = bright ? 0.7f : 0.2f;
        }
    }
    const auto a = estimate_atmospheric_light(two, 3);
    EXPECT_EQ(a.rgb, (std::array<float, 3>{0.9f, 0.8f, 0.7f}));
    EXPECT_EQ(a.rgb, oracle::atmospheric_light(two, 3));
}

TEST(AtmosphericLight, MatchesBruteForceSelection) {
    for (std::uint64_t seed = 10; seed < 20; ++seed) {
        const RasterImage img = random_image(23 + static_cast<int>(seed), 31, seed);
        for (int patch : {1, 5, 15}) {
            EXPECT_EQ(estimate_atmospheric_light(img, patch).rgb, oracle::atmospheric_light(img, patch))
                << seed << " " << patch;
        }
    }
}

TEST(TransmissionDcp, Examples) {
    const AtmosphericLight A{{0.8f, 0.7f, 0.9f}};
    RasterImage same(12, 12, 3);
    for (int y = 0; y < 12; ++y) {
        for (int x = 0; x < 12; ++x) {
            for (int c = 0; c < 3; ++c) same.at(y, x, c) = A.rgb[c];
        }
    }
    const ScalarMap raw = raw_transmission_dcp(same, A, 0.95, 15);
    for (float v : raw.values()) EXPECT_NEAR(v, 0.05, 1e-6);
    const BlindnessMap black = estimate_transmission_dcp(RasterImage(12, 12, 3), A, HazeParams{});
    for (float v : black.values()) EXPECT_NEAR(v, 1.0, 1e-5);
    EXPECT_THROW((void)estimate_transmission_dcp(same, AtmosphericLight{{0.5f, 0.0f, 0.5f}}, HazeParams{}),
                 std::invalid_argument);
}

TEST(TransmissionDcp, ClosedLoopConstantTransmission) {
    // No sky: every region obeys the dark-channel prior.
    const auto f = synthetic::render_toy_frame(
        {.height = 96, .width = 128, .seed = 4, .constant_albedo = true, .sky_fraction = 0.0}, 0);
    const AtmosphericLight A{{0.85f, 0.9f, 0.95f}};
    const RasterImage I = synthesize_haze(f.rgb, BlindnessMap(96, 128, 1, 0.6f), A);
    const BlindnessMap t = estimate_transmission_dcp(I, A, HazeParams{});
    std::size_t ok = 0;
    for (float v : t.values()) ok += std::abs(v - 0.6f) < 0.1f ? 1 : 0;
    EXPECT_GE(static_cast<double>(ok) / t.values().size(), 0.9);
}

TEST(GuidedFilter, ConstantInputIsFixed) {
    const ScalarMap guide = luminance(random_image(20, 25, 1));
    const ScalarMap c(20, 25, 1, 0.42f);
    const ScalarMap out = guided_filter(guide, c, 4, 1e-3);
    for (float v : out.values()) EXPECT_NEAR(v, 0.42f, 1e-6);
}

TEST(GuidedFilter, SelfGuidedSmallEpsIsIdentity) {
    const ScalarMap p = luminance(synthetic::smooth_noise(30, 40, 3, 3.0, 3));
    const ScalarMap out = guided_filter(p, p, 5, 1e-9);
    for (std::size_t i = 0; i < p.values().size(); ++i) EXPECT_LT(std::abs(out.values()[i] - p.values()[i]), 1e-3);
}

TEST(GuidedFilter, HugeEpsIsIteratedWindowMean) {
    // a -> 0 so output -> mean over windows of the window mean of p.
    const ScalarMap p = luminance(random_image(17, 23, 9));
    const ScalarMap guide = luminance(random_image(17, 23, 10));
    const int r = 3;
    const ScalarMap out = guided_filter(guide, p, r, 1e12);
    const auto m1 = oracle::box_mean(p, r);
    const ScalarMap m1g(17, 23, 1, std::vector<float>(m1.begin(), m1.end()));
    const auto m2 = oracle::box_mean(m1g, r);
    for (std::size_t i = 0; i < m2.size(); ++i) EXPECT_NEAR(out.values()[i], m2[i], 1e-5);
}

TEST(GuidedFilter, Errors) {
    EXPECT_THROW((void)guided_filter(ScalarMap(3, 3), ScalarMap(3, 4), 1, 1e-3), SizeMismatchError);
    EXPECT_THROW((void)guided_filter(ScalarMap(3, 3), ScalarMap(3, 3), 1, 0.0), std::invalid_argument);
}

TEST(HazeParams, Validation) {
    HazeParams p;
    EXPECT_NO_THROW(p.validate());
    p.patch = 4;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.beta_atm = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}
