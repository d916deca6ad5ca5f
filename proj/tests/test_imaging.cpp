#include "pupilbench/imaging.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

using namespace pupil;
using pupil::testing::reference_morph;
using pupil::testing::random_binary;

namespace {

// Straightforward Canny with clamped reads everywhere, used to check the
// padded fast path.
BinaryImage reference_canny(const GrayImage& img, double low, double high)
{
    const int w = img.width(), h = img.height();
    const auto k = gaussian_kernel(1.4, 5);
    RealField tmp(w, h), blur(w, h);
    const RealField src = to_real(img);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0;
            for (int i = 0; i < 5; ++i)
                acc += k[i] * src.clamped(x + i - 2, y);
            tmp(x, y) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0;
            for (int i = 0; i < 5; ++i)
                acc += k[i] * tmp.clamped(x, y + i - 2);
            blur(x, y) = acc;
        }
    RealField mag(w, h);
    Grid<int> dir(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            auto p = [&](int dx, int dy) { return blur.clamped(x + dx, y + dy); };
            double gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            double gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            mag(x, y) = std::sqrt(gx * gx + gy * gy);
            double ax = std::abs(gx), ay = std::abs(gy);
            if (ay <= ax * 0.41421356237309503)
                dir(x, y) = 0;
            else if (ax <= ay * 0.41421356237309503)
                dir(x, y) = 2;
            else
                dir(x, y) = gx * gy > 0 ? 1 : 3;
        }
    const int sx[4] = {1, 1, 0, -1}, sy[4] = {0, 1, 1, 1};
    RealField thin(w, h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double m = mag(x, y);
            int d = dir(x, y);
            if (m > low && m > mag.clamped(x - sx[d], y - sy[d]) && m >= mag.clamped(x + sx[d], y + sy[d]))
                thin(x, y) = m;
        }
    // Hysteresis by fixed-point iteration.
    BinaryImage out(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (thin(x, y) > high)
                out(x, y) = 1;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (out(x, y) || thin(x, y) <= low)
                    continue;
                for (int dy = -1; dy <= 1 && !out(x, y); ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        if (out.contains(x + dx, y + dy) && out(x + dx, y + dy)) {
                            out(x, y) = 1;
                            changed = true;
                            break;
                        }
            }
    }
    return out;
}

std::size_t count_ones(const BinaryImage& img)
{
    return static_cast<std::size_t>(std::count(img.data().begin(), img.data().end(), 1));
}

} // namespace

TEST(Grid, RejectsEmptyDimensions)
{
    EXPECT_THROW(GrayImage(0, 3), std::invalid_argument);
    EXPECT_THROW(GrayImage(2, 2, std::vector<std::uint8_t>(3)), std::invalid_argument);
    GrayImage img(3, 2, 7);
    EXPECT_EQ(img.size(), 6u);
    EXPECT_EQ(img(2, 1), 7);
}

TEST(Threshold, StrictGreaterThan)
{
    GrayImage img(2, 1, std::vector<std::uint8_t>{25, 26});
    const BinaryImage b = threshold_binarize(img, 25);
    EXPECT_EQ(b(0, 0), 0);
    EXPECT_EQ(b(1, 0), 1);
    EXPECT_EQ(count_ones(threshold_binarize(GrayImage(4, 4, 0), 25)), 0u);
    EXPECT_EQ(count_ones(threshold_binarize(GrayImage(4, 4, 255), 25)), 16u);
    EXPECT_THROW(threshold_binarize(img, 256), std::invalid_argument);
}

TEST(Threshold, MonotoneInThreshold)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> v(0, 255);
    GrayImage img(32, 32);
    for (auto& p : img.data())
        p = static_cast<std::uint8_t>(v(rng));
    for (int t = 0; t < 255; ++t) {
        const BinaryImage lo = threshold_binarize(img, t);
        const BinaryImage hi = threshold_binarize(img, t + 1);
        for (std::size_t i = 0; i < lo.size(); ++i)
            ASSERT_LE(hi.data()[i], lo.data()[i]);
    }
}

TEST(StructuringElement, DiskMask)
{
    const auto se = StructuringElement::disk(5);
    EXPECT_TRUE(se.contains(3, 4));
    EXPECT_FALSE(se.contains(4, 4));
    EXPECT_EQ(se.half_width(0), 5);
    EXPECT_EQ(se.half_width(3), 4);
    EXPECT_EQ(se.half_width(5), 0);
    EXPECT_THROW(StructuringElement::disk(0), std::invalid_argument);
}

TEST(Morphology, MatchesBruteForceDisk)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int r = 1 + trial % 6;
        const BinaryImage img = random_binary(rng, 37, 29, trial % 2 ? 0.08 : 0.85);
        const auto se = StructuringElement::disk(r);
        ASSERT_EQ(dilate(img, se), reference_morph(img, r, true)) << "trial " << trial;
        ASSERT_EQ(erode(img, se), reference_morph(img, r, false)) << "trial " << trial;
    }
}

TEST(Morphology, ClosingKeepsSolidSquare)
{
    BinaryImage img(30, 30, 0);
    for (int y = 10; y < 20; ++y)
        for (int x = 10; x < 20; ++x)
            img(x, y) = 1;
    EXPECT_EQ(close(img, StructuringElement::disk(5)), img);
}

TEST(Morphology, ClosingFillsInteriorHole)
{
    // Kept more than one radius from the border: erosion treats the outside
    // as foreground, so a dilated rim touching the border would survive.
    BinaryImage img(40, 40, 0);
    for (int y = 10; y < 30; ++y)
        for (int x = 10; x < 30; ++x)
            img(x, y) = 1;
    img(20, 20) = 0;
    const BinaryImage closed = close(img, StructuringElement::disk(5));
    EXPECT_EQ(closed(20, 20), 1);
    img(20, 20) = 1;
    EXPECT_EQ(closed, img);
}

TEST(Morphology, ClosingOfEmptyImageIsEmpty)
{
    const BinaryImage img(20, 20, 0);
    EXPECT_EQ(close(img, StructuringElement::disk(5)), img);
}

TEST(Morphology, ClosingNeverShrinksAtBorder)
{
    BinaryImage img(20, 20, 0);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 6; ++x)
            img(x, y) = 1;
    const BinaryImage closed = close(img, StructuringElement::disk(3));
    for (std::size_t i = 0; i < img.size(); ++i)
        EXPECT_GE(closed.data()[i], img.data()[i]);
}

TEST(Morphology, ClosingIsIdempotent)
{
    std::mt19937_64 rng(20240611);
    for (int trial = 0; trial < 60; ++trial) {
        const int r = 1 + trial % 5;
        const double density = 0.05 + 0.9 * (trial % 10) / 10.0;
        const BinaryImage img = random_binary(rng, 24 + trial % 7, 20 + trial % 5, density);
        const auto se = StructuringElement::disk(r);
        const BinaryImage once = close(img, se);
        ASSERT_EQ(close(once, se), once) << "trial " << trial;
    }
}

TEST(Gaussian, ImpulseReproducesKernel)
{
    RealField f(9, 9, 0.0);
    f(4, 4) = 1.0;
    const auto taps = gaussian_kernel(1.0, 5);
    const RealField g = gaussian_smooth(f, 1.0, 5);
    double sum = 0.0;
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 9; ++x) {
            sum += g(x, y);
            const bool inside = std::abs(x - 4) <= 2 && std::abs(y - 4) <= 2;
            const double expect = inside ? taps[x - 2] * taps[y - 2] : 0.0;
            EXPECT_NEAR(g(x, y), expect, 1e-12);
        }
    EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Gaussian, KernelFormula)
{
    const auto k = gaussian_kernel(1.4, 5);
    const double raw[5] = {std::exp(-4 / (2 * 1.96)), std::exp(-1 / (2 * 1.96)), 1.0, std::exp(-1 / (2 * 1.96)),
                           std::exp(-4 / (2 * 1.96))};
    const double total = raw[0] + raw[1] + raw[2] + raw[3] + raw[4];
    for (int i = 0; i < 5; ++i)
        EXPECT_NEAR(k[i], raw[i] / total, 1e-15);
    EXPECT_THROW(gaussian_kernel(0.0, 3), std::invalid_argument);
    EXPECT_THROW(gaussian_kernel(1.0, 0), std::invalid_argument);
}

TEST(Gaussian, ConstantFieldUnchanged)
{
    const RealField f(13, 7, 42.5);
    const RealField g = gaussian_smooth(f, 2.0, 7);
    for (double v : g.data())
        EXPECT_NEAR(v, 42.5, 1e-9);
}

TEST(Gaussian, LargerSigmaLowersPeak)
{
    RealField f(15, 15, 0.0);
    f(7, 7) = 1.0;
    EXPECT_GT(gaussian_smooth(f, 0.8, 7)(7, 7), gaussian_smooth(f, 1.6, 7)(7, 7));
}

TEST(Gaussian, SumPreservedAwayFromBorder)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    RealField f(40, 40, 0.0);
    for (int y = 10; y < 30; ++y)
        for (int x = 10; x < 30; ++x)
            f(x, y) = u(rng);
    double before = 0.0, after = 0.0;
    for (double v : f.data())
        before += v;
    for (double v : gaussian_smooth(f, 1.5, 7).data())
        after += v;
    EXPECT_NEAR(after, before, 1e-6 * before);
}

TEST(Gaussian, SeparableMatchesDirect2D)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    RealField f(11, 9);
    for (auto& v : f.data())
        v = u(rng);
    const auto k = gaussian_kernel(1.2, 5);
    const RealField g = convolve_separable(f, k);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 11; ++x) {
            double acc = 0.0;
            for (int j = 0; j < 5; ++j)
                for (int i = 0; i < 5; ++i)
                    acc += k[i] * k[j] * f.clamped(x + i - 2, y + j - 2);
            EXPECT_NEAR(g(x, y), acc, 1e-12);
        }
}

TEST(Gradient, ConstantImageIsZero)
{
    const GradientField g = gradient(GrayImage(6, 5, 90));
    for (double v : g.magnitude.data())
        EXPECT_EQ(v, 0.0);
}

TEST(Gradient, HorizontalRamp)
{
    GrayImage img(8, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x)
            img(x, y) = static_cast<std::uint8_t>(x);
    const GradientField g = gradient(img);
    for (int y = 1; y < 5; ++y)
        for (int x = 1; x < 7; ++x) {
            EXPECT_EQ(g.gx(x, y), 8.0);
            EXPECT_EQ(g.gy(x, y), 0.0);
        }
    EXPECT_EQ(g.gx(0, 2), 0.0);
    EXPECT_EQ(g.gx(7, 2), 0.0);
}

TEST(Gradient, MagnitudeAndLinearity)
{
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> v(0, 60);
    GrayImage img(12, 10), twice(12, 10);
    for (std::size_t i = 0; i < img.size(); ++i) {
        img.data()[i] = static_cast<std::uint8_t>(v(rng));
        twice.data()[i] = static_cast<std::uint8_t>(2 * img.data()[i]);
    }
    const GradientField a = gradient(img), b = gradient(twice);
    for (std::size_t i = 0; i < img.size(); ++i) {
        EXPECT_NEAR(a.magnitude.data()[i], std::hypot(a.gx.data()[i], a.gy.data()[i]), 1e-9);
        EXPECT_EQ(b.gx.data()[i], 2.0 * a.gx.data()[i]);
        EXPECT_EQ(b.gy.data()[i], 2.0 * a.gy.data()[i]);
    }
}

TEST(Gradient, TooSmall)
{
    EXPECT_THROW(gradient(GrayImage(2, 2)), ImageTooSmall);
}

TEST(Canny, ConstantImageHasNoEdges)
{
    EXPECT_EQ(count_ones(canny(GrayImage(20, 20, 128), 40, 100)), 0u);
}

TEST(Canny, VerticalStepGivesSingleColumn)
{
    GrayImage img(20, 12, 0);
    for (int y = 0; y < 12; ++y)
        for (int x = 10; x < 20; ++x)
            img(x, y) = 255;
    const BinaryImage e = canny(img, 40, 100);
    std::set<int> columns;
    for (int y = 0; y < 12; ++y) {
        int in_row = 0;
        for (int x = 0; x < 20; ++x)
            if (e(x, y)) {
                ++in_row;
                columns.insert(x);
            }
        EXPECT_EQ(in_row, 1) << "row " << y;
    }
    ASSERT_EQ(columns.size(), 1u);
    const int col = *columns.begin();
    EXPECT_TRUE(col == 9 || col == 10);
}

TEST(Canny, CircleOutlineRing)
{
    const GrayImage img = pupil::testing::render_disk(80, 80, 40, 40, 20, 0, 255);
    const BinaryImage e = canny(img, 40, 100);
    const auto comps = connected_components(e);
    ASSERT_FALSE(comps.empty());
    EXPECT_EQ(comps.front().pixels.size(), count_ones(e)); // a single closed ring
    for (const PixelCoord p : comps.front().pixels)
        EXPECT_NEAR(std::hypot(p.x - 40.0, p.y - 40.0), 20.0, 1.0);
    // Closed: every angle is covered.
    std::set<int> sectors;
    for (const PixelCoord p : comps.front().pixels)
        sectors.insert(static_cast<int>(std::floor((std::atan2(p.y - 40.0, p.x - 40.0) + M_PI) / (2 * M_PI) * 72)) % 72);
    EXPECT_EQ(sectors.size(), 72u);
}

TEST(Canny, MatchesReferenceImplementation)
{
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> v(0, 255);
    for (int trial = 0; trial < 10; ++trial) {
        GrayImage img(41, 33);
        for (auto& p : img.data())
            p = static_cast<std::uint8_t>(v(rng));
        const GrayImage disk = pupil::testing::render_disk(41, 33, 20 + trial % 3, 16, 6 + trial, 10, 200);
        for (std::size_t i = 0; i < img.size(); ++i)
            img.data()[i] = static_cast<std::uint8_t>((img.data()[i] / 8 + disk.data()[i]) / 1.2);
        ASSERT_EQ(canny(img, 40, 100), reference_canny(img, 40, 100)) << "trial " << trial;
    }
}

TEST(Canny, ThresholdPrecondition)
{
    const GrayImage img(8, 8, 0);
    EXPECT_THROW(canny(img, 50, 40), std::invalid_argument);
    EXPECT_THROW(canny(img, -1, 40), std::invalid_argument);
    EXPECT_THROW(canny(img, 40, 256), std::invalid_argument);
}

TEST(Components, DisjointPixels)
{
    BinaryImage img(8, 8, 0);
    img(0, 0) = 1;
    img(5, 5) = 1;
    const auto comps = connected_components(img);
    ASSERT_EQ(comps.size(), 2u);
    EXPECT_EQ(comps[0].pixels, (std::vector<PixelCoord>{{0, 0}}));
    EXPECT_EQ(comps[1].pixels, (std::vector<PixelCoord>{{5, 5}}));
    EXPECT_EQ(comps[0].label, 1);
    EXPECT_EQ(comps[1].label, 2);
}

TEST(Components, DiagonalChainIsOneComponent)
{
    BinaryImage img(6, 6, 0);
    for (int i = 0; i < 6; ++i)
        img(i, i) = 1;
    const auto comps = connected_components(img);
    ASSERT_EQ(comps.size(), 1u);
    EXPECT_EQ(comps[0].pixels.size(), 6u);
}

TEST(Components, EmptyImage)
{
    EXPECT_TRUE(connected_components(BinaryImage(5, 5, 0)).empty());
}

TEST(Components, LargestFirstThenRowMajor)
{
    BinaryImage img(10, 10, 0);
    img(8, 0) = 1;             // size 1, first in row-major order
    img(0, 5) = img(1, 5) = 1; // size 2
    img(4, 8) = 1;             // size 1
    const auto comps = connected_components(img);
    ASSERT_EQ(comps.size(), 3u);
    EXPECT_EQ(comps[0].pixels.size(), 2u);
    EXPECT_EQ(comps[1].pixels.front(), (PixelCoord{8, 0}));
    EXPECT_EQ(comps[2].pixels.front(), (PixelCoord{4, 8}));
}

TEST(Components, PartitionOfForeground)
{
    std::mt19937_64 rng(1234);
    const BinaryImage img = random_binary(rng, 40, 30, 0.35);
    std::set<std::pair<int, int>> seen;
    for (const auto& c : connected_components(img))
        for (const PixelCoord p : c.pixels) {
            EXPECT_TRUE(img[p]);
            EXPECT_TRUE(seen.insert({p.x, p.y}).second);
        }
    EXPECT_EQ(seen.size(), count_ones(img));
}

TEST(Downsample, Dimensions)
{
    const GrayImage out = downsample4(GrayImage(640, 480, 3));
    EXPECT_EQ(out.width(), 160);
    EXPECT_EQ(out.height(), 120);
    for (auto v : out.data())
        EXPECT_EQ(v, 3);
    EXPECT_EQ(downsample4(GrayImage(7, 9)).width(), 1);
    EXPECT_THROW(downsample4(GrayImage(3, 8)), ImageTooSmall);
}

TEST(Downsample, BlockMeanRoundsHalfUp)
{
    GrayImage img(4, 4);
    for (int i = 0; i < 16; ++i)
        img.data()[i] = static_cast<std::uint8_t>(i);
    EXPECT_EQ(downsample4(img)(0, 0), 8);
}

TEST(Downsample, FullResolutionMapping)
{
    EXPECT_DOUBLE_EQ(to_full_resolution(0), 1.5);
    EXPECT_DOUBLE_EQ(to_full_resolution(10), 41.5);
}

TEST(LightSpots, GlintFilledFromRing)
{
    GrayImage img = pupil::testing::render_disk(30, 30, 15, 15, 10, 10, 200);
    for (int y = 14; y <= 16; ++y)
        for (int x = 14; x <= 16; ++x)
            img(x, y) = 255;
    const GrayImage out = remove_light_spots(img, 200);
    for (int y = 14; y <= 16; ++y)
        for (int x = 14; x <= 16; ++x)
            EXPECT_EQ(out(x, y), 10);
    // Pixels at exactly the threshold are not spots.
    EXPECT_EQ(out(0, 0), 200);
}

TEST(LightSpots, RingMeanIsRounded)
{
    GrayImage img(5, 5, 0);
    img(2, 2) = 255;
    img(1, 1) = 1; // ring of eight: one 1, seven 0 -> mean 0.125 -> 0
    img(3, 3) = 4; // -> (1 + 4) / 8 = 0.625 -> 1
    EXPECT_EQ(remove_light_spots(img, 200)(2, 2), 1);
}

TEST(LightSpots, NoSpotsOrWholeImage)
{
    const GrayImage dim(10, 10, 150);
    EXPECT_EQ(remove_light_spots(dim, 200), dim);
    const GrayImage bright(10, 10, 255);
    EXPECT_EQ(remove_light_spots(bright, 200), bright);
}
