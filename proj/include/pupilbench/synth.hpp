#ifndef PUPILBENCH_SYNTH_HPP
#define PUPILBENCH_SYNTH_HPP

// Synthetic eye images with exact ground truth: a dark pupil (circle or
// ellipse) inside a mid-grey iris on a bright sclera, with optional
// disturbances mirroring the four robustness categories (eyelid cap, dark
// eyelash strokes, saturated glints) and additive Gaussian noise. Rendering
// is anti-aliased and fully determined by the parameters and seed.

#include "pupilbench/codec.hpp"
#include "pupilbench/image.hpp"
#include "pupilbench/manifest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pupil {

class InvalidGeometry : public std::invalid_argument {
public:
    explicit InvalidGeometry(const std::string& what) : std::invalid_argument(what) {}
};

enum class Occlusion { None, Eyelid, Strokes, Glints };

struct SynthParams {
    int width = 640;
    int height = 480;
    double pupil_cx = 320.0;
    double pupil_cy = 240.0;
    double pupil_a = 40.0;
    double pupil_b = 0.0; // <= 0 means circular (b = a)
    double pupil_theta = 0.0;
    double iris_radius = 120.0;
    int pupil_intensity = 10;
    int iris_intensity = 100;
    int sclera_intensity = 220;
    Occlusion occlusion = Occlusion::None;
    double eyelid_fraction = 0.0; // share of pupil area under the lid
    int disturbance_count = 0;    // strokes or glints
    double noise_sigma = 2.0;
    std::uint64_t seed = 0;

    double pupil_minor() const { return pupil_b > 0.0 ? pupil_b : pupil_a; }
};

struct SynthEye {
    GrayImage image;
    Annotation annotation;
};

/// Deterministic generator: uniform doubles from the top 53 bits of a 64-bit
/// Mersenne twister, normals by Box-Muller. Same stream on every platform.
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }
    std::uint64_t next() { return engine_(); }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return mag * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

namespace detail {

// Implicit pupil test: <= 1 inside.
struct PupilShape {
    double cx, cy, a, b, cos_t, sin_t;

    double level(double x, double y) const
    {
        const double dx = x - cx;
        const double dy = y - cy;
        const double u = dx * cos_t + dy * sin_t;
        const double v = -dx * sin_t + dy * cos_t;
        return (u / a) * (u / a) + (v / b) * (v / b);
    }
    bool inside(double x, double y) const { return level(x, y) <= 1.0; }
};

constexpr int kSuper = 4;

inline double subsample_offset(int k) { return (k + 0.5) / kSuper - 0.5; }

template <typename InsideFn>
double coverage(int x, int y, InsideFn&& inside)
{
    int hits = 0;
    for (int sy = 0; sy < kSuper; ++sy)
        for (int sx = 0; sx < kSuper; ++sx)
            hits += inside(x + subsample_offset(sx), y + subsample_offset(sy)) ? 1 : 0;
    return static_cast<double>(hits) / (kSuper * kSuper);
}

inline double segment_distance(double px, double py, double ax, double ay, double bx, double by)
{
    const double vx = bx - ax;
    const double vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

// Fraction of the pupil area lying above the horizontal line y = line_y,
// integrated on a quarter-pixel lattice.
inline double area_fraction_above(const PupilShape& p, double line_y)
{
    const double ext = std::max(p.a, p.b) + 1.0;
    long inside = 0;
    long above = 0;
    for (double y = p.cy - ext; y <= p.cy + ext; y += 0.25)
        for (double x = p.cx - ext; x <= p.cx + ext; x += 0.25)
            if (p.inside(x, y)) {
                ++inside;
                if (y < line_y)
                    ++above;
            }
    return inside == 0 ? 0.0 : static_cast<double>(above) / static_cast<double>(inside);
}

} // namespace detail

inline void validate(const SynthParams& p)
{
    const auto bad = [](const std::string& why) { throw InvalidGeometry(why); };
    if (p.width < 16 || p.height < 16)
        bad("image must be at least 16x16");
    if (!(p.pupil_a > 0.0) || p.pupil_b < 0.0 || (p.pupil_b > 0.0 && p.pupil_b > p.pupil_a))
        bad("pupil semi-axes must satisfy a >= b > 0");
    if (!(p.iris_radius > p.pupil_a))
        bad("pupil must lie inside the iris");
    if (p.pupil_cx - p.iris_radius < 0.0 || p.pupil_cy - p.iris_radius < 0.0 ||
        p.pupil_cx + p.iris_radius > p.width - 1 || p.pupil_cy + p.iris_radius > p.height - 1)
        bad("iris must lie inside the image");
    for (int v : {p.pupil_intensity, p.iris_intensity, p.sclera_intensity})
        if (v < 0 || v > 255)
            bad("intensities must lie in [0, 255]");
    if (p.eyelid_fraction < 0.0 || p.eyelid_fraction >= 0.9)
        bad("eyelid fraction must lie in [0, 0.9)");
    if (p.disturbance_count < 0)
        bad("disturbance count must be >= 0");
    if (p.noise_sigma < 0.0)
        bad("noise sigma must be >= 0");
}

/// Height of the eyelid edge that covers `fraction` of the pupil area.
inline double eyelid_line(const SynthParams& p)
{
    const detail::PupilShape shape{p.pupil_cx, p.pupil_cy, p.pupil_a, p.pupil_minor(), std::cos(p.pupil_theta),
                                   std::sin(p.pupil_theta)};
    double lo = p.pupil_cy - p.pupil_a - 1.0;
    double hi = p.pupil_cy + p.pupil_a + 1.0;
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (detail::area_fraction_above(shape, mid) < p.eyelid_fraction)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline SynthEye synth_eye(const SynthParams& p)
{
    validate(p);
    SynthRng rng(p.seed);
    const detail::PupilShape pupil{p.pupil_cx, p.pupil_cy, p.pupil_a, p.pupil_minor(), std::cos(p.pupil_theta),
                                   std::sin(p.pupil_theta)};
    const auto in_iris = [&](double x, double y) {
        return std::hypot(x - p.pupil_cx, y - p.pupil_cy) <= p.iris_radius;
    };

    RealField canvas(p.width, p.height, p.sclera_intensity);
    const double pupil_band = 1.5 / pupil.b;
    for (int y = 0; y < p.height; ++y)
        for (int x = 0; x < p.width; ++x) {
            const double dr = std::hypot(x - p.pupil_cx, y - p.pupil_cy) - p.iris_radius;
            double iris_cov = dr < -1.0 ? 1.0 : (dr > 1.0 ? 0.0 : detail::coverage(x, y, in_iris));
            if (iris_cov == 0.0)
                continue;
            const double q = std::sqrt(pupil.level(x, y)) - 1.0;
            const double pupil_cov = q < -pupil_band ? 1.0
                                     : q > pupil_band ? 0.0
                                                      : detail::coverage(x, y, [&](double sx, double sy) { return pupil.inside(sx, sy); });
            iris_cov = std::max(iris_cov, pupil_cov);
            canvas(x, y) = p.sclera_intensity * (1.0 - iris_cov) + p.iris_intensity * (iris_cov - pupil_cov) +
                           p.pupil_intensity * pupil_cov;
        }

    if (p.occlusion == Occlusion::Eyelid && p.eyelid_fraction > 0.0) {
        const double line_y = eyelid_line(p);
        for (int y = 0; y < p.height; ++y) {
            const double cov = std::clamp(line_y - (y - 0.5), 0.0, 1.0);
            if (cov == 0.0)
                break;
            for (int x = 0; x < p.width; ++x)
                canvas(x, y) = canvas(x, y) * (1.0 - cov) + p.sclera_intensity * cov;
        }
    }

    if (p.occlusion == Occlusion::Strokes) {
        const double r = p.pupil_a;
        for (int s = 0; s < p.disturbance_count; ++s) {
            std::array<Point2d, 4> pts;
            pts[0] = {p.pupil_cx + rng.uniform(-1.5, 1.5) * r, p.pupil_cy - r - rng.uniform(0.3, 1.2) * r};
            double heading = std::numbers::pi / 2.0 + rng.uniform(-0.6, 0.6);
            for (std::size_t k = 1; k < pts.size(); ++k) {
                const double len = rng.uniform(0.3, 0.6) * r;
                heading += rng.uniform(-0.3, 0.3);
                pts[k] = {pts[k - 1].x + len * std::cos(heading), pts[k - 1].y + len * std::sin(heading)};
            }
            const double half = rng.uniform(1.5, 3.0) / 2.0;
            const double value = rng.uniform(15.0, 40.0);
            double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
            for (const Point2d& q : pts) {
                x0 = std::min(x0, q.x), x1 = std::max(x1, q.x);
                y0 = std::min(y0, q.y), y1 = std::max(y1, q.y);
            }
            const int bx0 = std::max(0, static_cast<int>(std::floor(x0 - half - 2)));
            const int bx1 = std::min(p.width - 1, static_cast<int>(std::ceil(x1 + half + 2)));
            const int by0 = std::max(0, static_cast<int>(std::floor(y0 - half - 2)));
            const int by1 = std::min(p.height - 1, static_cast<int>(std::ceil(y1 + half + 2)));
            for (int y = by0; y <= by1; ++y)
                for (int x = bx0; x <= bx1; ++x) {
                    double d = 1e9;
                    for (std::size_t k = 1; k < pts.size(); ++k)
                        d = std::min(d, detail::segment_distance(x, y, pts[k - 1].x, pts[k - 1].y, pts[k].x, pts[k].y));
                    const double cov = std::clamp(half + 0.5 - d, 0.0, 1.0);
                    if (cov > 0.0)
                        canvas(x, y) = std::min(canvas(x, y), canvas(x, y) * (1.0 - cov) + value * cov);
                }
        }
    }

    if (p.occlusion == Occlusion::Glints) {
        for (int g = 0; g < p.disturbance_count; ++g) {
            const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double dist = rng.uniform(0.0, 0.7) * pupil.b;
            const double gx = p.pupil_cx + dist * std::cos(ang);
            const double gy = p.pupil_cy + dist * std::sin(ang);
            const double gr = rng.uniform(3.0, 6.0);
            const auto in_glint = [&](double x, double y) { return std::hypot(x - gx, y - gy) <= gr; };
            for (int y = std::max(0, static_cast<int>(gy - gr - 2)); y <= std::min(p.height - 1, static_cast<int>(gy + gr + 2)); ++y)
                for (int x = std::max(0, static_cast<int>(gx - gr - 2)); x <= std::min(p.width - 1, static_cast<int>(gx + gr + 2)); ++x) {
                    const double cov = detail::coverage(x, y, in_glint);
                    canvas(x, y) = canvas(x, y) * (1.0 - cov) + 255.0 * cov;
                }
        }
    }

    GrayImage img(p.width, p.height);
    for (std::size_t i = 0; i < img.size(); ++i) {
        double v = canvas.data()[i];
        if (p.noise_sigma > 0.0)
            v += p.noise_sigma * rng.normal();
        img.data()[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }

    Annotation ann;
    ann.cx = p.pupil_cx;
    ann.cy = p.pupil_cy;
    ann.r = std::sqrt(p.pupil_a * p.pupil_minor());
    ann.annotator = "synth";
    ann.timestamp = 0;
    return {std::move(img), std::move(ann)};
}

/// Default category shares: 473 clear, 136 hair/eyelashes, 91 eyelid,
/// 100 glasses/reflections.
inline constexpr std::array<double, 4> kDefaultProportions{473.0, 136.0, 91.0, 100.0};

/// Largest-remainder apportionment of `count` images over the categories.
inline std::array<int, 4> category_counts(int count, const std::array<double, 4>& proportions = kDefaultProportions)
{
    if (count < 0)
        throw std::invalid_argument("count must be >= 0");
    double total = 0.0;
    for (double v : proportions) {
        if (v < 0.0)
            throw std::invalid_argument("proportions must be >= 0");
        total += v;
    }
    if (!(total > 0.0))
        throw std::invalid_argument("proportions must not all be zero");
    std::array<int, 4> out{};
    std::array<double, 4> rem{};
    int assigned = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double quota = count * proportions[i] / total;
        out[i] = static_cast<int>(std::floor(quota));
        rem[i] = quota - out[i];
        assigned += out[i];
    }
    std::array<std::size_t, 4> order{0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; assigned < count; ++k, ++assigned)
        ++out[order[k % 4]];
    return out;
}

struct CorpusItem {
    std::string filename;
    Category category;
    SynthParams params;
};

/// Randomised, seeded corpus description (nothing rendered yet).
inline std::vector<CorpusItem> corpus_plan(int count, std::uint64_t seed,
                                           const std::array<double, 4>& proportions = kDefaultProportions)
{
    const std::array<int, 4> counts = category_counts(count, proportions);
    SynthRng rng(seed);
    std::vector<CorpusItem> items;
    int index = 0;
    for (std::size_t c = 0; c < 4; ++c)
        for (int k = 0; k < counts[c]; ++k, ++index) {
            SynthParams p;
            p.pupil_a = rng.uniform(28.0, 64.0);
            p.pupil_b = p.pupil_a * rng.uniform(0.85, 1.0);
            p.pupil_theta = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
            p.iris_radius = rng.uniform(115.0, 135.0);
            p.pupil_cx = rng.uniform(p.iris_radius + 10.0, p.width - 1 - p.iris_radius - 10.0);
            p.pupil_cy = rng.uniform(p.iris_radius + 10.0, p.height - 1 - p.iris_radius - 10.0);
            p.pupil_intensity = rng.uniform_int(5, 15);
            p.iris_intensity = rng.uniform_int(85, 120);
            p.sclera_intensity = rng.uniform_int(190, 225);
            p.noise_sigma = rng.uniform(1.0, 3.0);
            const Category cat = kAllCategories[c];
            switch (cat) {
            case Category::Clear: break;
            case Category::HairEyelashes:
                p.occlusion = Occlusion::Strokes;
                p.disturbance_count = rng.uniform_int(4, 8);
                break;
            case Category::Eyelid:
                p.occlusion = Occlusion::Eyelid;
                p.eyelid_fraction = rng.uniform(0.2, 0.5);
                break;
            case Category::GlassesReflections:
                p.occlusion = Occlusion::Glints;
                p.disturbance_count = rng.uniform_int(1, 3);
                break;
            }
            p.seed = rng.next();
            char name[32];
            std::snprintf(name, sizeof name, "synth_%04d.png", index);
            items.push_back({name, cat, p});
        }
    return items;
}

/// Renders the corpus into `dir` as PNG files plus `manifest.json`.
inline Manifest write_corpus(const std::filesystem::path& dir, int count, std::uint64_t seed,
                             const std::array<double, 4>& proportions = kDefaultProportions)
{
    if (count < 1)
        throw std::invalid_argument("corpus needs at least one image");
    std::filesystem::create_directories(dir);
    Manifest m;
    for (const CorpusItem& item : corpus_plan(count, seed, proportions)) {
        SynthEye eye = synth_eye(item.params);
        write_file(dir / item.filename, encode_png(eye.image));
        m.images.push_back({item.filename, item.category, eye.annotation});
    }
    save_manifest_atomic(m, dir / "manifest.json");
    return m;
}

} // namespace pupil

#endif // PUPILBENCH_SYNTH_HPP
