#ifndef PUPILBENCH_BENCH_HPP
#define PUPILBENCH_BENCH_HPP

// Benchmark harness: runs the selected detectors over every manifest image,
// scores each detection against its annotation and aggregates hit counts per
// (method, category), pooled global hit rates, unweighted average robustness
// and per-image timing statistics.

#include "pupilbench/codec.hpp"
#include "pupilbench/detectors.hpp"
#include "pupilbench/manifest.hpp"
#include "pupilbench/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

namespace pupil {

struct ReportCell {
    Method method;
    Category category;
    std::size_t hits = 0;
    std::size_t total = 0;
    double rate = 0.0;
};

struct ReportGlobal {
    Method method;
    std::size_t hits = 0;
    std::size_t total = 0;
    double rate = 0.0;
    double avg_robustness = 0.0;
};

struct ReportTiming {
    Method method;
    double mean_s = 0.0;
    double median_s = 0.0;
    double min_s = 0.0;
    double max_s = 0.0;
};

struct BenchReport {
    std::vector<Method> methods;
    std::vector<Category> categories; // those present, canonical order
    std::vector<ReportCell> cells;    // method-major
    std::vector<ReportGlobal> global;
    std::vector<ReportTiming> timing;

    const ReportCell& cell(Method m, Category c) const
    {
        for (const ReportCell& x : cells)
            if (x.method == m && x.category == c)
                return x;
        throw std::out_of_range("no such report cell");
    }
    const ReportGlobal& global_for(Method m) const
    {
        for (const ReportGlobal& g : global)
            if (g.method == m)
                return g;
        throw std::out_of_range("method not in report");
    }
    const ReportTiming& timing_for(Method m) const
    {
        for (const ReportTiming& t : timing)
            if (t.method == m)
                return t;
        throw std::out_of_range("method not in report");
    }
};

struct ImageResult {
    std::string path;
    Category category;
    Annotation annotation;
    std::vector<Detection> detections; // parallel to report.methods
};

struct BenchResult {
    BenchReport report;
    std::vector<ImageResult> images;
};

inline double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Aggregates already scored per-image results.
inline BenchReport aggregate(const std::vector<Method>& methods, const std::vector<ImageResult>& images)
{
    BenchReport rep;
    rep.methods = methods;
    for (Category c : kAllCategories)
        if (std::any_of(images.begin(), images.end(), [c](const ImageResult& r) { return r.category == c; }))
            rep.categories.push_back(c);

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        ReportGlobal g{methods[mi]};
        std::vector<double> cat_rates;
        for (Category c : rep.categories) {
            ReportCell cell{methods[mi], c};
            for (const ImageResult& r : images) {
                if (r.category != c)
                    continue;
                ++cell.total;
                if (is_hit(relative_error(r.detections[mi], r.annotation)))
                    ++cell.hits;
            }
            cell.rate = hit_rate(cell.hits, cell.total);
            cat_rates.push_back(cell.rate);
            g.hits += cell.hits;
            g.total += cell.total;
            rep.cells.push_back(cell);
        }
        if (g.total > 0) {
            g.rate = hit_rate(g.hits, g.total);
            g.avg_robustness = average_robustness(cat_rates);
        }
        rep.global.push_back(g);

        std::vector<double> times;
        for (const ImageResult& r : images)
            times.push_back(r.detections[mi].elapsed);
        ReportTiming t{methods[mi]};
        if (!times.empty()) {
            double sum = 0.0;
            for (double v : times)
                sum += v;
            t.mean_s = sum / static_cast<double>(times.size());
            t.median_s = median(times);
            t.min_s = *std::min_element(times.begin(), times.end());
            t.max_s = *std::max_element(times.begin(), times.end());
        }
        rep.timing.push_back(t);
    }
    return rep;
}

/// Decodes, validates and scores one manifest entry.
inline ImageResult bench_image(const DatasetEntry& e, const std::filesystem::path& base_dir,
                               const std::vector<Method>& methods, const DetectorConfigs& cfg, int repeat)
{
    GrayImage img;
    try {
        img = load_image(base_dir / e.path);
    } catch (const DecodeError& ex) {
        throw ManifestError("cannot decode " + e.path + ": " + ex.what());
    } catch (const std::runtime_error& ex) {
        throw ManifestError("cannot read " + e.path + ": " + ex.what());
    }
    const Annotation& a = e.annotation;
    if (a.cx < 0.0 || a.cy < 0.0 || a.cx >= img.width() || a.cy >= img.height())
        throw ManifestError("annotation of " + e.path + " lies outside the image");

    ImageResult r{e.path, e.category, a, {}};
    for (Method m : methods) {
        Detection best = run_detector(m, img, cfg);
        for (int k = 1; k < repeat; ++k) {
            const Detection again = run_detector(m, img, cfg);
            best.elapsed = std::min(best.elapsed, again.elapsed);
        }
        r.detections.push_back(std::move(best));
    }
    return r;
}

/// Each image is decoded once; each detector runs `repeat` times and the
/// fastest run is kept as its time (detections are deterministic). Failed
/// detections count as misses. Images are spread over `jobs` worker threads;
/// results keep manifest order. Throws ManifestError for an empty manifest,
/// unreadable images or annotations outside the image (the first offending
/// entry in manifest order wins).
inline BenchResult run_benchmark(const Manifest& manifest, const std::filesystem::path& base_dir,
                                 const std::vector<Method>& methods, const DetectorConfigs& cfg = {}, int repeat = 3,
                                 int jobs = 1)
{
    if (manifest.images.empty())
        throw ManifestError("manifest lists no images");
    if (methods.empty())
        throw std::invalid_argument("no methods selected");
    if (repeat < 1)
        throw std::invalid_argument("repeat must be >= 1");
    if (jobs < 1)
        throw std::invalid_argument("jobs must be >= 1");

    const std::size_t n = manifest.images.size();
    std::vector<std::optional<ImageResult>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i] = bench_image(manifest.images[i], base_dir, methods, cfg, repeat);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min<int>(jobs, static_cast<int>(n)); ++t)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }

    BenchResult out;
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i])
            std::rethrow_exception(errors[i]);
        out.images.push_back(std::move(*slots[i]));
    }
    out.report = aggregate(methods, out.images);
    return out;
}

} // namespace pupil

#endif // PUPILBENCH_BENCH_HPP
