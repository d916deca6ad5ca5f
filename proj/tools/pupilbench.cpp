// pupilbench command-line entry point: detect, bench, synth, annotate-serve.

#include "pupilbench/annotate_server.hpp"
#include "pupilbench/pupilbench.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace pupil;

constexpr int kExitUsage = 1;
constexpr int kExitAllFailed = 2;

struct Shared {
    std::string radii = "5..25";
    int threshold = 25;
    double alpha = 2.0;
    std::uint64_t seed = 1;
    std::string out;
};

void add_shared(CLI::App* cmd, Shared& s)
{
    cmd->add_option("--radii", s.radii, "Radius range MIN..MAX at detector scale")->capture_default_str();
    cmd->add_option("--threshold", s.threshold, "Dark threshold for EF and IDO")->capture_default_str()->check(
        CLI::Range(0, 255));
    cmd->add_option("--alpha", s.alpha, "RST radial strictness")->capture_default_str()->check(
        CLI::PositiveNumber);
    cmd->add_option("--seed", s.seed, "Random seed")->capture_default_str();
}

std::pair<int, int> parse_radii(const std::string& text)
{
    const auto dots = text.find("..");
    if (dots == std::string::npos)
        throw CLI::ValidationError("--radii", "expected MIN..MAX");
    try {
        std::size_t used = 0;
        const int lo = std::stoi(text.substr(0, dots), &used);
        if (used != dots)
            throw std::invalid_argument("trailing");
        const std::string hi_text = text.substr(dots + 2);
        const int hi = std::stoi(hi_text, &used);
        if (used != hi_text.size())
            throw std::invalid_argument("trailing");
        if (lo < 1 || hi < lo)
            throw CLI::ValidationError("--radii", "need 1 <= MIN <= MAX");
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw CLI::ValidationError("--radii", "expected integers MIN..MAX");
    }
}

DetectorConfigs make_configs(const Shared& s)
{
    const auto [lo, hi] = parse_radii(s.radii);
    DetectorConfigs cfg;
    cfg.cht.r_min = cfg.ido.r_min = cfg.rst.r_min = lo;
    cfg.cht.r_max = cfg.ido.r_max = cfg.rst.r_max = hi;
    cfg.ef.threshold = cfg.ido.threshold = s.threshold;
    cfg.rst.alpha = s.alpha;
    return cfg;
}

std::vector<Method> parse_methods(const std::string& text)
{
    std::vector<Method> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "all") {
            out.assign(kAllMethods.begin(), kAllMethods.end());
            continue;
        }
        const auto m = parse_method(item);
        if (!m)
            throw CLI::ValidationError("--method", "unknown method '" + item + "'");
        if (std::find(out.begin(), out.end(), *m) == out.end())
            out.push_back(*m);
    }
    if (out.empty())
        throw CLI::ValidationError("--method", "no method selected");
    return out;
}

nlohmann::ordered_json detection_json(const Detection& d)
{
    nlohmann::ordered_json j;
    j["method"] = std::string(to_string(d.method));
    if (!d.ok()) {
        j["error"] = *d.error;
        return j;
    }
    j["cx"] = d.cx;
    j["cy"] = d.cy;
    nlohmann::ordered_json shape;
    if (const auto* c = std::get_if<Circle>(&d.shape)) {
        shape["type"] = "circle";
        shape["r"] = c->r;
    } else if (const auto* e = std::get_if<Ellipse>(&d.shape)) {
        shape["type"] = "ellipse";
        shape["a"] = e->a;
        shape["b"] = e->b;
        shape["theta"] = e->theta;
    }
    j["shape"] = shape;
    j["score"] = d.score;
    j["elapsed_s"] = d.elapsed;
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

int cmd_detect(const std::string& image, const std::string& methods, const std::string& overlay, const Shared& s)
{
    const auto selected = parse_methods(methods);
    const DetectorConfigs cfg = make_configs(s);
    GrayImage img;
    try {
        img = load_image(image);
    } catch (const std::exception& e) {
        spdlog::error("{}: {}", image, e.what());
        return kExitUsage;
    }
    std::vector<Detection> results;
    for (Method m : selected) {
        results.push_back(run_detector(m, img, cfg));
        spdlog::debug("{} took {:.6f} s", to_string(m), results.back().elapsed);
        std::cout << detection_json(results.back()).dump() << '\n';
    }
    if (!overlay.empty()) {
        try {
            write_file(overlay, encode_overlay_png(draw_overlay(img, results)));
        } catch (const std::exception& e) {
            spdlog::error("cannot write overlay {}: {}", overlay, e.what());
            return kExitUsage;
        }
    }
    const bool any_ok = std::any_of(results.begin(), results.end(), [](const Detection& d) { return d.ok(); });
    return any_ok ? 0 : kExitAllFailed;
}

int cmd_bench(const std::string& manifest_path, const std::string& methods, int repeat, int jobs, bool timing,
              const Shared& s)
{
    const auto selected = parse_methods(methods);
    const DetectorConfigs cfg = make_configs(s);
    const std::filesystem::path out_dir = s.out.empty() ? std::filesystem::path(".") : std::filesystem::path(s.out);
    try {
        const Manifest manifest = load_manifest(manifest_path);
        spdlog::info("benchmarking {} images with {} methods", manifest.images.size(), selected.size());
        const BenchResult result = run_benchmark(manifest, std::filesystem::path(manifest_path).parent_path(), selected,
                                                 cfg, repeat, jobs);
        const ReportOptions opt{timing};
        std::filesystem::create_directories(out_dir);
        write_text(out_dir / "report.json", render_report(result.report, ReportFormat::Json, opt));
        write_text(out_dir / "report.md", render_report(result.report, ReportFormat::Markdown, opt));
        std::cout << render_global_table(result.report);
    } catch (const ManifestError& e) {
        spdlog::error("manifest: {}", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    }
    return 0;
}

int cmd_synth(int count, const std::string& proportions, const Shared& s)
{
    if (count < 1) {
        spdlog::error("--count must be at least 1");
        return kExitUsage;
    }
    if (s.out.empty()) {
        spdlog::error("--out is required");
        return kExitUsage;
    }
    std::array<double, 4> props = kDefaultProportions;
    if (!proportions.empty()) {
        std::stringstream ss(proportions);
        std::string item;
        std::size_t i = 0;
        try {
            while (std::getline(ss, item, ',')) {
                if (i == props.size())
                    throw std::invalid_argument("too many");
                props[i++] = std::stod(item);
            }
        } catch (const std::logic_error&) {
            i = 0;
        }
        if (i != props.size()) {
            spdlog::error("--proportions needs four comma-separated numbers");
            return kExitUsage;
        }
    }
    try {
        const Manifest m = write_corpus(s.out, count, s.seed, props);
        spdlog::info("wrote {} images to {}", m.images.size(), s.out);
    } catch (const std::exception& e) {
        spdlog::error("synth: {}", e.what());
        return kExitUsage;
    }
    return 0;
}

AnnotationServer* g_server = nullptr;

extern "C" void on_signal(int)
{
    if (g_server)
        g_server->stop();
}

int cmd_annotate_serve(const std::string& dir, std::string manifest, const std::string& host, int port,
                       const std::string& ui_dir)
{
    if (manifest.empty())
        manifest = (std::filesystem::path(dir) / "manifest.json").string();
    try {
        AnnotationStore store(dir, manifest);
        std::optional<std::filesystem::path> ui;
        if (!ui_dir.empty())
            ui = ui_dir;
        AnnotationServer server(store, ui);
        const int bound = server.bind(host, port);
        if (bound < 0) {
            spdlog::error("cannot bind {}:{}", host, port);
            return kExitUsage;
        }
        // Scripts read the chosen port from this line when --port 0 is used.
        std::cout << "listening on http://" << host << ":" << bound << '\n' << std::flush;
        spdlog::info("serving {} images from {}", store.ids().size(), dir);
        g_server = &server;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        server.serve();
        g_server = nullptr;
    } catch (const std::exception& e) {
        spdlog::error("annotate-serve: {}", e.what());
        return kExitUsage;
    }
    return 0;
}

void configure_logging()
{
    auto logger = spdlog::stderr_color_mt("pupilbench");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("%^%l%$: %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("PUPILBENCH_LOG")) {
        const std::string level = env;
        if (level == "error" || level == "warn" || level == "info" || level == "debug")
            spdlog::set_level(spdlog::level::from_str(level));
        else
            spdlog::warn("ignoring PUPILBENCH_LOG={}", level);
    }
}

} // namespace

int main(int argc, char** argv)
{
    configure_logging();

    CLI::App app{"Pupil-centre detection benchmark"};
    app.require_subcommand(1);
    Shared shared;

    auto* detect = app.add_subcommand("detect", "Run detectors on one image, one JSON line per method");
    std::string image, methods = "all", overlay;
    detect->add_option("image", image, "Input image (PNG, JPEG or PGM)")->required();
    detect->add_option("--method", methods, "cht|ef|ido|rst|all, comma-separated")->capture_default_str();
    detect->add_option("--overlay", overlay, "Write an annotated PNG here");
    add_shared(detect, shared);

    auto* bench = app.add_subcommand("bench", "Benchmark detectors over a manifest");
    std::string manifest, bench_methods = "all";
    int repeat = 3, jobs = 1;
    bool no_timing = false;
    bench->add_option("--manifest", manifest, "Manifest JSON")->required();
    bench->add_option("--methods", bench_methods, "Comma-separated methods or all")->capture_default_str();
    bench->add_option("--repeat", repeat, "Timed runs per detector and image; the fastest counts")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    bench->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_flag("--no-timing", no_timing, "Leave timing out of the written reports");
    bench->add_option("--out", shared.out, "Output directory for report.json and report.md");
    add_shared(bench, shared);

    auto* synth = app.add_subcommand("synth", "Render a synthetic corpus with manifest");
    int count = 0;
    std::string proportions;
    synth->add_option("--count", count, "Number of images")->required();
    synth->add_option("--proportions", proportions, "Category weights clear,hair,eyelid,glints");
    synth->add_option("--out", shared.out, "Output directory");
    add_shared(synth, shared);

    auto* serve = app.add_subcommand("annotate-serve", "Serve the annotation UI and API");
    std::string dir, serve_manifest, host = "127.0.0.1", ui_dir;
    int port = 8080;
    serve->add_option("--dir", dir, "Image directory")->required();
    serve->add_option("--manifest", serve_manifest, "Manifest file (default DIR/manifest.json)");
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--port", port, "Port, 0 picks a free one")->capture_default_str()->check(CLI::Range(0, 65535));
    serve->add_option("--ui-dir", ui_dir, "Built annotator bundle to serve at /");

    try {
        app.parse(argc, argv);
        if (detect->parsed())
            return cmd_detect(image, methods, overlay, shared);
        if (bench->parsed())
            return cmd_bench(manifest, bench_methods, repeat, jobs, !no_timing, shared);
        if (synth->parsed())
            return cmd_synth(count, proportions, shared);
        return cmd_annotate_serve(dir, serve_manifest, host, port, ui_dir);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }
}
