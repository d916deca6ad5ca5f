#ifndef PUPILBENCH_REPORT_HPP
#define PUPILBENCH_REPORT_HPP

// Report rendering. JSON is the canonical machine form; markdown carries the
// accuracy table (hits/total per category plus the pooled global rate), the
// robustness table (per-category rates plus their unweighted average) and the
// timing table. Both renderings are byte-stable for equal input.

#include "pupilbench/bench.hpp"
#include "pupilbench/metrics.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <string>

namespace pupil {

enum class ReportFormat { Json, Markdown };

struct ReportOptions {
    bool include_timing = true;
};

inline nlohmann::ordered_json report_to_json(const BenchReport& r, const ReportOptions& opt = {})
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["version"] = 1;
    j["methods"] = ordered_json::array();
    for (Method m : r.methods)
        j["methods"].push_back(std::string(to_string(m)));
    j["categories"] = ordered_json::array();
    for (Category c : r.categories)
        j["categories"].push_back(std::string(to_string(c)));
    j["cells"] = ordered_json::array();
    for (const ReportCell& c : r.cells) {
        ordered_json cell;
        cell["method"] = std::string(to_string(c.method));
        cell["category"] = std::string(to_string(c.category));
        cell["hits"] = c.hits;
        cell["total"] = c.total;
        cell["rate"] = c.rate;
        j["cells"].push_back(std::move(cell));
    }
    j["global"] = ordered_json::array();
    for (const ReportGlobal& g : r.global) {
        ordered_json o;
        o["method"] = std::string(to_string(g.method));
        o["rate"] = g.rate;
        o["avg_robustness"] = g.avg_robustness;
        j["global"].push_back(std::move(o));
    }
    if (opt.include_timing) {
        j["timing"] = ordered_json::array();
        for (const ReportTiming& t : r.timing) {
            ordered_json o;
            o["method"] = std::string(to_string(t.method));
            o["mean_s"] = t.mean_s;
            o["median_s"] = t.median_s;
            o["min_s"] = t.min_s;
            o["max_s"] = t.max_s;
            j["timing"].push_back(std::move(o));
        }
    }
    return j;
}

/// Inverse of report_to_json. Global hit counts are rebuilt from the cells.
inline BenchReport report_from_json(const nlohmann::json& j)
{
    const auto method = [](const nlohmann::json& v) {
        const auto m = parse_method(v.get<std::string>());
        if (!m)
            throw std::invalid_argument("unknown method in report");
        return *m;
    };
    const auto category = [](const nlohmann::json& v) {
        const auto c = parse_category(v.get<std::string>());
        if (!c)
            throw std::invalid_argument("unknown category in report");
        return *c;
    };
    BenchReport r;
    for (const auto& m : j.at("methods"))
        r.methods.push_back(method(m));
    for (const auto& c : j.at("categories"))
        r.categories.push_back(category(c));
    for (const auto& c : j.at("cells"))
        r.cells.push_back({method(c.at("method")), category(c.at("category")), c.at("hits").get<std::size_t>(),
                           c.at("total").get<std::size_t>(), c.at("rate").get<double>()});
    for (const auto& g : j.at("global")) {
        ReportGlobal out{method(g.at("method"))};
        out.rate = g.at("rate").get<double>();
        out.avg_robustness = g.at("avg_robustness").get<double>();
        for (const ReportCell& c : r.cells)
            if (c.method == out.method) {
                out.hits += c.hits;
                out.total += c.total;
            }
        r.global.push_back(out);
    }
    if (j.contains("timing"))
        for (const auto& t : j.at("timing"))
            r.timing.push_back({method(t.at("method")), t.at("mean_s").get<double>(), t.at("median_s").get<double>(),
                                t.at("min_s").get<double>(), t.at("max_s").get<double>()});
    return r;
}

inline std::string render_markdown(const BenchReport& r, const ReportOptions& opt = {})
{
    std::string md;
    const auto header = [&](const std::string& first, const char* suffix) {
        md += "| " + first + " |";
        for (Method m : r.methods)
            md += " " + std::string(to_string(m)) + suffix + " |";
        md += "\n|---|";
        for (std::size_t i = 0; i < r.methods.size(); ++i)
            md += "---:|";
        md += "\n";
    };

    md += "## Accuracy\n\n";
    header("Category", "");
    for (Category c : r.categories) {
        md += "| " + std::string(to_string(c)) + " |";
        for (Method m : r.methods) {
            const ReportCell& cell = r.cell(m, c);
            md += " " + std::to_string(cell.hits) + "/" + std::to_string(cell.total) + " (" + format_percent(cell.rate) +
                  "%) |";
        }
        md += "\n";
    }
    md += "| Global hit rate (%) |";
    for (Method m : r.methods)
        md += " " + format_percent(r.global_for(m).rate) + " |";
    md += "\n\n## Robustness\n\n";
    header("Category", " (%)");
    for (Category c : r.categories) {
        md += "| " + std::string(to_string(c)) + " |";
        for (Method m : r.methods)
            md += " " + format_percent(r.cell(m, c).rate) + " |";
        md += "\n";
    }
    md += "| Average robustness (%) |";
    for (Method m : r.methods)
        md += " " + format_percent(r.global_for(m).avg_robustness) + " |";
    md += "\n";

    if (opt.include_timing && !r.timing.empty()) {
        md += "\n## Timing (seconds per image)\n\n| Method | mean | median | min | max |\n|---|---:|---:|---:|---:|\n";
        for (const ReportTiming& t : r.timing) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "| %s | %.6f | %.6f | %.6f | %.6f |\n", std::string(to_string(t.method)).c_str(),
                          t.mean_s, t.median_s, t.min_s, t.max_s);
            md += buf;
        }
    }
    return md;
}

inline std::string render_report(const BenchReport& r, ReportFormat format, const ReportOptions& opt = {})
{
    if (format == ReportFormat::Json)
        return report_to_json(r, opt).dump(2) + "\n";
    return render_markdown(r, opt);
}

/// Short plain-text global table for terminals.
inline std::string render_global_table(const BenchReport& r)
{
    std::string out = "method  global_hit_rate  avg_robustness  median_s\n";
    for (Method m : r.methods) {
        char buf[128];
        const ReportGlobal& g = r.global_for(m);
        std::snprintf(buf, sizeof buf, "%-6s  %15s  %14s  %8.4f\n", std::string(to_string(m)).c_str(),
                      format_percent(g.rate).c_str(), format_percent(g.avg_robustness).c_str(),
                      r.timing_for(m).median_s);
        out += buf;
    }
    return out;
}

} // namespace pupil

#endif // PUPILBENCH_REPORT_HPP
