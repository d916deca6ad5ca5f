#ifndef PUPILBENCH_MANIFEST_HPP
#define PUPILBENCH_MANIFEST_HPP

// Dataset manifest: the list of benchmark images with their robustness
// category and ground-truth annotation. Stored as UTF-8 JSON:
//   { "version": 1, "images": [ { "path", "category", "annotation": {
//       "cx", "cy", "r", "annotator", "timestamp" } } ] }
// Paths are relative to the manifest's directory.

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace pupil {

class ManifestError : public std::runtime_error {
public:
    explicit ManifestError(const std::string& what) : std::runtime_error(what) {}
};

enum class Category { Clear, HairEyelashes, Eyelid, GlassesReflections };

inline constexpr std::array<Category, 4> kAllCategories{Category::Clear, Category::HairEyelashes, Category::Eyelid,
                                                        Category::GlassesReflections};

inline std::string_view to_string(Category c)
{
    switch (c) {
    case Category::Clear: return "clear";
    case Category::HairEyelashes: return "hair_eyelashes";
    case Category::Eyelid: return "eyelid";
    case Category::GlassesReflections: return "glasses_reflections";
    }
    return "?";
}

inline std::optional<Category> parse_category(std::string_view s)
{
    for (Category c : kAllCategories)
        if (to_string(c) == s)
            return c;
    return std::nullopt;
}

struct Annotation {
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;
    std::string annotator;
    std::int64_t timestamp = 0; // UTC seconds

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct DatasetEntry {
    std::string path;
    Category category = Category::Clear;
    Annotation annotation;
};

struct Manifest {
    int version = 1;
    std::vector<DatasetEntry> images;
};

inline nlohmann::json to_json(const Annotation& a)
{
    return {{"cx", a.cx}, {"cy", a.cy}, {"r", a.r}, {"annotator", a.annotator}, {"timestamp", a.timestamp}};
}

/// Parses and validates an annotation object; throws ManifestError.
inline Annotation annotation_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw ManifestError("annotation must be an object");
    const auto number = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number())
            throw ManifestError(std::string("annotation field '") + key + "' must be a number");
        const double v = j.at(key).get<double>();
        if (!std::isfinite(v))
            throw ManifestError(std::string("annotation field '") + key + "' must be finite");
        return v;
    };
    Annotation a;
    a.cx = number("cx");
    a.cy = number("cy");
    a.r = number("r");
    if (!(a.r > 0.0))
        throw ManifestError("annotation radius must be > 0");
    if (j.contains("annotator")) {
        if (!j.at("annotator").is_string())
            throw ManifestError("annotation field 'annotator' must be a string");
        a.annotator = j.at("annotator").get<std::string>();
    }
    if (j.contains("timestamp")) {
        if (!j.at("timestamp").is_number_integer())
            throw ManifestError("annotation field 'timestamp' must be an integer");
        a.timestamp = j.at("timestamp").get<std::int64_t>();
    }
    return a;
}

inline nlohmann::json to_json(const Manifest& m)
{
    nlohmann::json images = nlohmann::json::array();
    for (const DatasetEntry& e : m.images)
        images.push_back({{"path", e.path}, {"category", std::string(to_string(e.category))}, {"annotation", to_json(e.annotation)}});
    return {{"version", m.version}, {"images", std::move(images)}};
}

inline Manifest manifest_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw ManifestError("manifest must be a JSON object");
    if (!j.contains("version") || j.at("version") != 1)
        throw ManifestError("unsupported manifest version");
    if (!j.contains("images") || !j.at("images").is_array())
        throw ManifestError("manifest 'images' must be an array");
    Manifest m;
    for (const auto& item : j.at("images")) {
        if (!item.is_object() || !item.contains("path") || !item.at("path").is_string())
            throw ManifestError("manifest entry needs a string 'path'");
        DatasetEntry e;
        e.path = item.at("path").get<std::string>();
        if (!item.contains("category") || !item.at("category").is_string())
            throw ManifestError("manifest entry '" + e.path + "' needs a 'category'");
        const auto cat = parse_category(item.at("category").get<std::string>());
        if (!cat)
            throw ManifestError("manifest entry '" + e.path + "' has unknown category");
        e.category = *cat;
        if (!item.contains("annotation"))
            throw ManifestError("manifest entry '" + e.path + "' has no annotation");
        e.annotation = annotation_from_json(item.at("annotation"));
        m.images.push_back(std::move(e));
    }
    return m;
}

inline Manifest load_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ManifestError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError("manifest is not valid JSON: " + std::string(e.what()));
    }
    return manifest_from_json(j);
}

inline std::string serialize_manifest(const Manifest& m)
{
    return to_json(m).dump(2) + "\n";
}

/// Writes the manifest to a sibling temporary file and renames it over the
/// target, so readers never see a partial file.
inline void save_manifest_atomic(const Manifest& m, const std::filesystem::path& path)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ManifestError("cannot write " + tmp.string());
        out << serialize_manifest(m);
        out.flush();
        if (!out)
            throw ManifestError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw ManifestError("cannot replace " + path.string() + ": " + ec.message());
}

} // namespace pupil

#endif // PUPILBENCH_MANIFEST_HPP
