#ifndef PUPILBENCH_ANNOTATE_SERVER_HPP
#define PUPILBENCH_ANNOTATE_SERVER_HPP

// Local HTTP service behind the annotation UI.
//
//   GET  /                     static UI bundle (or a placeholder page)
//   GET  /api/images           [{"id", "annotated", "category"}] for every image in the directory
//   GET  /api/image/<id>       raw image bytes
//   GET  /api/annotation/<id>  annotation JSON, 404 when not annotated yet
//   PUT  /api/annotation/<id>  validate (r > 0, centre inside the image; 422 otherwise)
//                              and persist into the manifest via temp file + rename
//
// Image ids are file names inside the served directory. Writes are serialised
// by one mutex; reads share it briefly to copy state.

#include "pupilbench/codec.hpp"
#include "pupilbench/manifest.hpp"

// <resolv.h>, pulled in by httplib, defines a `_res` macro that breaks Eigen
// headers included after it.
#include <Eigen/Dense>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pupil {

class AnnotationStore {
public:
    AnnotationStore(std::filesystem::path image_dir, std::filesystem::path manifest_path)
        : dir_(std::move(image_dir)), manifest_path_(std::move(manifest_path))
    {
        std::error_code ec;
        if (!std::filesystem::is_directory(dir_, ec))
            throw std::runtime_error("not a readable directory: " + dir_.string());
        for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
            if (!entry.is_regular_file())
                continue;
            if (is_image_name(entry.path().filename().string()))
                ids_.push_back(entry.path().filename().string());
        }
        std::sort(ids_.begin(), ids_.end());
        if (std::filesystem::exists(manifest_path_))
            manifest_ = load_manifest(manifest_path_);
    }

    static bool is_image_name(const std::string& name)
    {
        std::string ext = std::filesystem::path(name).extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".pgm";
    }

    const std::vector<std::string>& ids() const { return ids_; }

    bool has_image(const std::string& id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

    std::filesystem::path image_path(const std::string& id) const { return dir_ / id; }

    nlohmann::json list() const
    {
        std::lock_guard lock(mutex_);
        nlohmann::json out = nlohmann::json::array();
        for (const std::string& id : ids_) {
            const DatasetEntry* e = find(id);
            out.push_back({{"id", id},
                           {"annotated", e != nullptr},
                           {"category", std::string(to_string(e ? e->category : Category::Clear))}});
        }
        return out;
    }

    std::optional<Annotation> get(const std::string& id) const
    {
        std::lock_guard lock(mutex_);
        if (const DatasetEntry* e = find(id))
            return e->annotation;
        return std::nullopt;
    }

    /// Validates against the image size and persists. Throws ManifestError on
    /// invalid input.
    Annotation put(const std::string& id, const nlohmann::json& body)
    {
        Annotation a = annotation_from_json(body);
        std::optional<Category> category;
        if (body.contains("category")) {
            if (!body.at("category").is_string() || !(category = parse_category(body.at("category").get<std::string>())))
                throw ManifestError("unknown category");
        }
        if (!body.contains("timestamp"))
            a.timestamp = std::chrono::duration_cast<std::chrono::seconds>(
                              std::chrono::system_clock::now().time_since_epoch())
                              .count();

        std::lock_guard lock(mutex_);
        const auto [w, h] = dimensions(id);
        if (a.cx < 0.0 || a.cy < 0.0 || a.cx >= w || a.cy >= h)
            throw ManifestError("annotation centre lies outside the image");

        Manifest next = manifest_;
        auto it = std::find_if(next.images.begin(), next.images.end(), [&](const DatasetEntry& e) { return e.path == id; });
        if (it == next.images.end()) {
            next.images.push_back({id, category.value_or(Category::Clear), a});
        } else {
            it->annotation = a;
            if (category)
                it->category = *category;
        }
        save_manifest_atomic(next, manifest_path_);
        manifest_ = std::move(next);
        return a;
    }

private:
    const DatasetEntry* find(const std::string& id) const
    {
        for (const DatasetEntry& e : manifest_.images)
            if (e.path == id)
                return &e;
        return nullptr;
    }

    // Caller holds the mutex.
    std::pair<int, int> dimensions(const std::string& id)
    {
        auto it = dims_.find(id);
        if (it == dims_.end()) {
            const GrayImage img = load_image(image_path(id));
            it = dims_.emplace(id, std::pair{img.width(), img.height()}).first;
        }
        return it->second;
    }

    std::filesystem::path dir_;
    std::filesystem::path manifest_path_;
    std::vector<std::string> ids_;
    Manifest manifest_;
    std::map<std::string, std::pair<int, int>> dims_;
    mutable std::mutex mutex_;
};

inline constexpr const char* kPlaceholderPage =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>pupilbench annotator</title></head>"
    "<body><h1>pupilbench annotator</h1><p>No UI bundle configured. Start the server with "
    "<code>--ui-dir</code> pointing at the built annotator, or use the JSON API under "
    "<code>/api/</code>.</p></body></html>";

class AnnotationServer {
public:
    explicit AnnotationServer(AnnotationStore& store, std::optional<std::filesystem::path> ui_dir = std::nullopt)
        : store_(store)
    {
        if (ui_dir) {
            if (!server_.set_mount_point("/", ui_dir->string()))
                throw std::runtime_error("cannot serve UI directory " + ui_dir->string());
        } else {
            server_.Get("/", [](const httplib::Request&, httplib::Response& res) {
                res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
            });
        }
        server_.Get("/api/images", [this](const httplib::Request&, httplib::Response& res) {
            res.set_content(store_.list().dump(), "application/json; charset=utf-8");
        });
        server_.Get(R"(/api/image/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            if (!valid_id(id)) {
                error(res, 404, "unknown image");
                return;
            }
            try {
                const auto bytes = read_file(store_.image_path(id));
                res.set_content(std::string(bytes.begin(), bytes.end()), content_type(id));
            } catch (const std::exception& e) {
                error(res, 500, e.what());
            }
        });
        server_.Get(R"(/api/annotation/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            if (!valid_id(id)) {
                error(res, 404, "unknown image");
                return;
            }
            const auto a = store_.get(id);
            if (!a) {
                error(res, 404, "not annotated");
                return;
            }
            res.set_content(to_json(*a).dump(), "application/json; charset=utf-8");
        });
        server_.Put(R"(/api/annotation/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            if (!valid_id(id)) {
                error(res, 404, "unknown image");
                return;
            }
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::exception&) {
                error(res, 400, "body is not valid JSON");
                return;
            }
            try {
                const Annotation saved = store_.put(id, body);
                res.set_content(to_json(saved).dump(), "application/json; charset=utf-8");
            } catch (const ManifestError& e) {
                error(res, 422, e.what());
            } catch (const std::exception& e) {
                error(res, 500, e.what());
            }
        });
    }

    /// Binds without serving yet. Port 0 picks a free port. Returns the bound
    /// port, or -1 when binding failed.
    int bind(const std::string& host, int port)
    {
        if (port == 0)
            return server_.bind_to_any_port(host);
        return server_.bind_to_port(host, port) ? port : -1;
    }

    /// Blocks until stop() is called.
    bool serve() { return server_.listen_after_bind(); }

    void stop() { server_.stop(); }

    void wait_until_ready() const { server_.wait_until_ready(); }

private:
    bool valid_id(const std::string& id) const
    {
        return id.find("..") == std::string::npos && store_.has_image(id);
    }

    static std::string content_type(const std::string& id)
    {
        std::string ext = std::filesystem::path(id).extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".png")
            return "image/png";
        if (ext == ".jpg" || ext == ".jpeg")
            return "image/jpeg";
        return "image/x-portable-graymap";
    }

    static void error(httplib::Response& res, int status, const std::string& msg)
    {
        res.status = status;
        res.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json; charset=utf-8");
    }

    AnnotationStore& store_;
    httplib::Server server_;
};

} // namespace pupil

#endif // PUPILBENCH_ANNOTATE_SERVER_HPP
