#ifndef PUPILBENCH_DETECTION_HPP
#define PUPILBENCH_DETECTION_HPP

#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace pupil {

/// Circle in full-resolution pixel coordinates.
struct Circle {
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;
};

/// Ellipse with semi-axes a >= b > 0 and orientation theta in [-pi/2, pi/2)
/// (angle of the major axis from +x, y pointing down).
struct Ellipse {
    double cx = 0.0;
    double cy = 0.0;
    double a = 0.0;
    double b = 0.0;
    double theta = 0.0;
};

enum class Method { CHT, EF, IDO, RST };

inline constexpr std::array<Method, 4> kAllMethods{Method::CHT, Method::EF, Method::IDO, Method::RST};

inline std::string_view to_string(Method m)
{
    switch (m) {
    case Method::CHT: return "CHT";
    case Method::EF: return "EF";
    case Method::IDO: return "IDO";
    case Method::RST: return "RST";
    }
    return "?";
}

/// Accepts "cht", "CHT", ...
inline std::optional<Method> parse_method(std::string_view s)
{
    for (Method m : kAllMethods) {
        const std::string_view name = to_string(m);
        if (name.size() != s.size())
            continue;
        bool eq = true;
        for (std::size_t i = 0; i < s.size(); ++i)
            eq = eq && (std::toupper(static_cast<unsigned char>(s[i])) == name[i]);
        if (eq)
            return m;
    }
    return std::nullopt;
}

/// Raised by detectors when no pupil can be reported. `code` is a stable
/// identifier such as "NoEdges" or "FlatImage".
class DetectionError : public std::runtime_error {
public:
    DetectionError(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

using Shape = std::variant<std::monostate, Circle, Ellipse>;

struct Detection {
    Method method = Method::CHT;
    double cx = std::numeric_limits<double>::quiet_NaN();
    double cy = std::numeric_limits<double>::quiet_NaN();
    Shape shape;
    double score = 0.0;
    double elapsed = 0.0; // seconds
    std::optional<std::string> error;

    bool ok() const noexcept { return !error.has_value(); }

    static Detection failed(Method m, std::string code)
    {
        Detection d;
        d.method = m;
        d.error = std::move(code);
        return d;
    }
};

/// Runs `fn` and returns its result with the elapsed wall-clock time in seconds.
template <typename Fn>
auto timed(Fn&& fn)
{
    const auto t0 = std::chrono::steady_clock::now();
    auto result = fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::pair{std::move(result), std::chrono::duration<double>(t1 - t0).count()};
}

} // namespace pupil

#endif // PUPILBENCH_DETECTION_HPP
