#ifndef PUPILBENCH_CODEC_HPP
#define PUPILBENCH_CODEC_HPP

#include "pupilbench/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pupil {

class DecodeError : public std::runtime_error {
public:
    explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline bool is_pgm(std::span<const std::uint8_t> b) { return b.size() >= 2 && b[0] == 'P' && b[1] == '5'; }
inline bool is_png(std::span<const std::uint8_t> b)
{
    static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    return b.size() >= 8 && std::equal(sig, sig + 8, b.begin());
}
inline bool is_jpeg(std::span<const std::uint8_t> b) { return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF; }

// libjpeg decodes a truncated stream into a partially grey image instead of
// failing, so require the EOI marker (trailing zero padding allowed).
inline bool jpeg_has_eoi(std::span<const std::uint8_t> b)
{
    std::size_t n = b.size();
    while (n > 0 && b[n - 1] == 0x00)
        --n;
    return n >= 4 && b[n - 2] == 0xFF && b[n - 1] == 0xD9;
}

inline GrayImage decode_pgm(std::span<const std::uint8_t> b)
{
    std::size_t pos = 2;
    auto skip_space = [&] {
        while (pos < b.size()) {
            if (b[pos] == '#') {
                while (pos < b.size() && b[pos] != '\n')
                    ++pos;
            } else if (std::isspace(b[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> long {
        skip_space();
        if (pos >= b.size() || !std::isdigit(b[pos]))
            throw DecodeError("malformed PGM header");
        long v = 0;
        while (pos < b.size() && std::isdigit(b[pos])) {
            v = v * 10 + (b[pos] - '0');
            if (v > 1'000'000)
                throw DecodeError("PGM dimension out of range");
            ++pos;
        }
        return v;
    };
    const long w = read_int();
    const long h = read_int();
    const long maxval = read_int();
    if (w < 1 || h < 1)
        throw DecodeError("PGM has zero dimension");
    if (maxval != 255)
        throw DecodeError("only 8-bit PGM (maxval 255) is supported");
    if (pos >= b.size() || !std::isspace(b[pos]))
        throw DecodeError("malformed PGM header");
    ++pos;
    const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (b.size() - pos < n)
        throw DecodeError("truncated PGM payload");
    std::vector<std::uint8_t> data(b.begin() + static_cast<std::ptrdiff_t>(pos),
                                   b.begin() + static_cast<std::ptrdiff_t>(pos + n));
    return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

inline std::uint8_t luminance(double r, double g, double bl)
{
    const double y = 0.299 * r + 0.587 * g + 0.114 * bl;
    return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

inline GrayImage from_mat(const cv::Mat& m)
{
    cv::Mat src = m;
    if (src.depth() == CV_16U)
        src.convertTo(src, CV_8U, 1.0 / 257.0);
    if (src.depth() != CV_8U)
        throw DecodeError("unsupported sample depth");
    GrayImage out(src.cols, src.rows);
    const int ch = src.channels();
    for (int y = 0; y < src.rows; ++y) {
        const std::uint8_t* row = src.ptr<std::uint8_t>(y);
        for (int x = 0; x < src.cols; ++x) {
            const std::uint8_t* px = row + static_cast<std::ptrdiff_t>(x) * ch;
            if (ch == 1 || ch == 2)
                out(x, y) = px[0];
            else // OpenCV stores BGR(A)
                out(x, y) = luminance(px[2], px[1], px[0]);
        }
    }
    return out;
}

} // namespace detail

/// Decodes a PNG, JPEG or binary PGM payload into 8-bit luminance.
inline GrayImage decode(std::span<const std::uint8_t> bytes)
{
    if (detail::is_pgm(bytes))
        return detail::decode_pgm(bytes);
    if (!detail::is_png(bytes) && !detail::is_jpeg(bytes))
        throw DecodeError("unrecognised image format");
    if (detail::is_jpeg(bytes) && !detail::jpeg_has_eoi(bytes))
        throw DecodeError("truncated JPEG stream");

    cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8U, const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat m;
    try {
        m = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
    } catch (const cv::Exception& e) {
        throw DecodeError(e.what());
    }
    if (m.empty())
        throw DecodeError("malformed image payload");
    return detail::from_mat(m);
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

inline GrayImage load_image(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    return decode(bytes);
}

inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img)
{
    const std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.data().begin(), img.data().end());
    return out;
}

inline std::vector<std::uint8_t> encode_png(const GrayImage& img)
{
    cv::Mat m(img.height(), img.width(), CV_8UC1, const_cast<std::uint8_t*>(img.data().data()));
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", m, out))
        throw std::runtime_error("PNG encoding failed");
    return out;
}

/// Encodes interleaved RGB samples (3 bytes per pixel, row-major) as PNG.
inline std::vector<std::uint8_t> encode_png_rgb(int width, int height, std::span<const std::uint8_t> rgb)
{
    if (rgb.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3)
        throw std::invalid_argument("RGB buffer size mismatch");
    cv::Mat m(height, width, CV_8UC3);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
            m.at<cv::Vec3b>(y, x) = cv::Vec3b(rgb[i + 2], rgb[i + 1], rgb[i]);
        }
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", m, out))
        throw std::runtime_error("PNG encoding failed");
    return out;
}

} // namespace pupil

#endif // PUPILBENCH_CODEC_HPP
