#ifndef PUPILBENCH_IMAGE_HPP
#define PUPILBENCH_IMAGE_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pupil {

class ImageTooSmall : public std::invalid_argument {
public:
    explicit ImageTooSmall(const std::string& what) : std::invalid_argument(what) {}
};

struct PixelCoord {
    int x = 0;
    int y = 0;

    friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct Point2d {
    double x = 0.0;
    double y = 0.0;
};

// Row-major 2D grid. Pixel (x, y) is column x, row y; the pixel centre sits
// at integer coordinates.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;

    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height)
    {
        if (width < 1 || height < 1)
            throw std::invalid_argument("grid dimensions must be >= 1");
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Grid(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        if (width < 1 || height < 1)
            throw std::invalid_argument("grid dimensions must be >= 1");
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            throw std::invalid_argument("grid data length must equal width * height");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    bool contains(int x, int y) const noexcept
    {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }
    bool contains(PixelCoord p) const noexcept { return contains(p.x, p.y); }

    T& operator()(int x, int y) { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const { return data_[index(x, y)]; }
    T& operator[](PixelCoord p) { return data_[index(p.x, p.y)]; }
    const T& operator[](PixelCoord p) const { return data_[index(p.x, p.y)]; }

    // Border-replicating read.
    const T& clamped(int x, int y) const
    {
        x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
        y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
        return data_[index(x, y)];
    }

    const std::vector<T>& data() const noexcept { return data_; }
    std::vector<T>& data() noexcept { return data_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// 8-bit intensity image, values in [0, 255].
using GrayImage = Grid<std::uint8_t>;

/// Values in {0, 1}.
using BinaryImage = Grid<std::uint8_t>;

/// Real-valued field (smoothing input/output, projection images, symmetry maps).
using RealField = Grid<double>;

inline RealField to_real(const GrayImage& img)
{
    std::vector<double> v(img.data().begin(), img.data().end());
    return RealField(img.width(), img.height(), std::move(v));
}

} // namespace pupil

#endif // PUPILBENCH_IMAGE_HPP
