#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace infiltra {

// Row-major 2D grid with value semantics. (x, y) addresses column x of row y.
template <typename T>
class Grid {
  public:
    Grid() = default;
    Grid(std::size_t width, std::size_t height, T fill = T{})
        : width_(width), height_(height), data_(width * height, fill) {}

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& at(std::size_t x, std::size_t y) {
        assert(x < width_ && y < height_);
        return data_[y * width_ + x];
    }
    const T& at(std::size_t x, std::size_t y) const {
        assert(x < width_ && y < height_);
        return data_[y * width_ + x];
    }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T* row(std::size_t y) { return data_.data() + y * width_; }
    const T* row(std::size_t y) const { return data_.data() + y * width_; }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }

    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Grid&, const Grid&) = default;

  private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<T> data_;
};

using MaskGrid = Grid<std::uint8_t>;

}  // namespace infiltra
