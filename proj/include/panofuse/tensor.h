// Copyright 2026 The Panofuse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PANOFUSE_TENSOR_H_
#define PANOFUSE_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace panofuse {

// Dense row-major 2-D grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, T fill = T{})
      : height_(height), width_(width) {
    if (height < 0 || width < 0) {
      throw std::invalid_argument("Grid: negative dimension");
    }
    data_.assign(static_cast<std::size_t>(height) * width, fill);
  }
  Grid(int height, int width, std::vector<T> values)
      : height_(height), width_(width), data_(std::move(values)) {
    if (height < 0 || width < 0 ||
        data_.size() != static_cast<std::size_t>(height) * width) {
      throw std::invalid_argument("Grid: value count does not match dims");
    }
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int y, int x) {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& operator()(int y, int x) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }
  const T* row(int y) const {
    return data_.data() + static_cast<std::size_t>(y) * width_;
  }

  bool operator==(const Grid&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

using RealGrid = Grid<double>;
// Category or channel indices; negative values mark void / ignore.
using LabelGrid = Grid<int32_t>;
using MaskGrid = Grid<uint8_t>;

inline constexpr int32_t kVoidLabel = -1;

// Channel-major (C x H x W) tensor of finite logits.
class LogitTensor {
 public:
  LogitTensor() = default;
  LogitTensor(int channels, int height, int width, double fill = 0.0);
  // Validates the element count and that every value is finite.
  LogitTensor(int channels, int height, int width, std::vector<double> data);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * width_;
  }

  double at(int c, int y, int x) const {
    return data_[c * plane_size() + static_cast<std::size_t>(y) * width_ + x];
  }
  double& at(int c, int y, int x) {
    return data_[c * plane_size() + static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<const double> channel(int c) const {
    return std::span<const double>(data_).subspan(c * plane_size(),
                                                  plane_size());
  }
  std::span<double> channel(int c) {
    return std::span<double>(data_).subspan(c * plane_size(), plane_size());
  }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  RealGrid ChannelGrid(int c) const;
  void SetChannel(int c, const RealGrid& grid);

  bool operator==(const LogitTensor&) const = default;

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

// Integer pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  int64_t area() const {
    return empty() ? 0 : static_cast<int64_t>(width()) * height();
  }
  bool Contains(int y, int x) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
  bool operator==(const PixelRect&) const = default;
};

// Real-valued box, half-open on the high side.
struct BBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double Area() const;
  bool IsValid() const;
  // Pixels whose centers fall inside the box, clamped to the image.
  PixelRect Rasterize(int image_height, int image_width) const;
  bool operator==(const BBox&) const = default;
};

// 28x28 grid of mask logits predicted for one instance.
class MaskPatch {
 public:
  static constexpr int kSide = 28;
  static constexpr int kSize = kSide * kSide;

  MaskPatch() : grid_(kSide, kSide, 0.0) {}
  explicit MaskPatch(std::vector<double> values);
  explicit MaskPatch(RealGrid grid);

  const RealGrid& grid() const { return grid_; }
  double operator()(int y, int x) const { return grid_(y, x); }

 private:
  RealGrid grid_;
};

struct Category {
  int id = 0;
  std::string name;
  bool is_thing = false;
};

// Categories in canonical channel order: every stuff category precedes every
// thing category.
class CategorySet {
 public:
  CategorySet() = default;
  explicit CategorySet(std::vector<Category> categories);

  int size() const { return static_cast<int>(categories_.size()); }
  int n_stuff() const { return n_stuff_; }
  int n_thing() const { return size() - n_stuff_; }
  const Category& at(int index) const { return categories_.at(index); }
  const std::vector<Category>& categories() const { return categories_; }

  bool IsThing(int index) const {
    return index >= n_stuff_ && index < size();
  }
  bool IsStuff(int index) const { return index >= 0 && index < n_stuff_; }
  std::optional<int> IndexOfId(int id) const;

 private:
  std::vector<Category> categories_;
  int n_stuff_ = 0;
};

// Bilinear sampling with half-pixel centers: src = (dst + 0.5) * in / out - 0.5
// clamped to [0, in - 1].
struct AxisSample {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;
};
std::vector<AxisSample> BilinearAxisSamples(int in_size, int out_size);

RealGrid BilinearResize(const RealGrid& grid, int out_height, int out_width);

// Image coordinate sampled by cell `cell` of a 28x28 patch spanning [lo, hi)
// along one axis: floor(lo + (cell + 0.5) * (hi - lo) / 28).
int PatchCellToPixel(double lo, double hi, int cell);

LogitTensor ChannelSoftmax(const LogitTensor& logits);

// Lowest channel index wins ties.
LabelGrid ChannelArgmax(const LogitTensor& logits);

// Element-wise mean of equally sized logit maps (e.g. multi-scale test
// outputs already resized and unflipped by the caller).
LogitTensor AverageLogitMaps(std::span<const LogitTensor> maps);

}  // namespace panofuse

#endif  // PANOFUSE_TENSOR_H_
