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

#include "panofuse/tensor.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace panofuse {

namespace {

void CheckDims(int channels, int height, int width) {
  if (channels < 1 || height < 1 || width < 1) {
    throw std::invalid_argument("LogitTensor: dimensions must be positive");
  }
}

}  // namespace

LogitTensor::LogitTensor(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  CheckDims(channels, height, width);
  if (!std::isfinite(fill)) {
    throw std::invalid_argument("LogitTensor: non-finite fill value");
  }
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

LogitTensor::LogitTensor(int channels, int height, int width,
                         std::vector<double> data)
    : channels_(channels), height_(height), width_(width),
      data_(std::move(data)) {
  CheckDims(channels, height, width);
  if (data_.size() != static_cast<std::size_t>(channels) * height * width) {
    throw std::invalid_argument("LogitTensor: data length != C*H*W");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("LogitTensor: non-finite element");
    }
  }
}

RealGrid LogitTensor::ChannelGrid(int c) const {
  auto plane = channel(c);
  return RealGrid(height_, width_,
                  std::vector<double>(plane.begin(), plane.end()));
}

void LogitTensor::SetChannel(int c, const RealGrid& grid) {
  if (grid.height() != height_ || grid.width() != width_) {
    throw std::invalid_argument("SetChannel: grid dims mismatch");
  }
  std::copy(grid.values().begin(), grid.values().end(), channel(c).begin());
}

double BBox::Area() const {
  return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0);
}

bool BBox::IsValid() const {
  return std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) &&
         std::isfinite(y1) && x0 <= x1 && y0 <= y1;
}

PixelRect BBox::Rasterize(int image_height, int image_width) const {
  auto lo = [](double v, int limit) {
    double c = std::ceil(v - 0.5);
    return static_cast<int>(std::clamp(c, 0.0, static_cast<double>(limit)));
  };
  PixelRect r{lo(x0, image_width), lo(y0, image_height), lo(x1, image_width),
              lo(y1, image_height)};
  if (r.empty()) return PixelRect{r.x0, r.y0, r.x0, r.y0};
  return r;
}

MaskPatch::MaskPatch(std::vector<double> values)
    : MaskPatch(RealGrid(kSide, kSide, [&] {
        if (values.size() != kSize) {
          throw std::invalid_argument("MaskPatch: expected 784 values");
        }
        return std::move(values);
      }())) {}

MaskPatch::MaskPatch(RealGrid grid) : grid_(std::move(grid)) {
  if (grid_.height() != kSide || grid_.width() != kSide) {
    throw std::invalid_argument("MaskPatch: expected a 28x28 grid");
  }
  for (double v : grid_.values()) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("MaskPatch: non-finite value");
    }
  }
}

CategorySet::CategorySet(std::vector<Category> categories)
    : categories_(std::move(categories)) {
  bool seen_thing = false;
  for (const Category& c : categories_) {
    if (c.is_thing) {
      seen_thing = true;
    } else if (seen_thing) {
      throw std::invalid_argument(
          "CategorySet: stuff category '" + c.name +
          "' follows a thing category");
    } else {
      ++n_stuff_;
    }
  }
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    for (std::size_t j = i + 1; j < categories_.size(); ++j) {
      if (categories_[i].id == categories_[j].id) {
        throw std::invalid_argument("CategorySet: duplicate category id " +
                                    std::to_string(categories_[i].id));
      }
    }
  }
}

std::optional<int> CategorySet::IndexOfId(int id) const {
  for (int i = 0; i < size(); ++i) {
    if (categories_[i].id == id) return i;
  }
  return std::nullopt;
}

std::vector<AxisSample> BilinearAxisSamples(int in_size, int out_size) {
  std::vector<AxisSample> samples(out_size);
  const double scale = static_cast<double>(in_size) / out_size;
  for (int d = 0; d < out_size; ++d) {
    double src = (d + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in_size - 1));
    const int lo = static_cast<int>(std::floor(src));
    samples[d] = {lo, std::min(lo + 1, in_size - 1), src - lo};
  }
  return samples;
}

RealGrid BilinearResize(const RealGrid& grid, int out_height, int out_width) {
  if (grid.height() < 1 || grid.width() < 1 || out_height < 1 ||
      out_width < 1) {
    throw std::invalid_argument("BilinearResize: zero-sized dimension");
  }
  if (grid.height() == out_height && grid.width() == out_width) return grid;

  const auto ys = BilinearAxisSamples(grid.height(), out_height);
  const auto xs = BilinearAxisSamples(grid.width(), out_width);
  RealGrid out(out_height, out_width);
  for (int y = 0; y < out_height; ++y) {
    const AxisSample& sy = ys[y];
    const double* top = grid.row(sy.lo);
    const double* bottom = grid.row(sy.hi);
    double* dst = out.row(y);
    for (int x = 0; x < out_width; ++x) {
      const AxisSample& sx = xs[x];
      // Lerp form keeps constant inputs exact.
      const double t = top[sx.lo] + sx.frac * (top[sx.hi] - top[sx.lo]);
      const double b =
          bottom[sx.lo] + sx.frac * (bottom[sx.hi] - bottom[sx.lo]);
      dst[x] = t + sy.frac * (b - t);
    }
  }
  return out;
}

int PatchCellToPixel(double lo, double hi, int cell) {
  return static_cast<int>(
      std::floor(lo + (cell + 0.5) * (hi - lo) / MaskPatch::kSide));
}

LogitTensor ChannelSoftmax(const LogitTensor& logits) {
  const int channels = logits.channels();
  const std::size_t n = logits.plane_size();
  std::vector<double> peak(n, -std::numeric_limits<double>::infinity());
  for (int c = 0; c < channels; ++c) {
    auto plane = logits.channel(c);
    for (std::size_t i = 0; i < n; ++i) peak[i] = std::max(peak[i], plane[i]);
  }
  LogitTensor out(channels, logits.height(), logits.width());
  std::vector<double> total(n, 0.0);
  for (int c = 0; c < channels; ++c) {
    auto src = logits.channel(c);
    auto dst = out.channel(c);
    for (std::size_t i = 0; i < n; ++i) {
      dst[i] = std::exp(src[i] - peak[i]);
      total[i] += dst[i];
    }
  }
  for (int c = 0; c < channels; ++c) {
    auto dst = out.channel(c);
    for (std::size_t i = 0; i < n; ++i) dst[i] /= total[i];
  }
  return out;
}

LabelGrid ChannelArgmax(const LogitTensor& logits) {
  const int w = logits.width();
  LabelGrid labels(logits.height(), w, 0);
  if (logits.channels() == 0) return labels;
  // Row at a time so the running maximum stays in cache.
  std::vector<double> best(w);
  for (int y = 0; y < logits.height(); ++y) {
    const std::size_t offset = static_cast<std::size_t>(y) * w;
    int32_t* out = labels.row(y);
    const double* first = logits.channel(0).data() + offset;
    std::copy(first, first + w, best.begin());
    for (int c = 1; c < logits.channels(); ++c) {
      const double* plane = logits.channel(c).data() + offset;
      for (int x = 0; x < w; ++x) {
        if (plane[x] > best[x]) {
          best[x] = plane[x];
          out[x] = c;
        }
      }
    }
  }
  return labels;
}

LogitTensor AverageLogitMaps(std::span<const LogitTensor> maps) {
  if (maps.empty()) {
    throw std::invalid_argument("AverageLogitMaps: empty list");
  }
  const LogitTensor& first = maps.front();
  for (const LogitTensor& m : maps) {
    if (m.channels() != first.channels() || m.height() != first.height() ||
        m.width() != first.width()) {
      throw std::invalid_argument("AverageLogitMaps: dimension mismatch");
    }
  }
  if (maps.size() == 1) return first;
  LogitTensor out(first.channels(), first.height(), first.width());
  auto acc = out.data();
  for (const LogitTensor& m : maps) {
    auto src = m.data();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += src[i];
  }
  const double n = static_cast<double>(maps.size());
  for (double& v : acc) v /= n;
  return out;
}

}  // namespace panofuse
