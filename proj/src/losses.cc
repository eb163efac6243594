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

#include "panofuse/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "panofuse/random.h"

namespace panofuse {

namespace {

// Mean softmax cross entropy over pixels with a non-negative label. Writes
// d(loss)/d(logits) into `gradient` (same shape as `logits`).
double SoftmaxCrossEntropy(const LogitTensor& logits, const LabelGrid& labels,
                           LogitTensor& gradient, int64_t& counted) {
  const int channels = logits.channels();
  const std::size_t n = logits.plane_size();
  counted = 0;
  for (std::size_t q = 0; q < n; ++q) {
    if (labels[q] < 0) continue;
    if (labels[q] >= channels) {
      throw std::invalid_argument("target channel " +
                                  std::to_string(labels[q]) +
                                  " exceeds logit channels");
    }
    ++counted;
  }
  if (counted == 0) return 0.0;

  const double inv = 1.0 / static_cast<double>(counted);
  const double* z = logits.data().data();
  double* g = gradient.data().data();
  double total = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    const int32_t target = labels[q];
    if (target < 0) continue;
    double peak = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < channels; ++c) peak = std::max(peak, z[c * n + q]);
    double sum = 0.0;
    for (int c = 0; c < channels; ++c) sum += std::exp(z[c * n + q] - peak);
    const double log_sum = std::log(sum);
    total += log_sum - (z[target * n + q] - peak);
    for (int c = 0; c < channels; ++c) {
      const double p = std::exp(z[c * n + q] - peak - log_sum);
      g[c * n + q] = (p - (c == target ? 1.0 : 0.0)) * inv;
    }
  }
  return total * inv;
}

// Transpose of BilinearResize applied to `upstream` (out_h x out_w), yielding
// a grid of the source size.
void BilinearResizeAdjoint(std::span<const double> upstream, int out_h,
                           int out_w, int in_h, int in_w,
                           std::span<double> source_grad) {
  const auto ys = BilinearAxisSamples(in_h, out_h);
  const auto xs = BilinearAxisSamples(in_w, out_w);
  std::fill(source_grad.begin(), source_grad.end(), 0.0);
  for (int y = 0; y < out_h; ++y) {
    const AxisSample& sy = ys[y];
    for (int x = 0; x < out_w; ++x) {
      const AxisSample& sx = xs[x];
      const double g = upstream[static_cast<std::size_t>(y) * out_w + x];
      const double wy0 = 1.0 - sy.frac;
      const double wx0 = 1.0 - sx.frac;
      source_grad[static_cast<std::size_t>(sy.lo) * in_w + sx.lo] += g * wy0 * wx0;
      source_grad[static_cast<std::size_t>(sy.lo) * in_w + sx.hi] += g * wy0 * sx.frac;
      source_grad[static_cast<std::size_t>(sy.hi) * in_w + sx.lo] += g * sy.frac * wx0;
      source_grad[static_cast<std::size_t>(sy.hi) * in_w + sx.hi] += g * sy.frac * sx.frac;
    }
  }
}

}  // namespace

PanopticTarget BuildPanopticTarget(
    const PanopticMap& gt_map,
    std::span<const GroundTruthInstance> gt_instances,
    const CategorySet& categories, double unknown_rate, uint64_t seed) {
  if (!(unknown_rate >= 0.0 && unknown_rate <= 1.0)) {
    throw std::invalid_argument("unknown_rate must be in [0, 1]");
  }
  const int n_stuff = categories.n_stuff();
  const int k = static_cast<int>(gt_instances.size());
  const int unknown_slot = n_stuff + k;

  std::unordered_map<uint32_t, int> order;
  for (int i = 0; i < k; ++i) {
    if (!order.emplace(gt_instances[i].segment_id, i).second) {
      throw std::invalid_argument("duplicate ground-truth segment id " +
                                  std::to_string(gt_instances[i].segment_id));
    }
  }

  PanopticTarget target;
  const int n_unknown = static_cast<int>(std::lround(unknown_rate * k));
  target.unknown_instances = SampleWithoutReplacement(k, n_unknown, seed);
  std::vector<uint8_t> is_unknown(k, 0);
  for (int i : target.unknown_instances) is_unknown[i] = 1;

  std::unordered_map<uint32_t, int32_t> channel_of;
  for (const auto& [id, info] : gt_map.segments) {
    int32_t channel = kIgnoreTarget;
    if (info.iscrowd) {
      channel = kIgnoreTarget;
    } else if (categories.IsStuff(info.category)) {
      channel = info.category;
    } else if (categories.IsThing(info.category)) {
      auto it = order.find(id);
      if (it == order.end()) {
        throw std::invalid_argument("segment " + std::to_string(id) +
                                    " is missing from the instance list");
      }
      channel = is_unknown[it->second] ? unknown_slot : n_stuff + it->second;
    } else {
      throw std::invalid_argument("segment " + std::to_string(id) +
                                  " has an unknown category");
    }
    channel_of.emplace(id, channel);
  }

  target.channels = LabelGrid(gt_map.height(), gt_map.width(), kIgnoreTarget);
  for (std::size_t q = 0; q < gt_map.ids.size(); ++q) {
    const uint32_t id = gt_map.ids[q];
    if (id == kVoidSegment) continue;
    auto it = channel_of.find(id);
    if (it == channel_of.end()) {
      throw std::invalid_argument("segment id " + std::to_string(id) +
                                  " has no table entry");
    }
    target.channels[q] = it->second;
  }
  return target;
}

LossResult PanopticCrossEntropy(const LogitTensor& z,
                                const PanopticTarget& target) {
  if (target.channels.height() != z.height() ||
      target.channels.width() != z.width()) {
    throw std::invalid_argument("target dims differ from panoptic logits");
  }
  LossResult result;
  result.gradient = LogitTensor(z.channels(), z.height(), z.width());
  result.loss =
      SoftmaxCrossEntropy(z, target.channels, result.gradient,
                          result.counted_pixels);
  if (result.counted_pixels == 0) {
    result.diagnostic = "all pixels ignored; loss defined as 0";
  }
  return result;
}

LogitTensor CropLogits(const LogitTensor& semantic, const PixelRect& rect) {
  if (rect.empty()) throw std::invalid_argument("CropLogits: empty box");
  LogitTensor crop(semantic.channels(), rect.height(), rect.width());
  for (int c = 0; c < semantic.channels(); ++c) {
    for (int y = rect.y0; y < rect.y1; ++y) {
      for (int x = rect.x0; x < rect.x1; ++x) {
        crop.at(c, y - rect.y0, x - rect.x0) = semantic.at(c, y, x);
      }
    }
  }
  return crop;
}

LossResult RoiCrossEntropy(const LogitTensor& semantic, const BBox& box,
                           const LabelGrid& label_patch) {
  constexpr int kSide = MaskPatch::kSide;
  if (label_patch.height() != kSide || label_patch.width() != kSide) {
    throw std::invalid_argument("RoI label patch must be 28x28");
  }
  const PixelRect rect = box.Rasterize(semantic.height(), semantic.width());
  if (rect.empty()) {
    throw std::invalid_argument("RoI box has no pixels inside the image");
  }
  const LogitTensor crop = CropLogits(semantic, rect);
  LogitTensor resized(crop.channels(), kSide, kSide);
  for (int c = 0; c < crop.channels(); ++c) {
    resized.SetChannel(c, BilinearResize(crop.ChannelGrid(c), kSide, kSide));
  }
  LogitTensor resized_grad(crop.channels(), kSide, kSide);
  LossResult result;
  result.loss = SoftmaxCrossEntropy(resized, label_patch, resized_grad,
                                    result.counted_pixels);
  result.gradient = LogitTensor(crop.channels(), rect.height(), rect.width());
  for (int c = 0; c < crop.channels(); ++c) {
    BilinearResizeAdjoint(resized_grad.channel(c), kSide, kSide,
                          rect.height(), rect.width(),
                          result.gradient.channel(c));
  }
  if (result.counted_pixels == 0) {
    result.diagnostic = "all RoI pixels ignored; loss defined as 0";
  }
  return result;
}

LabelGrid SampleLabelPatch(const LabelGrid& labels, const BBox& box) {
  constexpr int kSide = MaskPatch::kSide;
  LabelGrid patch(kSide, kSide, kVoidLabel);
  for (int r = 0; r < kSide; ++r) {
    const int y = PatchCellToPixel(box.y0, box.y1, r);
    if (y < 0 || y >= labels.height()) continue;
    for (int c = 0; c < kSide; ++c) {
      const int x = PatchCellToPixel(box.x0, box.x1, c);
      if (x < 0 || x >= labels.width()) continue;
      patch(r, c) = labels(y, x);
    }
  }
  return patch;
}

}  // namespace panofuse
