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

#include "panofuse/fusion.h"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace panofuse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void CheckSemantic(const LogitTensor& semantic, const CategorySet& categories) {
  if (semantic.channels() != categories.size()) {
    throw std::invalid_argument(
        "semantic logits have " + std::to_string(semantic.channels()) +
        " channels, categories define " + std::to_string(categories.size()));
  }
}

int ThingChannel(const CategorySet& categories, int category) {
  if (!categories.IsThing(category)) {
    throw std::invalid_argument("category " + std::to_string(category) +
                                " is not a thing category");
  }
  return category;
}

struct Extent {
  int64_t area = 0;
  int x0 = std::numeric_limits<int>::max();
  int y0 = std::numeric_limits<int>::max();
  int x1 = -1;
  int y1 = -1;
};

// Converts a per-pixel Z channel map into a PanopticMap.
PanopticMap MapFromChannels(const LabelGrid& channels, int n_stuff,
                            std::span<const InstanceProposal> survivors,
                            int unknown_channel) {
  const int n_inst = static_cast<int>(survivors.size());
  std::vector<Extent> extents(n_stuff + n_inst);
  PanopticMap map(channels.height(), channels.width());
  for (int y = 0; y < channels.height(); ++y) {
    const int32_t* src = channels.row(y);
    uint32_t* dst = map.ids.row(y);
    for (int x = 0; x < channels.width(); ++x) {
      const int32_t c = src[x];
      if (c == unknown_channel) {
        dst[x] = kVoidSegment;
        continue;
      }
      dst[x] = static_cast<uint32_t>(c) + 1;
      Extent& e = extents[c];
      ++e.area;
      e.x0 = std::min(e.x0, x);
      e.x1 = std::max(e.x1, x);
      e.y0 = std::min(e.y0, y);
      e.y1 = std::max(e.y1, y);
    }
  }
  for (int c = 0; c < n_stuff + n_inst; ++c) {
    const Extent& e = extents[c];
    if (e.area == 0) continue;
    SegmentInfo info;
    info.category = c < n_stuff ? c : survivors[c - n_stuff].category;
    info.area = e.area;
    info.bbox = {e.x0, e.y0, e.x1 - e.x0 + 1, e.y1 - e.y0 + 1};
    map.segments.emplace(static_cast<uint32_t>(c) + 1, info);
  }
  return map;
}

// Shared class assignment; `label_at(y, x)` yields the semantic category.
template <typename LabelFn>
PanopticMap AssignClasses(const PanopticMap& map,
                          std::span<const InstanceProposal> survivors,
                          const CategorySet& categories, LabelFn label_at) {
  const int n_stuff = categories.n_stuff();
  const int n_inst = static_cast<int>(survivors.size());
  const uint32_t first = InstanceSegmentId(n_stuff, 0);
  const uint32_t last = InstanceSegmentId(n_stuff, n_inst);  // exclusive

  std::vector<std::vector<int64_t>> histograms(n_inst);
  for (int y = 0; y < map.height(); ++y) {
    const uint32_t* row = map.ids.row(y);
    for (int x = 0; x < map.width(); ++x) {
      const uint32_t id = row[x];
      if (id < first || id >= last) continue;
      auto& hist = histograms[id - first];
      if (hist.empty()) hist.assign(categories.size(), 0);
      const int32_t label = label_at(y, x);
      if (label >= 0 && label < categories.size()) ++hist[label];
    }
  }

  PanopticMap out = map;
  std::vector<int32_t> relabel(n_inst, -1);
  bool any = false;
  for (int i = 0; i < n_inst; ++i) {
    auto it = out.segments.find(first + i);
    if (it == out.segments.end() || it->second.area == 0) continue;
    const auto& hist = histograms[i];
    if (hist.empty()) continue;
    int mode = 0;
    for (int c = 1; c < static_cast<int>(hist.size()); ++c) {
      if (hist[c] > hist[mode]) mode = c;
    }
    const int detector_class = survivors[i].category;
    if (mode == detector_class) continue;
    const double frequency =
        static_cast<double>(hist[mode]) / static_cast<double>(it->second.area);
    if (frequency > 0.5 && categories.IsStuff(mode)) {
      relabel[i] = mode;
      any = true;
    }
  }
  if (!any) return out;

  for (std::size_t p = 0; p < out.ids.size(); ++p) {
    const uint32_t id = out.ids[p];
    if (id >= first && id < last && relabel[id - first] >= 0) {
      out.ids[p] = StuffSegmentId(relabel[id - first]);
    }
  }
  for (int i = 0; i < n_inst; ++i) {
    if (relabel[i] < 0) continue;
    out.segments.erase(first + i);
    SegmentInfo stuff;
    stuff.category = relabel[i];
    out.segments.try_emplace(StuffSegmentId(relabel[i]), stuff);
  }
  RecomputeSegmentStats(out);
  return out;
}

}  // namespace

RealGrid InstanceSemanticMap(const LogitTensor& semantic,
                             const CategorySet& categories,
                             const InstanceProposal& proposal) {
  CheckSemantic(semantic, categories);
  const int channel = ThingChannel(categories, proposal.category);
  RealGrid out(semantic.height(), semantic.width(), 0.0);
  const PixelRect r = proposal.box.Rasterize(semantic.height(), semantic.width());
  for (int y = r.y0; y < r.y1; ++y) {
    for (int x = r.x0; x < r.x1; ++x) out(y, x) = semantic.at(channel, y, x);
  }
  return out;
}

RealGrid InstanceMaskMap(const InstanceProposal& proposal, int height,
                         int width, std::vector<std::string>* diagnostics) {
  RealGrid out(height, width, 0.0);
  const PixelRect r = proposal.box.Rasterize(height, width);
  if (r.empty()) {
    if (diagnostics != nullptr) {
      diagnostics->push_back("instance box has no pixels inside the image");
    }
    return out;
  }
  const RealGrid local = ResizeMaskToBox(proposal.mask, r);
  for (int y = r.y0; y < r.y1; ++y) {
    std::copy_n(local.row(y - r.y0), r.width(), out.row(y) + r.x0);
  }
  return out;
}

PanopticLogits BuildPanopticLogits(const LogitTensor& semantic,
                                   const CategorySet& categories,
                                   const PrunedSet& pruned,
                                   bool enable_unknown) {
  CheckSemantic(semantic, categories);
  const int n_stuff = categories.n_stuff();
  const int n_inst = static_cast<int>(pruned.survivors.size());
  const int channels = n_stuff + n_inst + (enable_unknown ? 1 : 0);
  if (channels == 0) {
    throw std::invalid_argument("panoptic logits would have no channels");
  }
  const int h = semantic.height();
  const int w = semantic.width();

  PanopticLogits z{LogitTensor(channels, h, w), n_stuff, n_inst,
                   enable_unknown, pruned.survivors};
  for (int k = 0; k < n_stuff; ++k) {
    std::copy(semantic.channel(k).begin(), semantic.channel(k).end(),
              z.base.channel(k).begin());
  }
  std::vector<double> mask_max(z.base.plane_size(),
                               n_inst > 0 ? kNegInf : 0.0);
  for (int i = 0; i < n_inst; ++i) {
    const InstanceProposal& p = pruned.survivors[i];
    const RealGrid x_mask = InstanceSemanticMap(semantic, categories, p);
    const RealGrid y_mask = InstanceMaskMap(p, h, w);
    auto dst = z.base.channel(n_stuff + i);
    for (std::size_t q = 0; q < dst.size(); ++q) {
      dst[q] = x_mask[q] + y_mask[q];
      mask_max[q] = std::max(mask_max[q], x_mask[q]);
    }
  }
  if (enable_unknown) {
    std::vector<double> thing_max(z.base.plane_size(), kNegInf);
    for (int c = n_stuff; c < categories.size(); ++c) {
      auto plane = semantic.channel(c);
      for (std::size_t q = 0; q < thing_max.size(); ++q) {
        thing_max[q] = std::max(thing_max[q], plane[q]);
      }
    }
    if (categories.n_thing() == 0) std::fill(thing_max.begin(), thing_max.end(), 0.0);
    auto dst = z.base.channel(z.unknown_channel());
    for (std::size_t q = 0; q < dst.size(); ++q) {
      dst[q] = thing_max[q] - mask_max[q];
    }
  }
  return z;
}

PanopticMap Decode(const PanopticLogits& logits) {
  const LabelGrid channels = ChannelArgmax(logits.base);
  return MapFromChannels(channels, logits.n_stuff, logits.survivors,
                         logits.unknown_enabled ? logits.unknown_channel()
                                                : -1);
}

PanopticMap FuseAndDecode(const LogitTensor& semantic,
                          const CategorySet& categories,
                          const PrunedSet& pruned, bool enable_unknown,
                          LabelGrid* semantic_pred) {
  CheckSemantic(semantic, categories);
  const int n_stuff = categories.n_stuff();
  const int n_inst = static_cast<int>(pruned.survivors.size());
  if (n_stuff + n_inst + (enable_unknown ? 1 : 0) == 0) {
    throw std::invalid_argument("panoptic logits would have no channels");
  }
  const int h = semantic.height();
  const int w = semantic.width();
  const int unknown_channel = enable_unknown ? n_stuff + n_inst : -1;

  std::vector<int> thing_channel(n_inst);
  std::vector<PixelRect> rects(n_inst);
  std::vector<RealGrid> masks(n_inst);
  for (int i = 0; i < n_inst; ++i) {
    const InstanceProposal& p = pruned.survivors[i];
    thing_channel[i] = ThingChannel(categories, p.category);
    rects[i] = p.box.Rasterize(h, w);
    if (!rects[i].empty()) masks[i] = ResizeMaskToBox(p.mask, rects[i]);
  }

  LabelGrid label(h, w, -1);
  if (semantic_pred != nullptr) *semantic_pred = LabelGrid(h, w, 0);
  const bool need_things = enable_unknown || semantic_pred != nullptr;

  // One row at a time so the per-pixel state stays in cache.
  std::vector<double> best(w), sem_best(w), thing_max(w), mask_max(w);
  std::vector<int32_t> sem_label(w), first_outside(w);
  for (int y = 0; y < h; ++y) {
    const std::size_t offset = static_cast<std::size_t>(y) * w;
    int32_t* out = label.row(y);
    std::fill(best.begin(), best.end(), kNegInf);
    for (int k = 0; k < n_stuff; ++k) {
      const double* plane = semantic.channel(k).data() + offset;
      for (int x = 0; x < w; ++x) {
        if (plane[x] > best[x]) {
          best[x] = plane[x];
          out[x] = k;
        }
      }
    }

    if (need_things) {
      std::copy(best.begin(), best.end(), sem_best.begin());
      std::copy(out, out + w, sem_label.begin());
      std::fill(thing_max.begin(), thing_max.end(),
                categories.n_thing() > 0 ? kNegInf : 0.0);
      for (int c = n_stuff; c < categories.size(); ++c) {
        const double* plane = semantic.channel(c).data() + offset;
        for (int x = 0; x < w; ++x) {
          thing_max[x] = std::max(thing_max[x], plane[x]);
          if (plane[x] > sem_best[x]) {
            sem_best[x] = plane[x];
            sem_label[x] = c;
          }
        }
      }
      if (semantic_pred != nullptr) {
        std::copy(sem_label.begin(), sem_label.end(), semantic_pred->row(y));
      }
    }

    // Outside its box an instance channel is exactly 0. Under lowest-index
    // tie breaking only the first instance whose box misses a pixel matters;
    // the pixels inside boxes 0..i-1 form an interval of this row.
    std::fill(first_outside.begin(), first_outside.end(), n_inst);
    int lo = 0;
    int hi = w;
    for (int i = 0; i < n_inst && lo < hi; ++i) {
      const PixelRect& r = rects[i];
      if (r.empty() || y < r.y0 || y >= r.y1) {
        std::fill(first_outside.begin() + lo, first_outside.begin() + hi, i);
        break;
      }
      for (int x = lo; x < std::min(hi, r.x0); ++x) first_outside[x] = i;
      for (int x = std::max(lo, r.x1); x < hi; ++x) first_outside[x] = i;
      lo = std::max(lo, r.x0);
      hi = std::min(hi, r.x1);
    }

    std::fill(mask_max.begin(), mask_max.end(), n_inst > 0 ? kNegInf : 0.0);
    for (int i = 0; i < n_inst; ++i) {
      const PixelRect& r = rects[i];
      if (r.empty() || y < r.y0 || y >= r.y1) continue;
      const double* plane = semantic.channel(thing_channel[i]).data() + offset;
      const double* mask_row = masks[i].row(y - r.y0);
      const int32_t z_channel = n_stuff + i;
      for (int x = r.x0; x < r.x1; ++x) {
        const double value = plane[x] + mask_row[x - r.x0];
        if (value > best[x]) {
          best[x] = value;
          out[x] = z_channel;
        }
        mask_max[x] = std::max(mask_max[x], plane[x]);
      }
    }
    for (int x = 0; x < w; ++x) {
      const int32_t i = first_outside[x];
      if (i == n_inst) continue;
      if (0.0 > best[x] || (0.0 == best[x] && n_stuff + i < out[x])) {
        best[x] = 0.0;
        out[x] = n_stuff + i;
      }
      mask_max[x] = std::max(mask_max[x], 0.0);
    }

    if (enable_unknown) {
      for (int x = 0; x < w; ++x) {
        if (thing_max[x] - mask_max[x] > best[x]) {
          best[x] = thing_max[x] - mask_max[x];
          out[x] = unknown_channel;
        }
      }
    }
  }
  return MapFromChannels(label, n_stuff, pruned.survivors, unknown_channel);
}

PanopticMap AssignInstanceClasses(const PanopticMap& map,
                                  std::span<const InstanceProposal> survivors,
                                  const LabelGrid& semantic_pred,
                                  const CategorySet& categories) {
  if (semantic_pred.height() != map.height() ||
      semantic_pred.width() != map.width()) {
    throw std::invalid_argument("semantic prediction dims differ from map");
  }
  return AssignClasses(map, survivors, categories,
                       [&](int y, int x) { return semantic_pred(y, x); });
}

PanopticMap AssignInstanceClasses(const PanopticMap& map,
                                  std::span<const InstanceProposal> survivors,
                                  const LogitTensor& semantic,
                                  const CategorySet& categories) {
  CheckSemantic(semantic, categories);
  if (semantic.height() != map.height() || semantic.width() != map.width()) {
    throw std::invalid_argument("semantic logits dims differ from map");
  }
  const std::size_t stride = semantic.plane_size();
  const double* base = semantic.data().data();
  const int channels = semantic.channels();
  return AssignClasses(map, survivors, categories, [&](int y, int x) {
    const double* v = base + static_cast<std::size_t>(y) * semantic.width() + x;
    int32_t arg = 0;
    double top = v[0];
    for (int c = 1; c < channels; ++c) {
      if (v[c * stride] > top) {
        top = v[c * stride];
        arg = c;
      }
    }
    return arg;
  });
}

PanopticMap SuppressSmallStuff(const PanopticMap& map,
                               const CategorySet& categories,
                               int64_t min_area) {
  if (min_area < 0) throw std::invalid_argument("min_area must be >= 0");
  PanopticMap out = map;
  std::vector<uint32_t> removed;
  for (auto it = out.segments.begin(); it != out.segments.end();) {
    if (categories.IsStuff(it->second.category) && it->second.area < min_area) {
      removed.push_back(it->first);
      it = out.segments.erase(it);
    } else {
      ++it;
    }
  }
  if (removed.empty()) return out;
  std::sort(removed.begin(), removed.end());
  for (uint32_t& id : out.ids.values()) {
    if (id != kVoidSegment &&
        std::binary_search(removed.begin(), removed.end(), id)) {
      id = kVoidSegment;
    }
  }
  return out;
}

PanopticMap RunFusionPipeline(const LogitTensor& semantic,
                              std::span<const InstanceProposal> proposals,
                              const CategorySet& categories,
                              const FusionOptions& options) {
  CheckSemantic(semantic, categories);
  for (const InstanceProposal& p : proposals) ValidateProposal(p, categories);
  const PrunedSet pruned = PruneMasks(proposals, semantic.height(),
                                      semantic.width(), options.pruning);
  LabelGrid semantic_pred;
  const PanopticMap fused = FuseAndDecode(semantic, categories, pruned,
                                          options.enable_unknown, &semantic_pred);
  const PanopticMap assigned =
      AssignInstanceClasses(fused, pruned.survivors, semantic_pred, categories);
  return SuppressSmallStuff(assigned, categories, options.min_stuff_area);
}

}  // namespace panofuse
