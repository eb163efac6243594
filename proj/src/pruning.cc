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

#include "panofuse/pruning.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace panofuse {

namespace {

std::vector<std::size_t> OrderByScore(
    std::span<const InstanceProposal> proposals) {
  std::vector<std::size_t> order(proposals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return proposals[a].score > proposals[b].score;
                   });
  return order;
}

double LogitThreshold(double binarize_threshold) {
  if (!(binarize_threshold > 0.0 && binarize_threshold < 1.0)) {
    throw std::invalid_argument("binarize threshold must be in (0, 1)");
  }
  return std::log(binarize_threshold / (1.0 - binarize_threshold));
}

std::string Describe(std::size_t index, const InstanceProposal& p) {
  return "proposal " + std::to_string(index) + " (category " +
         std::to_string(p.category) + ", score " + std::to_string(p.score) +
         ")";
}

// Shared pasting loop; `discard_on_overlap` false keeps everything.
PrunedSet Paste(std::span<const InstanceProposal> proposals, int height,
                int width, double overlap_threshold, double binarize_threshold,
                bool discard_on_overlap) {
  PrunedSet out;
  out.height = height;
  out.width = width;
  std::map<int, MaskGrid> canvases;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const InstanceProposal& p = proposals[i];
    LocalMask candidate =
        BinarizeProposal(p, height, width, binarize_threshold);
    const int64_t area = candidate.Area();
    if (area == 0) {
      out.diagnostics.push_back(
          Describe(i, p) + (candidate.rect.empty()
                                ? ": empty rasterized box"
                                : ": empty binarized mask"));
      if (discard_on_overlap) continue;
    }
    auto [it, inserted] =
        canvases.try_emplace(p.category, MaskGrid(height, width, 0));
    MaskGrid& canvas = it->second;
    const PixelRect& r = candidate.rect;

    int64_t overlap = 0;
    for (int y = r.y0; y < r.y1; ++y) {
      const uint8_t* bits = candidate.bits.row(y - r.y0);
      const uint8_t* taken = canvas.row(y) + r.x0;
      for (int x = 0; x < r.width(); ++x) overlap += bits[x] & taken[x];
    }
    if (discard_on_overlap &&
        static_cast<double>(overlap) / static_cast<double>(area) >
            overlap_threshold) {
      continue;
    }
    LocalMask clipped{r, MaskGrid(r.height(), r.width(), 0)};
    for (int y = r.y0; y < r.y1; ++y) {
      const uint8_t* bits = candidate.bits.row(y - r.y0);
      uint8_t* taken = canvas.row(y) + r.x0;
      uint8_t* dst = clipped.bits.row(y - r.y0);
      for (int x = 0; x < r.width(); ++x) {
        dst[x] = bits[x] & (taken[x] ^ 1);
        taken[x] |= bits[x];
      }
    }
    out.survivors.push_back(p);
    out.clipped_masks.push_back(std::move(clipped));
  }
  return out;
}

}  // namespace

void ValidateProposal(const InstanceProposal& proposal,
                      const CategorySet& categories) {
  if (!proposal.box.IsValid()) {
    throw std::invalid_argument("proposal box must be finite with x0<=x1, y0<=y1");
  }
  if (!categories.IsThing(proposal.category)) {
    throw std::invalid_argument("proposal category " +
                                std::to_string(proposal.category) +
                                " is not a thing category");
  }
  if (!std::isfinite(proposal.score) || proposal.score < 0.0 ||
      proposal.score > 1.0) {
    throw std::invalid_argument("proposal score must be in [0, 1]");
  }
}

int64_t LocalMask::Area() const {
  int64_t n = 0;
  for (uint8_t b : bits.values()) n += b;
  return n;
}

MaskGrid LocalMask::ToImage(int height, int width) const {
  MaskGrid image(height, width, 0);
  for (int y = rect.y0; y < rect.y1; ++y) {
    for (int x = rect.x0; x < rect.x1; ++x) {
      image(y, x) = bits(y - rect.y0, x - rect.x0);
    }
  }
  return image;
}

double BoxIou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.Area() + b.Area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<InstanceProposal> ClassAgnosticNms(
    std::span<const InstanceProposal> proposals, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("NMS IoU threshold must be in (0, 1]");
  }
  std::vector<InstanceProposal> kept;
  for (std::size_t idx : OrderByScore(proposals)) {
    const InstanceProposal& p = proposals[idx];
    const bool suppressed =
        std::any_of(kept.begin(), kept.end(), [&](const InstanceProposal& k) {
          return BoxIou(k.box, p.box) > iou_threshold;
        });
    if (!suppressed) kept.push_back(p);
  }
  return kept;
}

std::vector<InstanceProposal> ScoreFilter(
    std::span<const InstanceProposal> proposals, double min_score) {
  std::vector<InstanceProposal> kept;
  for (std::size_t idx : OrderByScore(proposals)) {
    if (proposals[idx].score > min_score) kept.push_back(proposals[idx]);
  }
  return kept;
}

RealGrid ResizeMaskToBox(const MaskPatch& mask, const PixelRect& rect) {
  if (rect.empty()) {
    throw std::invalid_argument("ResizeMaskToBox: empty rectangle");
  }
  return BilinearResize(mask.grid(), rect.height(), rect.width());
}

LocalMask BinarizeProposal(const InstanceProposal& proposal, int height,
                           int width, double binarize_threshold) {
  const double cut = LogitThreshold(binarize_threshold);
  const PixelRect rect = proposal.box.Rasterize(height, width);
  LocalMask out{rect, MaskGrid(rect.height(), rect.width(), 0)};
  if (rect.empty()) return out;
  const RealGrid logits = ResizeMaskToBox(proposal.mask, rect);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.bits[i] = logits[i] > cut ? 1 : 0;
  }
  return out;
}

PrunedSet CanvasPaste(std::span<const InstanceProposal> proposals, int height,
                      int width, double overlap_threshold,
                      double binarize_threshold) {
  return Paste(proposals, height, width, overlap_threshold, binarize_threshold,
               /*discard_on_overlap=*/true);
}

PrunedSet PruneMasks(std::span<const InstanceProposal> proposals, int height,
                     int width, const PruningOptions& options) {
  const auto after_nms = ClassAgnosticNms(proposals, options.nms_iou);
  const auto confident = ScoreFilter(after_nms, options.min_score);
  return CanvasPaste(confident, height, width, options.overlap_threshold,
                     options.binarize_threshold);
}

PrunedSet KeepAllProposals(std::span<const InstanceProposal> proposals,
                           int height, int width, double binarize_threshold) {
  return Paste(proposals, height, width, 1.0, binarize_threshold,
               /*discard_on_overlap=*/false);
}

std::vector<InstanceProposal> ProposalsFromJson(const nlohmann::json& json,
                                                const CategorySet& categories) {
  if (!json.is_array()) {
    throw std::invalid_argument("proposals: expected a JSON array");
  }
  std::vector<InstanceProposal> out;
  for (std::size_t i = 0; i < json.size(); ++i) {
    const auto& item = json[i];
    try {
      const auto box = item.at("box").get<std::vector<double>>();
      if (box.size() != 4) throw std::invalid_argument("box needs 4 values");
      const int category_id = item.at("category_id").get<int>();
      const auto index = categories.IndexOfId(category_id);
      if (!index) {
        throw std::invalid_argument("unknown category_id " +
                                    std::to_string(category_id));
      }
      InstanceProposal p{BBox{box[0], box[1], box[2], box[3]}, *index,
                         item.at("score").get<double>(),
                         MaskPatch(item.at("mask").get<std::vector<double>>())};
      ValidateProposal(p, categories);
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("proposal " + std::to_string(i) + ": " +
                                  e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("proposal " + std::to_string(i) + ": " +
                                  e.what());
    }
  }
  return out;
}

nlohmann::json ProposalsToJson(std::span<const InstanceProposal> proposals,
                               const CategorySet& categories) {
  nlohmann::json out = nlohmann::json::array();
  for (const InstanceProposal& p : proposals) {
    auto values = p.mask.grid().values();
    out.push_back({{"box", {p.box.x0, p.box.y0, p.box.x1, p.box.y1}},
                   {"category_id", categories.at(p.category).id},
                   {"score", p.score},
                   {"mask", std::vector<double>(values.begin(), values.end())}});
  }
  return out;
}

}  // namespace panofuse
