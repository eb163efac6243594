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

#include "panofuse/metrics.h"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace panofuse {

namespace {

constexpr double kMatchIou = 0.5;
constexpr double kVoidFraction = 0.5;

void CheckCategories(const PanopticMap& map, const CategorySet& categories,
                     const char* which) {
  for (const auto& [id, info] : map.segments) {
    if (info.category < 0 || info.category >= categories.size()) {
      throw std::invalid_argument(std::string(which) + " segment " +
                                  std::to_string(id) +
                                  " has an out-of-range category");
    }
  }
}

uint64_t PairKey(uint32_t gt, uint32_t pred) {
  return (static_cast<uint64_t>(gt) << 32) | pred;
}

}  // namespace

void CategoryStats::Merge(const CategoryStats& other) {
  iou_sum += other.iou_sum;
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
}

ConfusionMatrix::ConfusionMatrix(int num_categories)
    : num_categories_(num_categories),
      counts_(static_cast<std::size_t>(num_categories + 1) * num_categories,
              0) {}

void ConfusionMatrix::Add(const LabelGrid& pred, const LabelGrid& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw std::invalid_argument("confusion: dimension mismatch");
  }
  for (std::size_t q = 0; q < gt.size(); ++q) {
    const int32_t g = gt[q];
    if (g < 0) continue;
    if (g >= num_categories_) {
      throw std::invalid_argument("confusion: GT label out of range");
    }
    int32_t p = pred[q];
    if (p >= num_categories_) {
      throw std::invalid_argument("confusion: predicted label out of range");
    }
    if (p < 0) p = num_categories_;
    ++counts_[static_cast<std::size_t>(p) * num_categories_ + g];
  }
}

void ConfusionMatrix::Merge(const ConfusionMatrix& other) {
  if (num_categories_ == 0 && counts_.empty()) {
    *this = other;
    return;
  }
  if (other.num_categories_ != num_categories_) {
    throw std::invalid_argument("confusion: category count mismatch");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

void MatchStats::Merge(const MatchStats& other) {
  if (per_category.empty()) per_category.resize(other.per_category.size());
  if (per_category.size() != other.per_category.size()) {
    throw std::invalid_argument("MatchStats: category count mismatch");
  }
  for (std::size_t c = 0; c < per_category.size(); ++c) {
    per_category[c].Merge(other.per_category[c]);
  }
  confusion.Merge(other.confusion);
  images += other.images;
}

MatchStats MatchAndScore(const PanopticMap& pred, const PanopticMap& gt,
                         const CategorySet& categories) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw std::invalid_argument("prediction and ground truth differ in size");
  }
  CheckCategories(pred, categories, "predicted");
  CheckCategories(gt, categories, "ground-truth");

  std::unordered_map<uint32_t, int64_t> pred_area;
  std::unordered_map<uint32_t, int64_t> gt_area;
  std::unordered_map<uint64_t, int64_t> intersections;
  for (std::size_t q = 0; q < gt.ids.size(); ++q) {
    const uint32_t g = gt.ids[q];
    const uint32_t p = pred.ids[q];
    if (p != kVoidSegment) ++pred_area[p];
    if (g != kVoidSegment) ++gt_area[g];
    ++intersections[PairKey(g, p)];
  }
  auto info_of = [](const PanopticMap& map, uint32_t id) -> const SegmentInfo& {
    auto it = map.segments.find(id);
    if (it == map.segments.end()) {
      throw std::invalid_argument("segment id " + std::to_string(id) +
                                  " has no table entry");
    }
    return it->second;
  };
  auto overlap = [&](uint32_t g, uint32_t p) -> int64_t {
    auto it = intersections.find(PairKey(g, p));
    return it == intersections.end() ? 0 : it->second;
  };

  MatchStats stats;
  stats.per_category.resize(categories.size());
  stats.confusion = ConfusionMatrix(categories.size());
  stats.images = 1;

  std::unordered_set<uint32_t> matched_gt;
  std::unordered_set<uint32_t> matched_pred;
  // Sorted so iou sums accumulate in a fixed order.
  std::vector<std::pair<uint64_t, int64_t>> pairs(intersections.begin(),
                                                   intersections.end());
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [key, inter] : pairs) {
    const uint32_t g = static_cast<uint32_t>(key >> 32);
    const uint32_t p = static_cast<uint32_t>(key & 0xFFFFFFFFu);
    if (g == kVoidSegment || p == kVoidSegment) continue;
    const SegmentInfo& gi = info_of(gt, g);
    const SegmentInfo& pi = info_of(pred, p);
    if (gi.iscrowd || gi.category != pi.category) continue;
    const int64_t uni =
        pred_area[p] + gt_area[g] - inter - overlap(kVoidSegment, p);
    const double iou = static_cast<double>(inter) / static_cast<double>(uni);
    if (iou > kMatchIou) {
      CategoryStats& s = stats.per_category[gi.category];
      ++s.tp;
      s.iou_sum += iou;
      matched_gt.insert(g);
      matched_pred.insert(p);
    }
  }

  std::vector<std::vector<uint32_t>> crowd_by_category(categories.size());
  for (const auto& [g, info] : gt.segments) {
    if (!gt_area.contains(g)) continue;
    if (info.iscrowd) {
      crowd_by_category[info.category].push_back(g);
    } else if (!matched_gt.contains(g)) {
      ++stats.per_category[info.category].fn;
    }
  }
  for (const auto& [p, info] : pred.segments) {
    auto area = pred_area.find(p);
    if (area == pred_area.end() || matched_pred.contains(p)) continue;
    int64_t ignored = overlap(kVoidSegment, p);
    for (uint32_t crowd : crowd_by_category[info.category]) {
      ignored += overlap(crowd, p);
    }
    if (static_cast<double>(ignored) / static_cast<double>(area->second) >
        kVoidFraction) {
      continue;
    }
    ++stats.per_category[info.category].fp;
  }

  stats.confusion.Add(SemanticLabels(pred), SemanticLabels(gt));
  return stats;
}

void ScoreCategory(const CategoryStats& s, double& pq, double& sq,
                   double& rq) {
  const double denom = s.tp + 0.5 * s.fp + 0.5 * s.fn;
  sq = s.tp > 0 ? s.iou_sum / s.tp : 0.0;
  rq = denom > 0 ? s.tp / denom : 0.0;
  pq = denom > 0 ? s.iou_sum / denom : 0.0;
}

MiouResult ComputeMiou(const ConfusionMatrix& confusion) {
  const int k = confusion.num_categories();
  MiouResult result;
  result.iou.assign(k, 0.0);
  result.present.assign(k, false);
  int present = 0;
  double total = 0.0;
  for (int c = 0; c < k; ++c) {
    int64_t gt_total = 0;
    for (int p = 0; p <= k; ++p) gt_total += confusion.count(p, c);
    int64_t pred_total = 0;
    for (int g = 0; g < k; ++g) pred_total += confusion.count(c, g);
    const int64_t tp = confusion.count(c, c);
    const int64_t uni = gt_total + pred_total - tp;
    result.iou[c] = uni > 0 ? static_cast<double>(tp) / uni : 0.0;
    if (gt_total > 0) {
      result.present[c] = true;
      total += result.iou[c];
      ++present;
    }
  }
  result.mean = present > 0 ? total / present : 0.0;
  return result;
}

MiouResult Miou(const LabelGrid& pred_sem, const LabelGrid& gt_sem,
                const CategorySet& categories) {
  ConfusionMatrix confusion(categories.size());
  confusion.Add(pred_sem, gt_sem);
  return ComputeMiou(confusion);
}

EvalReport Aggregate(std::span<const MatchStats> per_image,
                     const CategorySet& categories) {
  MatchStats total;
  total.per_category.resize(categories.size());
  total.confusion = ConfusionMatrix(categories.size());
  for (const MatchStats& s : per_image) total.Merge(s);

  EvalReport report;
  report.images = total.images;
  const MiouResult miou = ComputeMiou(total.confusion);
  report.miou = miou.mean;

  for (int c = 0; c < categories.size(); ++c) {
    const Category& cat = categories.at(c);
    ClassReport cr;
    cr.id = cat.id;
    cr.name = cat.name;
    cr.is_thing = categories.IsThing(c);
    cr.stats = total.per_category[c];
    ScoreCategory(cr.stats, cr.pq, cr.sq, cr.rq);
    cr.counted = cr.stats.tp + cr.stats.fp + cr.stats.fn > 0;
    cr.iou = miou.iou[c];
    cr.in_gt = miou.present[c];
    report.per_class.push_back(cr);
  }

  auto average = [&](auto select, double& pq, double& sq, double& rq) {
    int n = 0;
    pq = sq = rq = 0.0;
    for (const ClassReport& cr : report.per_class) {
      if (!cr.counted || !select(cr)) continue;
      pq += cr.pq;
      sq += cr.sq;
      rq += cr.rq;
      ++n;
    }
    if (n > 0) {
      pq /= n;
      sq /= n;
      rq /= n;
    }
    return n;
  };
  report.n = average([](const ClassReport&) { return true; }, report.pq,
                     report.sq, report.rq);
  report.n_th = average([](const ClassReport& cr) { return cr.is_thing; },
                        report.pq_th, report.sq_th, report.rq_th);
  report.n_st = average([](const ClassReport& cr) { return !cr.is_thing; },
                        report.pq_st, report.sq_st, report.rq_st);
  return report;
}

nlohmann::json ReportToJson(const EvalReport& report) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const ClassReport& cr : report.per_class) {
    per_class.push_back({{"id", cr.id},
                         {"name", cr.name},
                         {"isthing", cr.is_thing},
                         {"pq", cr.pq},
                         {"sq", cr.sq},
                         {"rq", cr.rq},
                         {"tp", cr.stats.tp},
                         {"fp", cr.stats.fp},
                         {"fn", cr.stats.fn},
                         {"iou_sum", cr.stats.iou_sum},
                         {"counted", cr.counted},
                         {"iou", cr.iou}});
  }
  return {{"pq", report.pq},       {"sq", report.sq},
          {"rq", report.rq},       {"pq_th", report.pq_th},
          {"sq_th", report.sq_th}, {"rq_th", report.rq_th},
          {"pq_st", report.pq_st}, {"sq_st", report.sq_st},
          {"rq_st", report.rq_st}, {"miou", report.miou},
          {"n", report.n},         {"n_th", report.n_th},
          {"n_st", report.n_st},   {"images", report.images},
          {"per_class", per_class}};
}

}  // namespace panofuse
