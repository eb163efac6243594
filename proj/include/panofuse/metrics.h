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

// Panoptic quality evaluation.
//
// Per category, PQ = sum_TP IoU / (|TP| + |FP|/2 + |FN|/2), which factors as
// SQ * RQ with SQ = sum_TP IoU / |TP| and RQ = |TP| / (|TP| + |FP|/2 + |FN|/2).
// A (prediction, ground truth) pair of the same category is a TP when its IoU
// exceeds 0.5; GT-void pixels are excluded from the union. Unmatched
// predictions lying mostly (> 0.5) on GT void or same-category crowd regions
// are not counted as FP. Crowd GT segments never produce FN.

#ifndef PANOFUSE_METRICS_H_
#define PANOFUSE_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "panofuse/panoptic_map.h"
#include "panofuse/tensor.h"

namespace panofuse {

struct CategoryStats {
  double iou_sum = 0.0;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;

  void Merge(const CategoryStats& other);
  bool operator==(const CategoryStats&) const = default;
};

// Pixel confusion counts; rows are predicted labels (last row = predicted
// void), columns are ground-truth labels. GT-void pixels are not counted.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int num_categories);

  void Add(const LabelGrid& pred, const LabelGrid& gt);
  void Merge(const ConfusionMatrix& other);

  int num_categories() const { return num_categories_; }
  // pred == num_categories() addresses the predicted-void row.
  int64_t count(int pred, int gt) const {
    return counts_[static_cast<std::size_t>(pred) * num_categories_ + gt];
  }

 private:
  int num_categories_ = 0;
  std::vector<int64_t> counts_;
};

struct MatchStats {
  std::vector<CategoryStats> per_category;
  ConfusionMatrix confusion;
  int64_t images = 0;

  void Merge(const MatchStats& other);
};

// Throws std::invalid_argument on dimension mismatch or a segment whose
// category index is out of range.
MatchStats MatchAndScore(const PanopticMap& pred, const PanopticMap& gt,
                         const CategorySet& categories);

struct ClassReport {
  int id = 0;
  std::string name;
  bool is_thing = false;
  CategoryStats stats;
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  // tp + fp + fn > 0; only such categories enter the PQ averages.
  bool counted = false;
  double iou = 0.0;
  bool in_gt = false;  // has GT pixels; only such categories enter mIoU
};

struct EvalReport {
  std::vector<ClassReport> per_class;
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  double pq_th = 0.0;
  double sq_th = 0.0;
  double rq_th = 0.0;
  double pq_st = 0.0;
  double sq_st = 0.0;
  double rq_st = 0.0;
  double miou = 0.0;
  int n = 0;
  int n_th = 0;
  int n_st = 0;
  int64_t images = 0;
};

// Fills pq/sq/rq of one category from its counts.
void ScoreCategory(const CategoryStats& stats, double& pq, double& sq,
                   double& rq);

EvalReport Aggregate(std::span<const MatchStats> per_image,
                     const CategorySet& categories);

struct MiouResult {
  std::vector<double> iou;
  std::vector<bool> present;  // category occurs in GT
  double mean = 0.0;
};

MiouResult ComputeMiou(const ConfusionMatrix& confusion);
MiouResult Miou(const LabelGrid& pred_sem, const LabelGrid& gt_sem,
                const CategorySet& categories);

// Keys: pq, sq, rq, pq_th, pq_st, miou, per_class, ...
nlohmann::json ReportToJson(const EvalReport& report);

}  // namespace panofuse

#endif  // PANOFUSE_METRICS_H_
