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

#include "panofuse/scene.h"

#include <algorithm>
#include <chrono>
#include <limits>
#include <set>
#include <stdexcept>

#include "panofuse/combine.h"
#include "panofuse/fusion.h"
#include "panofuse/random.h"

namespace panofuse {

namespace {

constexpr int kExactSides[] = {4, 7, 14, 28};

enum Stream : uint64_t {
  kLayoutStream = 1,
  kInstanceStream = 2,
  kNoiseStream = 3,
  kProposalStream = 4,
};

LabelGrid VoronoiLayout(int height, int width, int n_stuff, SplitMix64& rng) {
  LabelGrid layout(height, width, kVoidLabel);
  if (n_stuff == 0) return layout;
  std::vector<std::pair<double, double>> sites(n_stuff);
  for (auto& [sy, sx] : sites) {
    sy = rng.Uniform(0.0, height);
    sx = rng.Uniform(0.0, width);
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double best = std::numeric_limits<double>::infinity();
      int32_t label = 0;
      for (int k = 0; k < n_stuff; ++k) {
        const double dy = y + 0.5 - sites[k].first;
        const double dx = x + 0.5 - sites[k].second;
        const double d = dy * dy + dx * dx;
        if (d < best) {
          best = d;
          label = k;
        }
      }
      layout(y, x) = label;
    }
  }
  return layout;
}

int DrawSide(SplitMix64& rng, const SceneOptions& options, int limit) {
  if (options.exact_boxes) {
    for (int tries = 0; tries < 16; ++tries) {
      const int side = kExactSides[rng.Below(std::size(kExactSides))];
      if (side <= limit) return side;
    }
    return std::min(limit, kExactSides[0]);
  }
  const int hi = std::min(options.max_side, limit);
  const int lo = std::min(options.min_side, hi);
  return rng.UniformInt(lo, hi);
}

// Visible areas after putting `top` over `instances`, given their current
// visible `areas`. Only pixels under the new shape change owner.
std::vector<int64_t> AreasWithTop(const std::vector<SceneInstance>& instances,
                                  const std::vector<int64_t>& areas,
                                  const SceneInstance& top) {
  std::vector<int64_t> out = areas;
  out.push_back(0);
  const PixelRect& b = top.box;
  for (int y = b.y0; y < b.y1; ++y) {
    for (int x = b.x0; x < b.x1; ++x) {
      if (!ShapeCovers(top, y, x)) continue;
      ++out.back();
      for (int i = static_cast<int>(instances.size()) - 1; i >= 0; --i) {
        if (ShapeCovers(instances[i], y, x)) {
          --out[i];
          break;
        }
      }
    }
  }
  return out;
}

const char* ShapeName(ShapeKind shape) {
  return shape == ShapeKind::kEllipse ? "ellipse" : "rectangle";
}

}  // namespace

CategorySet SyntheticCategories(int n_stuff, int n_thing) {
  if (n_stuff < 0 || n_thing < 0 || n_stuff + n_thing == 0) {
    throw std::invalid_argument("need at least one category");
  }
  std::vector<Category> categories;
  for (int k = 0; k < n_stuff; ++k) {
    categories.push_back({k, "stuff_" + std::to_string(k), false});
  }
  for (int t = 0; t < n_thing; ++t) {
    categories.push_back({n_stuff + t, "thing_" + std::to_string(t), true});
  }
  return CategorySet(std::move(categories));
}

bool ShapeCovers(const SceneInstance& instance, int y, int x) {
  const PixelRect& b = instance.box;
  if (!b.Contains(y, x)) return false;
  if (instance.shape == ShapeKind::kRectangle) return true;
  const double ry = b.height() / 2.0;
  const double rx = b.width() / 2.0;
  const double dy = (y + 0.5 - (b.y0 + ry)) / ry;
  const double dx = (x + 0.5 - (b.x0 + rx)) / rx;
  return dy * dy + dx * dx <= 1.0;
}

Scene RenderScene(const SceneSpec& spec) {
  if (spec.stuff_layout.height() != spec.height ||
      spec.stuff_layout.width() != spec.width) {
    throw std::invalid_argument("stuff layout dims differ from the scene");
  }
  const CategorySet& cats = spec.categories;
  const int n_stuff = cats.n_stuff();
  Scene scene;
  scene.spec = spec;
  scene.panoptic = PanopticMap(spec.height, spec.width);
  for (int i = 0; i < static_cast<int>(spec.instances.size()); ++i) {
    const SceneInstance& inst = spec.instances[i];
    if (!cats.IsThing(inst.category)) {
      throw std::invalid_argument("scene instance has a non-thing category");
    }
    SegmentInfo info;
    info.category = inst.category;
    scene.panoptic.segments.emplace(InstanceSegmentId(n_stuff, i), info);
  }
  for (int k = 0; k < n_stuff; ++k) {
    SegmentInfo info;
    info.category = k;
    scene.panoptic.segments.emplace(StuffSegmentId(k), info);
  }
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      uint32_t id = kVoidSegment;
      for (int i = static_cast<int>(spec.instances.size()) - 1; i >= 0; --i) {
        if (ShapeCovers(spec.instances[i], y, x)) {
          id = InstanceSegmentId(n_stuff, i);
          break;
        }
      }
      if (id == kVoidSegment) {
        const int32_t k = spec.stuff_layout(y, x);
        if (k >= n_stuff) {
          throw std::invalid_argument("stuff layout label out of range");
        }
        if (k >= 0) id = StuffSegmentId(k);
      }
      scene.panoptic.ids(y, x) = id;
    }
  }
  RecomputeSegmentStats(scene.panoptic);
  scene.semantic = SemanticLabels(scene.panoptic);
  return scene;
}

Scene GenerateScene(uint64_t seed, const SceneOptions& options) {
  if (options.height <= 0 || options.width <= 0) {
    throw std::invalid_argument("scene dims must be positive");
  }
  if (options.instances < 0 || (options.instances > 0 && options.n_thing == 0)) {
    throw std::invalid_argument("instances need at least one thing category");
  }
  SceneSpec spec;
  spec.height = options.height;
  spec.width = options.width;
  spec.seed = seed;
  spec.categories = SyntheticCategories(options.n_stuff, options.n_thing);
  SplitMix64 layout_rng(DeriveSeed(seed, kLayoutStream));
  spec.stuff_layout =
      VoronoiLayout(options.height, options.width, options.n_stuff, layout_rng);

  SplitMix64 rng(DeriveSeed(seed, kInstanceStream));
  std::vector<int64_t> areas;
  for (int i = 0; i < options.instances; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < options.max_attempts && !placed; ++attempt) {
      SceneInstance inst;
      inst.shape = rng.Below(2) == 0 ? ShapeKind::kRectangle : ShapeKind::kEllipse;
      inst.category = options.n_stuff + static_cast<int>(rng.Below(options.n_thing));
      const int h = DrawSide(rng, options, options.height);
      const int w = DrawSide(rng, options, options.width);
      inst.box.y0 = rng.UniformInt(0, options.height - h);
      inst.box.x0 = rng.UniformInt(0, options.width - w);
      inst.box.y1 = inst.box.y0 + h;
      inst.box.x1 = inst.box.x0 + w;
      std::vector<int64_t> next = AreasWithTop(spec.instances, areas, inst);
      placed = std::all_of(next.begin(), next.end(), [&](int64_t a) {
        return a >= options.min_visible_area;
      });
      if (placed) {
        spec.instances.push_back(inst);
        areas = std::move(next);
      }
    }
    if (!placed) {
      throw std::invalid_argument("could not place instance " +
                                  std::to_string(i) + " with visible area >= " +
                                  std::to_string(options.min_visible_area));
    }
  }
  return RenderScene(spec);
}

SyntheticInputs SynthesizeInputs(const Scene& scene,
                                 const SynthOptions& options) {
  const SceneSpec& spec = scene.spec;
  const CategorySet& cats = spec.categories;
  const int h = spec.height;
  const int w = spec.width;
  SyntheticInputs out;
  out.semantic = LogitTensor(cats.size(), h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int32_t label = scene.semantic(y, x);
      if (label >= 0) out.semantic.at(label, y, x) = options.logit_scale;
    }
  }
  if (options.noise_sigma > 0.0) {
    SplitMix64 noise(DeriveSeed(options.seed, kNoiseStream));
    for (double& v : out.semantic.data()) v += options.noise_sigma * noise.Gaussian();
  }

  SplitMix64 rng(DeriveSeed(options.seed, kProposalStream));
  const int n_stuff = cats.n_stuff();
  for (int i = 0; i < static_cast<int>(spec.instances.size()); ++i) {
    const SceneInstance& inst = spec.instances[i];
    const uint32_t segment = InstanceSegmentId(n_stuff, i);
    const BBox gt_box{static_cast<double>(inst.box.x0),
                      static_cast<double>(inst.box.y0),
                      static_cast<double>(inst.box.x1),
                      static_cast<double>(inst.box.y1)};
    BBox box = gt_box;
    if (options.box_jitter > 0.0) {
      const double jw = options.box_jitter * inst.box.width();
      const double jh = options.box_jitter * inst.box.height();
      box.x0 = std::clamp(box.x0 + rng.Uniform(-jw, jw), 0.0, w - 1.0);
      box.y0 = std::clamp(box.y0 + rng.Uniform(-jh, jh), 0.0, h - 1.0);
      box.x1 = std::clamp(box.x1 + rng.Uniform(-jw, jw), box.x0 + 1.0,
                          static_cast<double>(w));
      box.y1 = std::clamp(box.y1 + rng.Uniform(-jh, jh), box.y0 + 1.0,
                          static_cast<double>(h));
    }
    auto sample_mask = [&](const BBox& b, double sigma) {
      RealGrid patch(MaskPatch::kSide, MaskPatch::kSide, 0.0);
      for (int r = 0; r < MaskPatch::kSide; ++r) {
        const int y = PatchCellToPixel(b.y0, b.y1, r);
        for (int c = 0; c < MaskPatch::kSide; ++c) {
          const int x = PatchCellToPixel(b.x0, b.x1, c);
          const bool on = y >= 0 && y < h && x >= 0 && x < w &&
                          scene.panoptic.ids(y, x) == segment;
          double v = on ? options.mask_logit : -options.mask_logit;
          if (sigma > 0.0) v += sigma * rng.Gaussian();
          patch(r, c) = v;
        }
      }
      return MaskPatch(std::move(patch));
    };
    InstanceProposal proposal;
    proposal.box = box;
    proposal.category = inst.category;
    proposal.score = rng.Uniform(0.7, 1.0);
    proposal.mask = sample_mask(box, options.noise_sigma);
    out.proposals.push_back(std::move(proposal));

    GroundTruthInstance gt;
    gt.segment_id = segment;
    gt.proposal.box = gt_box;
    gt.proposal.category = inst.category;
    gt.proposal.score = 1.0;
    gt.proposal.mask = sample_mask(gt_box, 0.0);
    out.ground_truth.push_back(std::move(gt));
  }
  return out;
}

namespace {

// Per-image brute-force statistics.
struct OracleImage {
  std::vector<CategoryStats> stats;
  std::vector<int64_t> sem_tp;
  std::vector<int64_t> sem_gt;
  std::vector<int64_t> sem_pred;
};

int CategoryOf(const PanopticMap& map, uint32_t id) {
  auto it = map.segments.find(id);
  if (it == map.segments.end()) {
    throw std::invalid_argument("segment id " + std::to_string(id) +
                                " has no table entry");
  }
  return it->second.category;
}

OracleImage OracleImageStats(const PanopticMap& pred, const PanopticMap& gt,
                             const CategorySet& categories) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw std::invalid_argument("prediction and ground truth differ in size");
  }
  const int k = categories.size();
  const std::size_t n = gt.ids.size();
  std::set<uint32_t> pred_ids;
  std::set<uint32_t> gt_ids;
  for (std::size_t q = 0; q < n; ++q) {
    if (pred.ids[q] != kVoidSegment) pred_ids.insert(pred.ids[q]);
    if (gt.ids[q] != kVoidSegment) gt_ids.insert(gt.ids[q]);
  }

  OracleImage img;
  img.stats.assign(k, {});
  std::set<uint32_t> matched_pred;
  std::set<uint32_t> matched_gt;
  for (uint32_t g : gt_ids) {
    const int gc = CategoryOf(gt, g);
    if (gt.segments.at(g).iscrowd) continue;
    for (uint32_t p : pred_ids) {
      if (CategoryOf(pred, p) != gc) continue;
      int64_t inter = 0;
      int64_t uni = 0;
      for (std::size_t q = 0; q < n; ++q) {
        const bool in_p = pred.ids[q] == p;
        const bool in_g = gt.ids[q] == g;
        if (in_p && in_g) ++inter;
        if (in_g || (in_p && gt.ids[q] != kVoidSegment)) ++uni;
      }
      const double iou = static_cast<double>(inter) / static_cast<double>(uni);
      if (iou > 0.5) {
        img.stats[gc].tp += 1;
        img.stats[gc].iou_sum += iou;
        matched_pred.insert(p);
        matched_gt.insert(g);
      }
    }
  }
  for (uint32_t g : gt_ids) {
    if (!gt.segments.at(g).iscrowd && !matched_gt.contains(g)) {
      img.stats[CategoryOf(gt, g)].fn += 1;
    }
  }
  for (uint32_t p : pred_ids) {
    if (matched_pred.contains(p)) continue;
    const int pc = CategoryOf(pred, p);
    int64_t area = 0;
    int64_t ignored = 0;
    for (std::size_t q = 0; q < n; ++q) {
      if (pred.ids[q] != p) continue;
      ++area;
      const uint32_t g = gt.ids[q];
      if (g == kVoidSegment) {
        ++ignored;
      } else if (gt.segments.at(g).iscrowd && CategoryOf(gt, g) == pc) {
        ++ignored;
      }
    }
    if (static_cast<double>(ignored) / static_cast<double>(area) <= 0.5) {
      img.stats[pc].fp += 1;
    }
  }

  img.sem_tp.assign(k, 0);
  img.sem_gt.assign(k, 0);
  img.sem_pred.assign(k, 0);
  for (std::size_t q = 0; q < n; ++q) {
    if (gt.ids[q] == kVoidSegment) continue;
    const int gc = CategoryOf(gt, gt.ids[q]);
    ++img.sem_gt[gc];
    if (pred.ids[q] == kVoidSegment) continue;
    const int pc = CategoryOf(pred, pred.ids[q]);
    ++img.sem_pred[pc];
    if (pc == gc) ++img.sem_tp[gc];
  }
  return img;
}

}  // namespace

EvalReport OraclePq(
    std::span<const std::pair<PanopticMap, PanopticMap>> pred_gt,
    const CategorySet& categories) {
  const int k = categories.size();
  std::vector<CategoryStats> totals(k);
  std::vector<int64_t> sem_tp(k, 0), sem_gt(k, 0), sem_pred(k, 0);
  for (const auto& [pred, gt] : pred_gt) {
    const OracleImage img = OracleImageStats(pred, gt, categories);
    for (int c = 0; c < k; ++c) {
      totals[c].tp += img.stats[c].tp;
      totals[c].fp += img.stats[c].fp;
      totals[c].fn += img.stats[c].fn;
      totals[c].iou_sum += img.stats[c].iou_sum;
      sem_tp[c] += img.sem_tp[c];
      sem_gt[c] += img.sem_gt[c];
      sem_pred[c] += img.sem_pred[c];
    }
  }

  EvalReport report;
  report.images = static_cast<int64_t>(pred_gt.size());
  double miou_total = 0.0;
  int miou_count = 0;
  double sums[3][3] = {};  // [all, thing, stuff][pq, sq, rq]
  int counts[3] = {};
  for (int c = 0; c < k; ++c) {
    const CategoryStats& s = totals[c];
    ClassReport cr;
    cr.id = categories.at(c).id;
    cr.name = categories.at(c).name;
    cr.is_thing = categories.IsThing(c);
    cr.stats = s;
    const double tp = static_cast<double>(s.tp);
    const double denom = tp + s.fp / 2.0 + s.fn / 2.0;
    cr.counted = denom > 0.0;
    if (cr.counted) {
      cr.rq = tp / denom;
      cr.pq = s.iou_sum / denom;
      cr.sq = s.tp > 0 ? s.iou_sum / tp : 0.0;
      for (int group : {0, cr.is_thing ? 1 : 2}) {
        sums[group][0] += cr.pq;
        sums[group][1] += cr.sq;
        sums[group][2] += cr.rq;
        ++counts[group];
      }
    }
    const int64_t uni = sem_gt[c] + sem_pred[c] - sem_tp[c];
    cr.iou = uni > 0 ? static_cast<double>(sem_tp[c]) / uni : 0.0;
    cr.in_gt = sem_gt[c] > 0;
    if (cr.in_gt) {
      miou_total += cr.iou;
      ++miou_count;
    }
    report.per_class.push_back(cr);
  }
  auto mean = [&](int group, int metric) {
    return counts[group] > 0 ? sums[group][metric] / counts[group] : 0.0;
  };
  report.pq = mean(0, 0);
  report.sq = mean(0, 1);
  report.rq = mean(0, 2);
  report.pq_th = mean(1, 0);
  report.sq_th = mean(1, 1);
  report.rq_th = mean(1, 2);
  report.pq_st = mean(2, 0);
  report.sq_st = mean(2, 1);
  report.rq_st = mean(2, 2);
  report.n = counts[0];
  report.n_th = counts[1];
  report.n_st = counts[2];
  report.miou = miou_count > 0 ? miou_total / miou_count : 0.0;
  return report;
}

EvalReport OraclePq(const PanopticMap& pred, const PanopticMap& gt,
                    const CategorySet& categories) {
  const std::pair<PanopticMap, PanopticMap> one{pred, gt};
  return OraclePq(std::span(&one, 1), categories);
}

nlohmann::json SceneSpecToJson(const SceneSpec& spec) {
  nlohmann::json cats = nlohmann::json::array();
  for (const Category& c : spec.categories.categories()) {
    cats.push_back({{"id", c.id}, {"name", c.name}, {"isthing", c.is_thing}});
  }
  nlohmann::json instances = nlohmann::json::array();
  for (const SceneInstance& inst : spec.instances) {
    instances.push_back(
        {{"shape", ShapeName(inst.shape)},
         {"category", inst.category},
         {"box", {inst.box.x0, inst.box.y0, inst.box.x1, inst.box.y1}}});
  }
  std::vector<int32_t> layout(spec.stuff_layout.values().begin(),
                              spec.stuff_layout.values().end());
  return {{"height", spec.height},     {"width", spec.width},
          {"seed", spec.seed},         {"categories", cats},
          {"instances", instances},    {"stuff_layout", layout}};
}

SceneSpec SceneSpecFromJson(const nlohmann::json& json) {
  try {
    SceneSpec spec;
    spec.height = json.at("height").get<int>();
    spec.width = json.at("width").get<int>();
    spec.seed = json.value("seed", uint64_t{0});
    std::vector<Category> cats;
    for (const auto& c : json.at("categories")) {
      cats.push_back({c.at("id").get<int>(), c.at("name").get<std::string>(),
                      c.at("isthing").get<bool>()});
    }
    spec.categories = CategorySet(std::move(cats));
    for (const auto& i : json.at("instances")) {
      SceneInstance inst;
      const std::string shape = i.at("shape").get<std::string>();
      if (shape == "ellipse") {
        inst.shape = ShapeKind::kEllipse;
      } else if (shape == "rectangle") {
        inst.shape = ShapeKind::kRectangle;
      } else {
        throw std::invalid_argument("unknown shape '" + shape + "'");
      }
      inst.category = i.at("category").get<int>();
      const auto box = i.at("box").get<std::vector<int>>();
      if (box.size() != 4) throw std::invalid_argument("box needs 4 values");
      inst.box = {box[0], box[1], box[2], box[3]};
      spec.instances.push_back(inst);
    }
    spec.stuff_layout = LabelGrid(
        spec.height, spec.width,
        json.at("stuff_layout").get<std::vector<int32_t>>());
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed scene JSON: ") + e.what());
  }
}

BenchFixture MakeBenchFixture(const BenchOptions& options) {
  SceneOptions scene_options;
  scene_options.height = options.height;
  scene_options.width = options.width;
  scene_options.n_stuff = options.n_stuff;
  scene_options.n_thing = options.n_thing;
  scene_options.instances = options.instances;
  scene_options.exact_boxes = false;
  const int short_side = std::min(options.height, options.width);
  scene_options.min_side = std::max(4, short_side / 32);
  scene_options.max_side = std::max(8, short_side / 4);
  scene_options.min_visible_area = 64;
  const Scene scene = GenerateScene(options.seed, scene_options);

  SynthOptions synth;
  synth.noise_sigma = 1.0;
  synth.box_jitter = 0.05;
  synth.seed = options.seed;
  BenchFixture fixture;
  fixture.categories = scene.spec.categories;
  fixture.inputs = SynthesizeInputs(scene, synth);
  return fixture;
}

BenchResult Bench(BenchPipeline pipeline, const BenchFixture& fixture,
                  int repeats) {
  if (repeats <= 0) throw std::invalid_argument("repeats must be positive");
  BenchResult result;
  result.pipeline = pipeline == BenchPipeline::kFusion ? "fusion" : "combine";
  result.repeats = repeats;
  const auto& inputs = fixture.inputs;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    PanopticMap map;
    if (pipeline == BenchPipeline::kFusion) {
      map = RunFusionPipeline(inputs.semantic, inputs.proposals,
                              fixture.categories);
    } else {
      map = RunCombinePipeline(inputs.semantic, inputs.proposals,
                               fixture.categories);
    }
    const auto stop = std::chrono::steady_clock::now();
    result.samples_ms.push_back(
        std::chrono::duration<double, std::milli>(stop - start).count());
  }
  double total = 0.0;
  for (double ms : result.samples_ms) total += ms;
  result.mean_ms = total / repeats;
  result.min_ms = *std::min_element(result.samples_ms.begin(),
                                    result.samples_ms.end());
  return result;
}

nlohmann::json BenchToJson(const BenchResult& result) {
  return {{"pipeline", result.pipeline},
          {"repeats", result.repeats},
          {"mean_ms", result.mean_ms},
          {"min_ms", result.min_ms},
          {"samples_ms", result.samples_ms}};
}

}  // namespace panofuse
