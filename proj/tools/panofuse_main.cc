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

// panofuse: panoptic fusion, baseline combination, evaluation, synthetic
// fixtures, benchmarking and rendering.
//
// Exit codes: 0 success, 1 internal failure, 2 usage or input error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "panofuse/codec.h"
#include "panofuse/combine.h"
#include "panofuse/fusion.h"
#include "panofuse/metrics.h"
#include "panofuse/pruning.h"
#include "panofuse/scene.h"
#include "panofuse/tensor_io.h"

namespace fs = std::filesystem;

namespace panofuse {
namespace {

constexpr int kUsageError = 2;

int64_t ParseMinStuffArea(const std::string& text) {
  if (text == "coco") return kCocoMinStuffArea;
  if (text == "cityscapes") return kCityscapesMinStuffArea;
  if (text == "internal") return kInternalMinStuffArea;
  std::size_t used = 0;
  long long value = -1;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || value < 0) {
    throw std::invalid_argument("--min-stuff-area: expected a non-negative "
                                "integer or coco|cityscapes|internal, got '" +
                                text + "'");
  }
  return value;
}

std::pair<int, int> ParseDims(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x != std::string::npos) {
      std::size_t a = 0, b = 0;
      const int h = std::stoi(text.substr(0, x), &a);
      const int w = std::stoi(text.substr(x + 1), &b);
      if (a == x && b == text.size() - x - 1 && h > 0 && w > 0) return {h, w};
    }
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("--dims: expected HxW, got '" + text + "'");
}

std::pair<int, int> ParseClasses(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma != std::string::npos) {
      std::size_t a = 0, b = 0;
      const int s = std::stoi(text.substr(0, comma), &a);
      const int t = std::stoi(text.substr(comma + 1), &b);
      if (a == comma && b == text.size() - comma - 1 && s >= 0 && t >= 0) {
        return {s, t};
      }
    }
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("--classes: expected STUFF,THING, got '" + text +
                              "'");
}

bool ParseOnOff(const std::string& text, const char* flag) {
  if (text == "on") return true;
  if (text == "off") return false;
  throw std::invalid_argument(std::string(flag) + ": expected on|off, got '" +
                              text + "'");
}

LogitTensor LoadLogits(const std::vector<std::string>& paths) {
  std::vector<LogitTensor> scales;
  for (const std::string& path : paths) {
    try {
      scales.push_back(ToLogitTensor(ReadTensorFile(path)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ": " + e.what());
    }
  }
  if (scales.size() == 1) return std::move(scales.front());
  return AverageLogitMaps(scales);
}

struct PipelineFlags {
  std::vector<std::string> logits;
  std::string proposals;
  std::string categories;
  std::string min_stuff_area = "coco";
  std::string unknown = "on";
  std::string out;
  std::string name;
  double nms = 0.5;
  double score = 0.6;
  double overlap = 0.3;
  double paste_overlap = 0.5;
};

void AddPipelineFlags(CLI::App* cmd, PipelineFlags& f, bool fusion) {
  cmd->add_option("--logits", f.logits,
                  "Semantic logits (UPST, C x H x W); several files are "
                  "averaged as multi-scale inputs")
      ->required();
  cmd->add_option("--proposals", f.proposals, "Instance proposals JSON")
      ->required();
  cmd->add_option("--categories", f.categories, "Categories JSON")->required();
  cmd->add_option("--min-stuff-area", f.min_stuff_area,
                  "Pixels, or a preset: coco (4096), cityscapes (2048), "
                  "internal (2048)")
      ->capture_default_str();
  if (fusion) {
    cmd->add_option("--unknown", f.unknown, "Unknown channel: on|off")
        ->capture_default_str();
  } else {
    cmd->add_option("--paste-overlap", f.paste_overlap,
                    "Drop a mask whose occupied fraction exceeds this")
        ->capture_default_str();
  }
  cmd->add_option("--out", f.out, "Output dataset directory")->required();
  cmd->add_option("--name", f.name,
                  "Image name (default: stem of the first logits file)");
  cmd->add_option("--nms", f.nms, "Class-agnostic NMS IoU")
      ->capture_default_str();
  cmd->add_option("--score", f.score, "Keep proposals scoring above this")
      ->capture_default_str();
  cmd->add_option("--overlap", f.overlap,
                  "Per-category canvas intersection-over-self limit")
      ->capture_default_str();
}

int RunPipeline(const PipelineFlags& f, bool fusion) {
  const CategorySet categories = ReadCategoriesFile(f.categories);
  const LogitTensor semantic = LoadLogits(f.logits);
  const std::vector<InstanceProposal> proposals =
      ProposalsFromJson(ReadJsonFile(f.proposals), categories);
  if (semantic.channels() != categories.size()) {
    throw std::invalid_argument(
        "logits have " + std::to_string(semantic.channels()) +
        " channels but " + std::to_string(categories.size()) +
        " categories are defined");
  }
  PruningOptions pruning;
  pruning.nms_iou = f.nms;
  pruning.min_score = f.score;
  pruning.overlap_threshold = f.overlap;
  const int64_t min_area = ParseMinStuffArea(f.min_stuff_area);

  PanopticMap map;
  if (fusion) {
    FusionOptions options;
    options.pruning = pruning;
    options.enable_unknown = ParseOnOff(f.unknown, "--unknown");
    options.min_stuff_area = min_area;
    map = RunFusionPipeline(semantic, proposals, categories, options);
  } else {
    CombineOptions options;
    options.pruning = pruning;
    options.overlap_threshold = f.paste_overlap;
    options.min_stuff_area = min_area;
    map = RunCombinePipeline(semantic, proposals, categories, options);
  }
  const std::string name =
      f.name.empty() ? fs::path(f.logits.front()).stem().string() : f.name;
  const DatasetEntry entry{name, std::move(map)};
  WritePanopticDataset(f.out, std::span(&entry, 1), categories);
  return 0;
}

struct EvalFlags {
  std::string pred;
  std::string gt;
  std::string categories;
  int jobs = 1;
};

int RunEval(const EvalFlags& f) {
  const CategorySet categories = ReadCategoriesFile(f.categories);
  const std::vector<DatasetEntry> gt = ReadPanopticDataset(f.gt, categories);
  std::vector<DatasetEntry> pred = ReadPanopticDataset(f.pred, categories);
  std::map<std::string, std::size_t> pred_index;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred_index.emplace(pred[i].name, i).second) {
      throw std::invalid_argument("duplicate prediction '" + pred[i].name + "'");
    }
  }
  std::vector<const PanopticMap*> matched(gt.size());
  std::set<std::string> gt_names;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    auto it = pred_index.find(gt[i].name);
    if (it == pred_index.end()) {
      throw std::invalid_argument("no prediction for image '" + gt[i].name + "'");
    }
    matched[i] = &pred[it->second].map;
    gt_names.insert(gt[i].name);
    const PanopticMap& p = *matched[i];
    if (p.height() != gt[i].map.height() || p.width() != gt[i].map.width()) {
      throw std::invalid_argument("image '" + gt[i].name + "': prediction is " +
                                  std::to_string(p.height()) + "x" +
                                  std::to_string(p.width()) +
                                  ", ground truth is " +
                                  std::to_string(gt[i].map.height()) + "x" +
                                  std::to_string(gt[i].map.width()));
    }
  }
  for (const DatasetEntry& e : pred) {
    if (!gt_names.contains(e.name)) {
      throw std::invalid_argument("prediction '" + e.name +
                                  "' has no ground truth");
    }
  }

  // Per-image stats land in fixed slots; the reduction runs in image order.
  std::vector<MatchStats> stats(gt.size());
  std::vector<std::string> errors(gt.size());
  const int jobs = std::max(1, std::min<int>(f.jobs, static_cast<int>(gt.size())));
  std::vector<std::thread> workers;
  for (int j = 0; j < jobs; ++j) {
    workers.emplace_back([&, j] {
      for (std::size_t i = j; i < gt.size(); i += jobs) {
        try {
          stats[i] = MatchAndScore(*matched[i], gt[i].map, categories);
        } catch (const std::exception& e) {
          errors[i] = "image '" + gt[i].name + "': " + e.what();
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  for (const std::string& e : errors) {
    if (!e.empty()) throw std::invalid_argument(e);
  }
  std::cout << ReportToJson(Aggregate(stats, categories)).dump(2) << "\n";
  return 0;
}

struct SynthFlags {
  uint64_t seed = 0;
  std::string dims = "64x64";
  std::string classes = "3,3";
  int instances = 4;
  double noise = 0.0;
  double jitter = 0.0;
  std::string exact = "on";
  std::string out;
};

int RunSynth(const SynthFlags& f) {
  SceneOptions options;
  std::tie(options.height, options.width) = ParseDims(f.dims);
  std::tie(options.n_stuff, options.n_thing) = ParseClasses(f.classes);
  options.instances = f.instances;
  options.exact_boxes = ParseOnOff(f.exact, "--exact-boxes");
  options.min_side = std::max(4, std::min(options.height, options.width) / 16);
  options.max_side = std::max(8, std::min(options.height, options.width) / 2);
  if (f.noise < 0.0 || f.jitter < 0.0) {
    throw std::invalid_argument("--noise and --jitter must be >= 0");
  }
  const Scene scene = GenerateScene(f.seed, options);
  SynthOptions synth;
  synth.noise_sigma = f.noise;
  synth.box_jitter = f.jitter;
  synth.seed = f.seed;
  const SyntheticInputs inputs = SynthesizeInputs(scene, synth);

  const fs::path out(f.out);
  fs::create_directories(out);
  const CategorySet& categories = scene.spec.categories;
  WriteTensorFile(out / "scene.upst", ToRawTensor(inputs.semantic));
  WriteJsonFile(out / "proposals.json", ProposalsToJson(inputs.proposals, categories));
  WriteJsonFile(out / "categories.json", CategoriesToJson(categories));
  WriteJsonFile(out / "scene.json", SceneSpecToJson(scene.spec));
  const DatasetEntry entry{"scene", scene.panoptic};
  WritePanopticDataset(out / "gt", std::span(&entry, 1), categories);
  return 0;
}

struct BenchFlags {
  std::string pipeline = "both";
  std::string dims = "1024x2048";
  int stuff = 50;
  int things = 8;
  int instances = 30;
  int repeats = 10;
  uint64_t seed = 7;
};

int RunBench(const BenchFlags& f) {
  if (f.pipeline != "fusion" && f.pipeline != "combine" && f.pipeline != "both") {
    throw std::invalid_argument("--pipeline: expected fusion|combine|both");
  }
  if (f.repeats <= 0) throw std::invalid_argument("--repeats must be positive");
  BenchOptions options;
  std::tie(options.height, options.width) = ParseDims(f.dims);
  options.n_stuff = f.stuff;
  options.n_thing = f.things;
  options.instances = f.instances;
  options.repeats = f.repeats;
  options.seed = f.seed;
  const BenchFixture fixture = MakeBenchFixture(options);

  nlohmann::json results = nlohmann::json::array();
  std::optional<BenchResult> fusion, combine;
  if (f.pipeline != "combine") {
    fusion = Bench(BenchPipeline::kFusion, fixture, f.repeats);
    results.push_back(BenchToJson(*fusion));
  }
  if (f.pipeline != "fusion") {
    combine = Bench(BenchPipeline::kCombine, fixture, f.repeats);
    results.push_back(BenchToJson(*combine));
  }
  nlohmann::json report = {{"height", options.height},
                           {"width", options.width},
                           {"n_stuff", options.n_stuff},
                           {"n_thing", options.n_thing},
                           {"instances", fixture.inputs.proposals.size()},
                           {"results", results}};
  if (fusion && combine) {
    report["combine_over_fusion"] = combine->mean_ms / fusion->mean_ms;
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

struct RenderFlags {
  std::string png;
  std::string json;
  std::string out;
};

int RunRender(const RenderFlags& f) {
  const std::vector<uint8_t> bytes = ReadFileBytes(f.png);
  const nlohmann::json root = ReadJsonFile(f.json);
  // Either a single annotation or a panoptic.json holding many.
  nlohmann::json annotation = root;
  if (root.contains("annotations")) {
    const std::string file = fs::path(f.png).filename().string();
    annotation = nullptr;
    for (const auto& a : root["annotations"]) {
      if (a.value("file_name", std::string()) == file) annotation = a;
    }
    if (annotation.is_null()) {
      throw std::invalid_argument(f.json + ": no annotation for " + file);
    }
  }
  const PanopticAnnotation ann = AnnotationFromJson(annotation);
  PanopticMap map;
  map.ids = DecodeIdPng(bytes);
  std::set<uint32_t> known;
  for (const SegmentRecord& s : ann.segments_info) known.insert(s.id);
  std::set<uint32_t> missing;
  for (uint32_t id : map.ids.values()) {
    if (id != kVoidSegment && !known.contains(id)) missing.insert(id);
  }
  if (!missing.empty()) throw SegmentMismatchError({missing.begin(), missing.end()});
  WriteFileBytes(f.out, EncodeRgbPng(RenderPanoptic(map)));
  return 0;
}

}  // namespace
}  // namespace panofuse

int main(int argc, char** argv) {
  using namespace panofuse;
  CLI::App app{"Parameter-free panoptic fusion of semantic and instance outputs"};
  app.require_subcommand(1);

  PipelineFlags fuse_flags, combine_flags;
  auto* fuse = app.add_subcommand("fuse", "Fuse logits and proposals into a panoptic map");
  AddPipelineFlags(fuse, fuse_flags, true);
  auto* combine = app.add_subcommand("combine", "Heuristic combination baseline");
  AddPipelineFlags(combine, combine_flags, false);

  EvalFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "PQ/SQ/RQ and mIoU report as JSON");
  eval->add_option("--pred", eval_flags.pred, "Predicted dataset directory")->required();
  eval->add_option("--gt", eval_flags.gt, "Ground-truth dataset directory")->required();
  eval->add_option("--categories", eval_flags.categories, "Categories JSON")->required();
  eval->add_option("--jobs", eval_flags.jobs, "Worker threads")->capture_default_str();

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "Write a synthetic scene fixture");
  synth->add_option("--seed", synth_flags.seed)->capture_default_str();
  synth->add_option("--dims", synth_flags.dims, "HxW")->capture_default_str();
  synth->add_option("--classes", synth_flags.classes, "STUFF,THING")->capture_default_str();
  synth->add_option("--instances", synth_flags.instances)->capture_default_str();
  synth->add_option("--noise", synth_flags.noise, "Logit noise sigma")->capture_default_str();
  synth->add_option("--jitter", synth_flags.jitter, "Box jitter fraction")->capture_default_str();
  synth->add_option("--exact-boxes", synth_flags.exact, "on|off")->capture_default_str();
  synth->add_option("--out", synth_flags.out, "Output directory")->required();

  BenchFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Time the post-network pipelines");
  bench->add_option("--pipeline", bench_flags.pipeline, "fusion|combine|both")->capture_default_str();
  bench->add_option("--dims", bench_flags.dims, "HxW")->capture_default_str();
  bench->add_option("--stuff", bench_flags.stuff)->capture_default_str();
  bench->add_option("--things", bench_flags.things)->capture_default_str();
  bench->add_option("--instances", bench_flags.instances)->capture_default_str();
  bench->add_option("--repeats", bench_flags.repeats)->capture_default_str();
  bench->add_option("--seed", bench_flags.seed)->capture_default_str();

  RenderFlags render_flags;
  auto* render = app.add_subcommand("render", "Colorize a panoptic PNG");
  render->add_option("--png", render_flags.png, "Panoptic PNG")->required();
  render->add_option("--json", render_flags.json, "Annotation or panoptic.json")->required();
  render->add_option("--out", render_flags.out, "Output PNG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*fuse) return RunPipeline(fuse_flags, true);
    if (*combine) return RunPipeline(combine_flags, false);
    if (*eval) return RunEval(eval_flags);
    if (*synth) return RunSynth(synth_flags);
    if (*bench) return RunBench(bench_flags);
    if (*render) return RunRender(render_flags);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return kUsageError;
}
