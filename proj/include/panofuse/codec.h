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

// COCO panoptic interchange: 8-bit RGB PNGs with id = R + 256 G + 256^2 B and
// a JSON file holding categories and per-image segments_info.
//
// Dataset directory layout used here:
//   <dir>/panoptic.json     {"images", "annotations", "categories"}
//   <dir>/panoptic/<name>.png

#ifndef PANOFUSE_CODEC_H_
#define PANOFUSE_CODEC_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "panofuse/panoptic_map.h"
#include "panofuse/tensor.h"

namespace panofuse {

inline constexpr uint32_t kMaxEncodableId = (1u << 24) - 1;

// Pixel ids that have no segments_info entry.
class SegmentMismatchError : public std::invalid_argument {
 public:
  explicit SegmentMismatchError(std::vector<uint32_t> ids);
  const std::vector<uint32_t>& ids() const { return ids_; }

 private:
  std::vector<uint32_t> ids_;
};

struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;  // row-major RGB
  bool operator==(const RgbImage&) const = default;
};

std::vector<uint8_t> EncodeRgbPng(const RgbImage& image);
// Accepts only 8-bit RGB without alpha or palette.
RgbImage DecodeRgbPng(std::span<const uint8_t> bytes);

// Throws std::invalid_argument when an id exceeds kMaxEncodableId.
std::vector<uint8_t> EncodeIdPng(const SegmentIdGrid& ids);
SegmentIdGrid DecodeIdPng(std::span<const uint8_t> bytes);

// segments_info entry; category_id is the external category id.
struct SegmentRecord {
  uint32_t id = 0;
  int category_id = 0;
  int64_t area = 0;
  std::array<int, 4> bbox{};  // x, y, width, height
  bool iscrowd = false;
};

struct PanopticAnnotation {
  nlohmann::json image_id;
  std::string file_name;
  std::vector<SegmentRecord> segments_info;
};

std::vector<uint8_t> EncodePng(const PanopticMap& map);

// Decodes `bytes` and attaches the table. Segments whose category_id is not
// in `categories` are treated as void. Throws SegmentMismatchError if pixels
// carry ids absent from `segments_info`.
PanopticMap DecodePng(std::span<const uint8_t> bytes,
                      std::span<const SegmentRecord> segments_info,
                      const CategorySet& categories);

PanopticAnnotation MakeAnnotation(const PanopticMap& map,
                                  const CategorySet& categories,
                                  const nlohmann::json& image_id,
                                  const std::string& file_name);

nlohmann::json AnnotationToJson(const PanopticAnnotation& annotation);
PanopticAnnotation AnnotationFromJson(const nlohmann::json& json);

// Accepts a bare list or an object with a "categories" list. Stuff categories
// are ordered before things, otherwise the file order is kept.
CategorySet CategoriesFromJson(const nlohmann::json& json);
nlohmann::json CategoriesToJson(const CategorySet& categories);
CategorySet ReadCategoriesFile(const std::filesystem::path& path);

nlohmann::json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& json);

struct DatasetEntry {
  std::string name;  // file stem
  PanopticMap map;
};

void WritePanopticDataset(const std::filesystem::path& dir,
                          std::span<const DatasetEntry> entries,
                          const CategorySet& categories);
// Entries in annotation order.
std::vector<DatasetEntry> ReadPanopticDataset(const std::filesystem::path& dir,
                                              const CategorySet& categories);

// Deterministic color per segment id; void is black.
std::array<uint8_t, 3> PaletteColor(uint32_t id);
RgbImage RenderPanoptic(const PanopticMap& map);

}  // namespace panofuse

#endif  // PANOFUSE_CODEC_H_
