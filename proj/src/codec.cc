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

#include "panofuse/codec.h"

#include <png.h>

#include <algorithm>
#include <set>
#include <unordered_map>

#include "panofuse/tensor_io.h"

namespace panofuse {

namespace {

std::string ListIds(const std::vector<uint32_t>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(ids[i]);
  }
  return out;
}

}  // namespace

SegmentMismatchError::SegmentMismatchError(std::vector<uint32_t> ids)
    : std::invalid_argument("segment ids missing from segments_info: " +
                            ListIds(ids)),
      ids_(std::move(ids)) {}

std::vector<uint8_t> EncodeRgbPng(const RgbImage& image) {
  if (image.height <= 0 || image.width <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.height) * image.width * 3) {
    throw std::invalid_argument("RGB image has inconsistent dims");
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.pixels.data(),
                                 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + png.message);
  }
  std::vector<uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0,
                                 image.pixels.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

RgbImage DecodeRgbPng(std::span<const uint8_t> bytes) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw std::invalid_argument(std::string("malformed PNG: ") + png.message);
  }
  if (png.format != PNG_FORMAT_RGB) {
    png_image_free(&png);
    throw std::invalid_argument("PNG must be 8-bit RGB without alpha");
  }
  RgbImage image;
  image.height = static_cast<int>(png.height);
  image.width = static_cast<int>(png.width);
  image.pixels.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, image.pixels.data(), 0, nullptr)) {
    throw std::invalid_argument(std::string("malformed PNG: ") + png.message);
  }
  return image;
}

std::vector<uint8_t> EncodeIdPng(const SegmentIdGrid& ids) {
  RgbImage image;
  image.height = ids.height();
  image.width = ids.width();
  image.pixels.resize(ids.size() * 3);
  for (std::size_t q = 0; q < ids.size(); ++q) {
    const uint32_t id = ids[q];
    if (id > kMaxEncodableId) {
      throw std::invalid_argument("segment id " + std::to_string(id) +
                                  " does not fit in 24 bits");
    }
    image.pixels[3 * q] = static_cast<uint8_t>(id & 0xFF);
    image.pixels[3 * q + 1] = static_cast<uint8_t>((id >> 8) & 0xFF);
    image.pixels[3 * q + 2] = static_cast<uint8_t>((id >> 16) & 0xFF);
  }
  return EncodeRgbPng(image);
}

SegmentIdGrid DecodeIdPng(std::span<const uint8_t> bytes) {
  const RgbImage image = DecodeRgbPng(bytes);
  SegmentIdGrid ids(image.height, image.width, kVoidSegment);
  for (std::size_t q = 0; q < ids.size(); ++q) {
    ids[q] = image.pixels[3 * q] | (image.pixels[3 * q + 1] << 8) |
             (image.pixels[3 * q + 2] << 16);
  }
  return ids;
}

std::vector<uint8_t> EncodePng(const PanopticMap& map) {
  return EncodeIdPng(map.ids);
}

PanopticMap DecodePng(std::span<const uint8_t> bytes,
                      std::span<const SegmentRecord> segments_info,
                      const CategorySet& categories) {
  PanopticMap map;
  map.ids = DecodeIdPng(bytes);
  std::unordered_map<uint32_t, bool> known;  // id -> kept (category known)
  for (const SegmentRecord& s : segments_info) {
    if (s.id == kVoidSegment) continue;
    if (known.contains(s.id)) {
      throw std::invalid_argument("duplicate segment id " + std::to_string(s.id));
    }
    const auto index = categories.IndexOfId(s.category_id);
    known.emplace(s.id, index.has_value());
    if (!index) continue;
    SegmentInfo info;
    info.category = *index;
    info.iscrowd = s.iscrowd;
    map.segments.emplace(s.id, info);
  }
  std::set<uint32_t> missing;
  for (uint32_t& id : map.ids.values()) {
    if (id == kVoidSegment) continue;
    auto it = known.find(id);
    if (it == known.end()) {
      missing.insert(id);
    } else if (!it->second) {
      id = kVoidSegment;
    }
  }
  if (!missing.empty()) {
    throw SegmentMismatchError({missing.begin(), missing.end()});
  }
  RecomputeSegmentStats(map);
  return map;
}

PanopticAnnotation MakeAnnotation(const PanopticMap& map,
                                  const CategorySet& categories,
                                  const nlohmann::json& image_id,
                                  const std::string& file_name) {
  PanopticAnnotation ann;
  ann.image_id = image_id;
  ann.file_name = file_name;
  for (const auto& [id, info] : map.segments) {
    if (info.area == 0) continue;
    SegmentRecord s;
    s.id = id;
    s.category_id = categories.at(info.category).id;
    s.area = info.area;
    s.bbox = {info.bbox.x, info.bbox.y, info.bbox.width, info.bbox.height};
    s.iscrowd = info.iscrowd;
    ann.segments_info.push_back(s);
  }
  return ann;
}

nlohmann::json AnnotationToJson(const PanopticAnnotation& annotation) {
  nlohmann::json segments = nlohmann::json::array();
  for (const SegmentRecord& s : annotation.segments_info) {
    segments.push_back({{"id", s.id},
                        {"category_id", s.category_id},
                        {"area", s.area},
                        {"bbox", s.bbox},
                        {"iscrowd", s.iscrowd ? 1 : 0}});
  }
  return {{"image_id", annotation.image_id},
          {"file_name", annotation.file_name},
          {"segments_info", segments}};
}

PanopticAnnotation AnnotationFromJson(const nlohmann::json& json) {
  try {
    PanopticAnnotation ann;
    ann.image_id = json.at("image_id");
    ann.file_name = json.at("file_name").get<std::string>();
    for (const auto& s : json.at("segments_info")) {
      SegmentRecord r;
      r.id = s.at("id").get<uint32_t>();
      r.category_id = s.at("category_id").get<int>();
      r.area = s.value("area", int64_t{0});
      if (s.contains("bbox")) r.bbox = s.at("bbox").get<std::array<int, 4>>();
      r.iscrowd = s.value("iscrowd", 0) != 0;
      ann.segments_info.push_back(r);
    }
    return ann;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed annotation: ") + e.what());
  }
}

CategorySet CategoriesFromJson(const nlohmann::json& json) {
  try {
    const nlohmann::json& list =
        json.is_object() ? json.at("categories") : json;
    if (!list.is_array()) {
      throw std::invalid_argument("categories must be a list");
    }
    std::vector<Category> stuff;
    std::vector<Category> things;
    for (const auto& c : list) {
      Category cat{c.at("id").get<int>(), c.value("name", std::string()),
                   c.at("isthing").get<int>() != 0};
      (cat.is_thing ? things : stuff).push_back(std::move(cat));
    }
    stuff.insert(stuff.end(), things.begin(), things.end());
    return CategorySet(std::move(stuff));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed categories: ") + e.what());
  }
}

nlohmann::json CategoriesToJson(const CategorySet& categories) {
  nlohmann::json list = nlohmann::json::array();
  for (const Category& c : categories.categories()) {
    list.push_back({{"id", c.id}, {"name", c.name}, {"isthing", c.is_thing ? 1 : 0}});
  }
  return list;
}

nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  try {
    return nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path,
                   const nlohmann::json& json) {
  const std::string text = json.dump(2) + "\n";
  WriteFileBytes(path, std::span<const uint8_t>(
                           reinterpret_cast<const uint8_t*>(text.data()),
                           text.size()));
}

CategorySet ReadCategoriesFile(const std::filesystem::path& path) {
  return CategoriesFromJson(ReadJsonFile(path));
}

void WritePanopticDataset(const std::filesystem::path& dir,
                          std::span<const DatasetEntry> entries,
                          const CategorySet& categories) {
  std::filesystem::create_directories(dir / "panoptic");
  nlohmann::json images = nlohmann::json::array();
  nlohmann::json annotations = nlohmann::json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const DatasetEntry& e = entries[i];
    const std::string file = e.name + ".png";
    WriteFileBytes(dir / "panoptic" / file, EncodePng(e.map));
    images.push_back({{"id", e.name},
                      {"file_name", file},
                      {"height", e.map.height()},
                      {"width", e.map.width()}});
    annotations.push_back(
        AnnotationToJson(MakeAnnotation(e.map, categories, e.name, file)));
  }
  WriteJsonFile(dir / "panoptic.json",
                {{"images", images},
                 {"annotations", annotations},
                 {"categories", CategoriesToJson(categories)}});
}

std::vector<DatasetEntry> ReadPanopticDataset(const std::filesystem::path& dir,
                                              const CategorySet& categories) {
  const nlohmann::json root = ReadJsonFile(dir / "panoptic.json");
  if (!root.contains("annotations") || !root["annotations"].is_array()) {
    throw std::invalid_argument((dir / "panoptic.json").string() +
                                ": missing annotations list");
  }
  std::vector<DatasetEntry> out;
  for (const auto& a : root["annotations"]) {
    const PanopticAnnotation ann = AnnotationFromJson(a);
    DatasetEntry e;
    e.name = std::filesystem::path(ann.file_name).stem().string();
    const std::vector<uint8_t> bytes = ReadFileBytes(dir / "panoptic" / ann.file_name);
    e.map = DecodePng(bytes, ann.segments_info, categories);
    out.push_back(std::move(e));
  }
  return out;
}

std::array<uint8_t, 3> PaletteColor(uint32_t id) {
  if (id == kVoidSegment) return {0, 0, 0};
  // Murmur3 finalizer.
  uint32_t h = id;
  h ^= h >> 16;
  h *= 0x85EBCA6Bu;
  h ^= h >> 13;
  h *= 0xC2B2AE35u;
  h ^= h >> 16;
  // Keep colors away from black so segments stay distinguishable from void.
  return {static_cast<uint8_t>(64 + (h & 0xFF) % 192),
          static_cast<uint8_t>(64 + ((h >> 8) & 0xFF) % 192),
          static_cast<uint8_t>(64 + ((h >> 16) & 0xFF) % 192)};
}

RgbImage RenderPanoptic(const PanopticMap& map) {
  RgbImage image;
  image.height = map.height();
  image.width = map.width();
  image.pixels.resize(map.ids.size() * 3);
  for (std::size_t q = 0; q < map.ids.size(); ++q) {
    const auto rgb = PaletteColor(map.ids[q]);
    std::copy(rgb.begin(), rgb.end(), image.pixels.begin() + 3 * q);
  }
  return image;
}

}  // namespace panofuse
