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

#include "panofuse/tensor_io.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace panofuse {

namespace {

constexpr uint8_t kMagic[4] = {'U', 'P', 'S', 'T'};
constexpr std::size_t kHeaderSize = 7;

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t GetU32(std::span<const uint8_t> bytes, std::size_t offset) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(bytes[offset + i]) << (8 * i);
  }
  return v;
}

}  // namespace

std::vector<uint8_t> SerializeTensor(const RawTensor& tensor) {
  if (tensor.dims.size() > 255) {
    throw std::invalid_argument("SerializeTensor: too many dimensions");
  }
  std::size_t count = 1;
  for (uint32_t d : tensor.dims) count *= d;
  if (count != tensor.values.size()) {
    throw std::invalid_argument("SerializeTensor: payload size != prod(dims)");
  }
  std::vector<uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kUpstVersion);
  out.push_back(kUpstFloat32);
  out.push_back(static_cast<uint8_t>(tensor.dims.size()));
  for (uint32_t d : tensor.dims) PutU32(out, d);
  out.reserve(out.size() + 4 * tensor.values.size());
  for (float v : tensor.values) PutU32(out, std::bit_cast<uint32_t>(v));
  return out;
}

RawTensor ParseTensor(std::span<const uint8_t> bytes) {
  if (bytes.size() < kHeaderSize ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::invalid_argument("UPST: bad magic");
  }
  if (bytes[4] != kUpstVersion) {
    throw std::invalid_argument("UPST: unsupported version " +
                                std::to_string(bytes[4]));
  }
  if (bytes[5] != kUpstFloat32) {
    throw std::invalid_argument("UPST: unsupported dtype " +
                                std::to_string(bytes[5]));
  }
  const std::size_t ndim = bytes[6];
  if (bytes.size() < kHeaderSize + 4 * ndim) {
    throw std::invalid_argument("UPST: truncated header");
  }
  RawTensor tensor;
  std::size_t count = 1;
  bool overflow = false;
  for (std::size_t i = 0; i < ndim; ++i) {
    const uint32_t d = GetU32(bytes, kHeaderSize + 4 * i);
    tensor.dims.push_back(d);
    overflow |= __builtin_mul_overflow(count, std::size_t{d}, &count);
  }
  if (count == 0) overflow = false;
  if (overflow || count > bytes.size() / 4) {
    throw std::invalid_argument("UPST: dims exceed payload size");
  }
  const std::size_t payload = kHeaderSize + 4 * ndim;
  if (bytes.size() != payload + 4 * count) {
    throw std::invalid_argument("UPST: payload size does not match dims");
  }
  tensor.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    tensor.values[i] = std::bit_cast<float>(GetU32(bytes, payload + 4 * i));
  }
  return tensor;
}

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot open " + path.string());
  }
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

RawTensor ReadTensorFile(const std::filesystem::path& path) {
  return ParseTensor(ReadFileBytes(path));
}

void WriteTensorFile(const std::filesystem::path& path,
                     const RawTensor& tensor) {
  WriteFileBytes(path, SerializeTensor(tensor));
}

RawTensor ToRawTensor(const LogitTensor& logits) {
  RawTensor raw;
  raw.dims = {static_cast<uint32_t>(logits.channels()),
              static_cast<uint32_t>(logits.height()),
              static_cast<uint32_t>(logits.width())};
  raw.values.assign(logits.data().begin(), logits.data().end());
  return raw;
}

LogitTensor ToLogitTensor(const RawTensor& raw) {
  if (raw.dims.size() != 3) {
    throw std::invalid_argument("expected a 3-D (C,H,W) tensor, got ndim=" +
                                std::to_string(raw.dims.size()));
  }
  return LogitTensor(static_cast<int>(raw.dims[0]),
                     static_cast<int>(raw.dims[1]),
                     static_cast<int>(raw.dims[2]),
                     std::vector<double>(raw.values.begin(), raw.values.end()));
}

}  // namespace panofuse
