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


#ifndef PANOFUSE_TENSOR_IO_H_
#define PANOFUSE_TENSOR_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "panofuse/tensor.h"

namespace panofuse {

// In-memory image of a "UPST" tensor file:
//   bytes 0-3  magic "UPST"
//   byte  4    version (0x01)
//   byte  5    dtype (0x00 = float32)
//   byte  6    ndim
//   then ndim little-endian uint32 dims, then the little-endian row-major
//   float32 payload.
struct RawTensor {
  std::vector<uint32_t> dims;
  std::vector<float> values;

  bool operator==(const RawTensor&) const = default;
};

inline constexpr uint8_t kUpstVersion = 0x01;
inline constexpr uint8_t kUpstFloat32 = 0x00;

std::vector<uint8_t> SerializeTensor(const RawTensor& tensor);
// Throws std::invalid_argument on malformed input.
RawTensor ParseTensor(std::span<const uint8_t> bytes);

RawTensor ReadTensorFile(const std::filesystem::path& path);
void WriteTensorFile(const std::filesystem::path& path,
                     const RawTensor& tensor);

// Conversions for 3-D (C, H, W) tensors. Values narrow to float32 on write.
RawTensor ToRawTensor(const LogitTensor& logits);
LogitTensor ToLogitTensor(const RawTensor& raw);

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> bytes);

}  // namespace panofuse

#endif  // PANOFUSE_TENSOR_IO_H_
