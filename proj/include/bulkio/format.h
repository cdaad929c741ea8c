/*
 * Copyright (c) bulkio contributors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bulkio/element.h"

namespace bulkio {

inline constexpr char kMagic[4] = {'B', 'K', 'I', 'O'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderSize = 8;
inline constexpr std::size_t kTrailerSize = 8;

enum class Codec : std::uint8_t {
  kNone = 0x00,
  kDeflate = 0x01,
};

Codec codecFromCode(std::uint8_t code);
std::string_view codecName(Codec codec);
std::optional<Codec> parseCodec(std::string_view name);

struct BranchShape {
  enum class Kind : std::uint8_t { kScalar = 0, kFixedArray = 1, kVarArray = 2 };

  Kind kind = Kind::kScalar;
  // Elements per event for kFixedArray, count-branch index for kVarArray.
  std::uint64_t parameter = 0;

  static BranchShape scalar() {
    return {};
  }
  static BranchShape fixedArray(std::uint64_t k) {
    return {Kind::kFixedArray, k};
  }
  static BranchShape varArray(std::uint64_t countBranch) {
    return {Kind::kVarArray, countBranch};
  }

  bool isScalar() const {
    return kind == Kind::kScalar;
  }
  bool isFixedArray() const {
    return kind == Kind::kFixedArray;
  }
  bool isVarArray() const {
    return kind == Kind::kVarArray;
  }
  std::uint64_t fixedLength() const {
    return kind == Kind::kFixedArray ? parameter : 1;
  }
  std::uint64_t countBranch() const {
    return parameter;
  }

  bool operator==(const BranchShape&) const = default;
};

struct BasketDescriptor {
  std::uint64_t firstEntry = 0;
  std::uint64_t nEntries = 0;
  std::uint64_t fileOffset = 0;
  std::uint64_t compressedSize = 0;
  std::uint64_t uncompressedSize = 0;
  Codec codec = Codec::kNone;

  std::uint64_t endEntry() const {
    return firstEntry + nEntries;
  }

  bool operator==(const BasketDescriptor&) const = default;
};

struct BranchDescriptor {
  std::string name;
  ElementType element = ElementType::kF32;
  BranchShape shape;
  std::vector<BasketDescriptor> baskets;

  bool operator==(const BranchDescriptor&) const = default;
};

struct FileFooter {
  std::string treeName;
  std::uint64_t nEntries = 0;
  std::vector<BranchDescriptor> branches;

  /// Index of the branch called `name`, if any.
  std::optional<std::size_t> findBranch(std::string_view name) const;

  bool operator==(const FileFooter&) const = default;
};

/// Serializes the footer body (without the trailing offset).
std::vector<std::uint8_t> encodeFooter(const FileFooter& footer);

/// Parses a footer body. Truncated or malformed input raises FormatError;
/// the result is validated with validateFooter().
FileFooter decodeFooter(std::span<const std::uint8_t> bytes);

/// Checks every structural invariant that can be verified without touching
/// basket payloads: basket partitioning, codec/size agreement, payload sizes
/// of fixed-width branches, count-branch links and aligned boundaries.
/// `payloadEnd`, when non-zero, bounds every basket's byte range.
void validateFooter(const FileFooter& footer, std::uint64_t payloadEnd = 0);

class RandomAccessFile;

/// Locates and decodes the footer: checks magic and version, follows the
/// trailing offset, validates the result.
FileFooter readFooter(const RandomAccessFile& file);
FileFooter readFooter(const std::string& path);

} // namespace bulkio
