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
#include <memory>
#include <span>
#include <vector>

#include "bulkio/format.h"

namespace bulkio {

/// Compresses with raw DEFLATE (RFC 1951, no zlib/gzip framing) or copies
/// for Codec::kNone.
std::vector<std::uint8_t> compressPayload(
    std::span<const std::uint8_t> bytes,
    Codec codec);

/// Raises DecompressError unless the stream decodes to exactly
/// `expectedSize` bytes and is fully consumed.
std::vector<std::uint8_t> decompressPayload(
    std::span<const std::uint8_t> bytes,
    Codec codec,
    std::size_t expectedSize);

/// Reusable decompressor; keeps the inflate state between baskets.
class Decompressor {
 public:
  Decompressor();
  ~Decompressor();
  Decompressor(Decompressor&&) noexcept;
  Decompressor& operator=(Decompressor&&) noexcept;

  /// Decodes `in` into `out`, which must be exactly the expected size.
  void decompress(
      std::span<const std::uint8_t> in,
      Codec codec,
      std::span<std::uint8_t> out);

 private:
  struct State;
  std::unique_ptr<State> state_;
};

} // namespace bulkio
