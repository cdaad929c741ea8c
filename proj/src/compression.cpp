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

#include "bulkio/compression.h"

#include <cstring>
#include <limits>
#include <string>

#include <zlib.h>

#include "bulkio/error.h"

namespace bulkio {

namespace {

constexpr int kRawDeflateWindowBits = -15;

[[noreturn]] void decompressError(const std::string& what) {
  fail(ErrorCode::kDecompressError, what);
}

} // namespace

std::vector<std::uint8_t> compressPayload(
    std::span<const std::uint8_t> bytes,
    Codec codec) {
  if (codec == Codec::kNone) {
    return {bytes.begin(), bytes.end()};
  }
  z_stream zs{};
  if (deflateInit2(
          &zs,
          Z_DEFAULT_COMPRESSION,
          Z_DEFLATED,
          kRawDeflateWindowBits,
          8,
          Z_DEFAULT_STRATEGY) != Z_OK) {
    fail(ErrorCode::kWriteError, "deflateInit2 failed");
  }
  std::vector<std::uint8_t> out(deflateBound(&zs, bytes.size()));
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) {
    fail(ErrorCode::kWriteError, "deflate did not finish (" + std::to_string(rc) + ")");
  }
  return out;
}

struct Decompressor::State {
  z_stream zs{};
  bool initialized = false;

  ~State() {
    if (initialized) {
      inflateEnd(&zs);
    }
  }
};

Decompressor::Decompressor() : state_(std::make_unique<State>()) {}
Decompressor::~Decompressor() = default;
Decompressor::Decompressor(Decompressor&&) noexcept = default;
Decompressor& Decompressor::operator=(Decompressor&&) noexcept = default;

void Decompressor::decompress(
    std::span<const std::uint8_t> in,
    Codec codec,
    std::span<std::uint8_t> out) {
  if (codec == Codec::kNone) {
    if (in.size() != out.size()) {
      decompressError(
          "stored payload is " + std::to_string(in.size()) + " bytes, expected " +
          std::to_string(out.size()));
    }
    if (!in.empty()) {
      std::memcpy(out.data(), in.data(), in.size());
    }
    return;
  }
  if (in.size() > std::numeric_limits<uInt>::max() ||
      out.size() > std::numeric_limits<uInt>::max()) {
    decompressError("basket larger than 4 GiB");
  }
  auto& zs = state_->zs;
  if (!state_->initialized) {
    if (inflateInit2(&zs, kRawDeflateWindowBits) != Z_OK) {
      decompressError("inflateInit2 failed");
    }
    state_->initialized = true;
  } else {
    inflateReset(&zs);
  }
  // zlib wants a non-null output pointer even for empty output.
  std::uint8_t scratch = 0;
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.empty() ? &scratch : out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  if (rc != Z_STREAM_END) {
    decompressError(
        std::string("inflate failed: ") + (zs.msg ? zs.msg : "stream did not end") +
        " (" + std::to_string(rc) + ")");
  }
  if (zs.total_out != out.size()) {
    decompressError(
        "inflated " + std::to_string(zs.total_out) + " bytes, expected " +
        std::to_string(out.size()));
  }
  if (zs.avail_in != 0) {
    decompressError(std::to_string(zs.avail_in) + " trailing bytes after deflate stream");
  }
}

std::vector<std::uint8_t> decompressPayload(
    std::span<const std::uint8_t> bytes,
    Codec codec,
    std::size_t expectedSize) {
  std::vector<std::uint8_t> out(expectedSize);
  Decompressor().decompress(bytes, codec, out);
  return out;
}

} // namespace bulkio
