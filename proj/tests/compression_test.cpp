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

#include <gtest/gtest.h>

#include <random>

#include <zlib.h>

#include "bulkio/compression.h"
#include "bulkio/error.h"

namespace bulkio {
namespace {

using Bytes = std::vector<std::uint8_t>;

ErrorCode codeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kFormatError;
}

Bytes randomBytes(std::size_t n, std::mt19937_64& rng, int alphabet = 256) {
  Bytes out(n);
  for (auto& b : out) {
    b = static_cast<std::uint8_t>(rng() % alphabet);
  }
  return out;
}

// Raw inflate straight through zlib, as a reference decoder.
Bytes zlibInflateRaw(const Bytes& in, std::size_t expected) {
  Bytes out(expected);
  z_stream zs{};
  EXPECT_EQ(inflateInit2(&zs, -15), Z_OK);
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  EXPECT_EQ(inflate(&zs, Z_FINISH), Z_STREAM_END);
  EXPECT_EQ(zs.total_out, expected);
  inflateEnd(&zs);
  return out;
}

TEST(Compression, NoneIsIdentity) {
  std::mt19937_64 rng(3);
  const auto data = randomBytes(1000, rng);
  EXPECT_EQ(compressPayload(data, Codec::kNone), data);
  EXPECT_EQ(decompressPayload(data, Codec::kNone, data.size()), data);
  EXPECT_EQ(codeOf([&] { decompressPayload(data, Codec::kNone, 999); }), ErrorCode::kDecompressError);
}

TEST(Compression, ZerosShrink) {
  const Bytes zeros(4096, 0x00);
  const auto packed = compressPayload(zeros, Codec::kDeflate);
  EXPECT_LT(packed.size(), 4096u);
  EXPECT_EQ(decompressPayload(packed, Codec::kDeflate, 4096), zeros);
}

TEST(Compression, OutputIsRawDeflate) {
  std::mt19937_64 rng(4);
  const auto data = randomBytes(10000, rng, 7);
  const auto packed = compressPayload(data, Codec::kDeflate);
  EXPECT_EQ(zlibInflateRaw(packed, data.size()), data);
}

TEST(Compression, RandomRoundTripProperty) {
  std::mt19937_64 rng(5);
  Decompressor reused;
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(rng() % 20000);
    const auto data = randomBytes(n, rng, trial % 2 == 0 ? 256 : 3);
    for (auto codec : {Codec::kNone, Codec::kDeflate}) {
      const auto packed = compressPayload(data, codec);
      ASSERT_EQ(decompressPayload(packed, codec, n), data);
      Bytes out(n);
      reused.decompress(packed, codec, out);
      ASSERT_EQ(out, data);
    }
  }
}

TEST(Compression, EmptyPayload) {
  const Bytes empty;
  const auto packed = compressPayload(empty, Codec::kDeflate);
  EXPECT_TRUE(decompressPayload(packed, Codec::kDeflate, 0).empty());
}

TEST(Compression, SizeMismatchAndCorruptionAreErrors) {
  std::mt19937_64 rng(6);
  const auto data = randomBytes(5000, rng, 16);
  auto packed = compressPayload(data, Codec::kDeflate);
  EXPECT_EQ(codeOf([&] { decompressPayload(packed, Codec::kDeflate, 4999); }), ErrorCode::kDecompressError);
  EXPECT_EQ(codeOf([&] { decompressPayload(packed, Codec::kDeflate, 5001); }), ErrorCode::kDecompressError);

  auto truncated = packed;
  truncated.resize(truncated.size() / 2);
  EXPECT_EQ(codeOf([&] { decompressPayload(truncated, Codec::kDeflate, 5000); }), ErrorCode::kDecompressError);

  auto trailing = packed;
  trailing.push_back(0xAB);
  EXPECT_EQ(codeOf([&] { decompressPayload(trailing, Codec::kDeflate, 5000); }), ErrorCode::kDecompressError);

  const Bytes garbage(64, 0xFF);
  EXPECT_EQ(codeOf([&] { decompressPayload(garbage, Codec::kDeflate, 5000); }), ErrorCode::kDecompressError);
}

TEST(Compression, DecompressorRecoversAfterError) {
  std::mt19937_64 rng(8);
  const auto data = randomBytes(3000, rng, 5);
  const auto packed = compressPayload(data, Codec::kDeflate);
  Decompressor d;
  Bytes out(3000);
  const Bytes garbage(32, 0xFF);
  EXPECT_EQ(codeOf([&] { d.decompress(garbage, Codec::kDeflate, out); }), ErrorCode::kDecompressError);
  d.decompress(packed, Codec::kDeflate, out);
  EXPECT_EQ(out, data);
}

} // namespace
} // namespace bulkio
