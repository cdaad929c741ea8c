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
#include <thread>

#include "bulkio/error.h"
#include "bulkio/reader.h"
#include "bulkio/writer.h"
#include "test_support.h"

namespace bulkio {

void PrintTo(Codec codec, std::ostream* os) {
  *os << codecName(codec);
}

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

float f32(const Value& v) {
  return std::get<float>(std::get<Scalar>(v));
}

class RampReader : public ::testing::TestWithParam<Codec> {
 protected:
  void SetUp() override {
    testing::writeRampF32(path, 100, 32, GetParam());
    file = BulkFile::open(path);
  }
  testing::TempDir dir;
  std::string path = dir.file("ramp.bio");
  std::shared_ptr<BulkFile> file;
};

TEST_P(RampReader, GetEntry) {
  BranchReader r(file, "x");
  EXPECT_EQ(f32(r.getEntry(EntryIndex(7))), 7.0f);
  EXPECT_EQ(f32(r.getEntry(EntryIndex(99))), 99.0f);
  EXPECT_EQ(f32(r.getEntry(EntryIndex(0))), 0.0f);
  EXPECT_EQ(codeOf([&] { r.getEntry(EntryIndex(100)); }), ErrorCode::kEntryOutOfRange);
}

TEST_P(RampReader, BulkEntries) {
  BranchReader r(file, "x");
  BulkBuffer buf;
  EXPECT_EQ(r.getBulkEntries(EntryIndex(0), buf), 32u);
  EXPECT_EQ(buf.state(), BufferState::kDeserialized);
  EXPECT_EQ(buf.eventCount(), 32u);
  EXPECT_EQ(buf.elementCount(), 32u);
  EXPECT_EQ(buf.sizeBytes(), 128u);
  EXPECT_EQ(valueAt<float>(buf, 5), 5.0f);
  EXPECT_EQ(valueAt<float>(buf, 31), 31.0f);
  EXPECT_EQ(std::get<float>(valueAt(buf, ElementType::kF32, 31)), 31.0f);
  EXPECT_EQ(buf.view<float>()[17], 17.0f);
  EXPECT_EQ(codeOf([&] { valueAt<float>(buf, 32); }), ErrorCode::kIndexOutOfRange);
  EXPECT_EQ(codeOf([&] { valueAt<double>(buf, 0); }), ErrorCode::kTypeMismatch);

  EXPECT_EQ(r.getBulkEntries(EntryIndex(96), buf), 4u);
  EXPECT_EQ(valueAt<float>(buf, 3), 99.0f);
  EXPECT_EQ(codeOf([&] { r.getBulkEntries(EntryIndex(5), buf); }), ErrorCode::kNotBasketStart);
  EXPECT_EQ(codeOf([&] { r.getBulkEntries(EntryIndex(100), buf); }), ErrorCode::kEntryOutOfRange);
}

TEST_P(RampReader, SerializedEntries) {
  BranchReader r(file, "x");
  BulkBuffer buf;
  EXPECT_EQ(r.getEntriesSerialized(EntryIndex(32), buf), 32u);
  EXPECT_EQ(buf.state(), BufferState::kSerialized);
  // 32.0f is 0x42000000 big-endian.
  EXPECT_EQ(Bytes(buf.bytes().begin(), buf.bytes().begin() + 4), (Bytes{0x42, 0x00, 0x00, 0x00}));
  EXPECT_EQ(valueAt<float>(buf, 1), 33.0f);
  EXPECT_EQ(codeOf([&] { buf.view<float>(); }), ErrorCode::kTypeMismatch);
  EXPECT_EQ(codeOf([&] { r.getEntriesSerialized(EntryIndex(33), buf); }), ErrorCode::kNotBasketStart);
  // A count buffer passed for a scalar branch comes back empty.
  CountBuffer counts;
  counts.counts = {1, 2, 3};
  r.getEntriesSerialized(EntryIndex(0), buf, &counts);
  EXPECT_TRUE(counts.counts.empty());
}

TEST_P(RampReader, BasketBounds) {
  BranchReader r(file, "x");
  EXPECT_EQ(r.basketBounds(EntryIndex(33)), (BasketSpan{32, 32}));
  EXPECT_EQ(r.basketBounds(EntryIndex(0)), (BasketSpan{0, 32}));
  EXPECT_EQ(r.basketBounds(EntryIndex(99)), (BasketSpan{96, 4}));
  EXPECT_EQ(codeOf([&] { r.basketBounds(EntryIndex(100)); }), ErrorCode::kEntryOutOfRange);
  EXPECT_EQ(r.basketCount(), 4u);
}

TEST_P(RampReader, BasketWalkVisitsEachEntryOnce) {
  BranchReader r(file, "x");
  BulkBuffer buf;
  std::vector<float> seen;
  for (std::uint64_t e = 0; e < r.nEntries();) {
    const auto span = r.basketBounds(EntryIndex(e));
    EXPECT_EQ(span.firstEntry, e);
    const auto n = r.getBulkEntries(EntryIndex(e), buf);
    EXPECT_EQ(n, span.nEntries);
    for (float v : buf.view<float>()) {
      seen.push_back(v);
    }
    e += n;
  }
  ASSERT_EQ(seen.size(), 100u);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_EQ(seen[i], float(i));
  }
}

TEST_P(RampReader, UnknownBranch) {
  EXPECT_EQ(codeOf([&] { BranchReader(file, "nope"); }), ErrorCode::kUnknownBranch);
}

INSTANTIATE_TEST_SUITE_P(
    Codecs,
    RampReader,
    ::testing::Values(Codec::kNone, Codec::kDeflate),
    [](const auto& info) { return std::string(codecName(info.param)); });

TEST(Reader, SerializedBytesOfTwoFloats) {
  testing::TempDir dir;
  const auto path = dir.file("two.bio");
  auto w = TreeWriter::create(path, {BranchSpec::scalar("x", ElementType::kF32)});
  for (float v : {1.0f, 2.0f}) {
    const Cell c{Scalar{v}};
    w.fill({&c, 1});
  }
  w.close();
  BranchReader r(BulkFile::open(path), "x");
  BulkBuffer buf;
  r.getEntriesSerialized(EntryIndex(0), buf);
  EXPECT_EQ(Bytes(buf.bytes().begin(), buf.bytes().end()), (Bytes{0x3F, 0x80, 0, 0, 0x40, 0, 0, 0}));
}

TEST(Reader, VarArrayEventsAndCounts) {
  testing::TempDir dir;
  const auto path = dir.file("var.bio");
  auto w = TreeWriter::create(path, {BranchSpec::varArray("v", ElementType::kF32)});
  for (const auto& event : {testing::f32Array({1, 2}), testing::f32Array({}), testing::f32Array({7, 8, 9})}) {
    w.fill({&event, 1});
  }
  w.close();
  BranchReader r(BulkFile::open(path), "v");
  EXPECT_TRUE(testing::sameValue(r.getEntry(EntryIndex(2)), testing::f32Array({7, 8, 9})));
  EXPECT_TRUE(testing::sameValue(r.getEntry(EntryIndex(1)), testing::f32Array({})));

  BulkBuffer buf;
  CountBuffer counts;
  EXPECT_EQ(r.getEntriesSerialized(EntryIndex(0), buf, &counts), 3u);
  EXPECT_EQ(counts.counts, (std::vector<std::uint32_t>{2, 0, 3}));
  EXPECT_EQ(counts.offsets, (std::vector<std::uint64_t>{0, 2, 2, 5}));
  EXPECT_EQ(buf.elementCount(), 5u);
  EXPECT_EQ(buf.sizeBytes(), 20u);
  EXPECT_EQ(valueAt<float>(buf, 4), 9.0f);
  EXPECT_EQ(codeOf([&] { r.getEntriesSerialized(EntryIndex(0), buf); }), ErrorCode::kCountBufferRequired);

  // Bulk deserialized reads take the counts optionally.
  EXPECT_EQ(r.getBulkEntries(EntryIndex(0), buf), 3u);
  EXPECT_EQ(buf.view<float>().size(), 5u);
  CountBuffer more;
  r.getBulkEntries(EntryIndex(0), buf, &more);
  EXPECT_EQ(more.totalElements(), 5u);
}

TEST(Reader, ValueAtOnHandBuiltSerializedBuffer) {
  BulkBuffer buf;
  auto* p = buf.prepare(4);
  const std::uint8_t one[] = {0x3F, 0x80, 0x00, 0x00};
  std::memcpy(p, one, 4);
  buf.commit(BufferState::kSerialized, ElementType::kF32, 1, 1);
  EXPECT_EQ(valueAt<float>(buf, 0), 1.0f);
  EXPECT_EQ(codeOf([&] { valueAt<float>(buf, 1); }), ErrorCode::kIndexOutOfRange);
}

TEST(Reader, BufferReuseNeverShrinks) {
  testing::TempDir dir;
  const auto path = dir.file("r.bio");
  testing::writeRampF32(path, 100, 64);
  BranchReader r(BulkFile::open(path), "x");
  BulkBuffer buf;
  r.getBulkEntries(EntryIndex(0), buf);
  const auto capacity = buf.capacityBytes();
  const auto* data = buf.data();
  const auto generation = buf.generation();
  r.getBulkEntries(EntryIndex(64), buf);
  EXPECT_EQ(buf.capacityBytes(), capacity);
  EXPECT_EQ(buf.data(), data);
  EXPECT_GT(buf.generation(), generation);
  EXPECT_EQ(buf.eventCount(), 36u);
}

// Serialized payloads equal an independent decompression of the on-disk bytes.
TEST(Reader, SerializedFidelity) {
  testing::TempDir dir;
  const auto path = dir.file("fid.bio");
  const std::vector<BranchSpec> schema{
      BranchSpec::scalar("a", ElementType::kF64),
      BranchSpec::varArray("b", ElementType::kI32)};
  std::mt19937_64 rng(21);
  std::vector<std::vector<Cell>> rows;
  for (int i = 0; i < 3000; ++i) {
    rows.push_back(testing::randomRow(schema, rng));
  }
  testing::writeRows(path, schema, rows, 128, Codec::kDeflate);
  auto file = BulkFile::open(path);
  for (std::size_t b = 0; b < file->footer().branches.size(); ++b) {
    BranchReader r(file, b);
    const auto& desc = r.descriptor();
    BulkBuffer buf;
    CountBuffer counts;
    for (std::size_t k = 0; k < r.basketCount(); ++k) {
      const auto& basket = desc.baskets[k];
      r.getEntriesSerialized(EntryIndex(basket.firstEntry), buf, &counts);
      const auto expected = decompressPayload(r.readRawBasket(k), basket.codec, basket.uncompressedSize);
      ASSERT_EQ(Bytes(buf.bytes().begin(), buf.bytes().end()), expected) << desc.name << " basket " << k;
    }
  }
}

// Property: every read path agrees with the written rows for all element
// types and shapes.
TEST(Reader, ApiEquivalenceProperty) {
  testing::TempDir dir;
  std::mt19937_64 rng(23);
  for (auto type : kAllElementTypes) {
    const std::vector<BranchSpec> schema{
        BranchSpec::scalar("s", type),
        BranchSpec::fixedArray("f", type, 3),
        BranchSpec::varArray("v", type)};
    std::vector<std::vector<Cell>> rows;
    for (int i = 0; i < 200; ++i) {
      rows.push_back(testing::randomRow(schema, rng));
    }
    const auto path = dir.file(std::string(elementTypeName(type)) + ".bio");
    testing::writeRows(path, schema, rows, 13, type == ElementType::kF64 ? Codec::kDeflate : Codec::kNone);
    auto file = BulkFile::open(path);
    for (std::size_t col = 0; col < schema.size(); ++col) {
      BranchReader r(file, schema[col].name);
      BulkBuffer deser;
      BulkBuffer ser;
      CountBuffer counts;
      for (std::uint64_t first = 0; first < rows.size();) {
        const auto n = r.getBulkEntries(EntryIndex(first), deser);
        ASSERT_EQ(r.getEntriesSerialized(EntryIndex(first), ser, &counts), n);
        for (std::uint64_t local = 0; local < n; ++local) {
          const auto& expected = rows[first + local][col];
          const auto got = r.getEntry(EntryIndex(first + local));
          ASSERT_TRUE(testing::sameValue(got, expected)) << schema[col].name << " @" << first + local;
          std::uint64_t begin = local;
          std::uint64_t size = 1;
          if (schema[col].kind == BranchShape::Kind::kFixedArray) {
            begin = local * 3;
            size = 3;
          } else if (schema[col].kind == BranchShape::Kind::kVarArray) {
            begin = counts.offsets[local];
            size = counts.counts[local];
          }
          std::vector<Scalar> fromDeser;
          std::vector<Scalar> fromSer;
          for (std::uint64_t i = begin; i < begin + size; ++i) {
            fromDeser.push_back(valueAt(deser, type, i));
            fromSer.push_back(valueAt(ser, type, i));
          }
          const Value d = schema[col].kind == BranchShape::Kind::kScalar ? Value{fromDeser[0]} : Value{fromDeser};
          const Value s = schema[col].kind == BranchShape::Kind::kScalar ? Value{fromSer[0]} : Value{fromSer};
          ASSERT_TRUE(testing::sameValue(d, expected));
          ASSERT_TRUE(testing::sameValue(s, expected));
        }
        first += n;
      }
    }
  }
}

TEST(Reader, CorruptCountsAreFormatErrors) {
  testing::TempDir dir;
  const auto path = dir.file("cc.bio");
  auto w = TreeWriter::create(
      path,
      {BranchSpec::scalar("n", ElementType::kU32), BranchSpec::varArray("v", ElementType::kU8, "n")});
  const std::vector<Cell> row{Scalar{std::uint32_t{2}}, std::vector<Scalar>{std::uint8_t{1}, std::uint8_t{2}}};
  w.fill(row);
  w.close();
  // Patch the count value (first payload byte run) from 2 to 3.
  {
    std::FILE* f = std::fopen(path.c_str(), "r+b");
    std::fseek(f, kHeaderSize + 3, SEEK_SET);
    std::fputc(3, f);
    std::fclose(f);
  }
  BranchReader r(BulkFile::open(path), "v");
  EXPECT_EQ(codeOf([&] { r.getEntry(EntryIndex(0)); }), ErrorCode::kFormatError);
}

TEST(Reader, ConcurrentReadersShareOneFile) {
  testing::TempDir dir;
  const auto path = dir.file("mt.bio");
  testing::writeRampF32(path, 20000, 256, Codec::kDeflate);
  auto file = BulkFile::open(path);
  std::vector<double> sums(4, 0);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      BranchReader r(file, "x");
      BulkBuffer buf;
      for (std::uint64_t e = 0; e < r.nEntries();) {
        e += r.getBulkEntries(EntryIndex(e), buf);
        for (float v : buf.view<float>()) {
          sums[t] += v;
        }
      }
    });
  }
  for (auto& th : threads) {
    th.join();
  }
  for (double s : sums) {
    EXPECT_EQ(s, 20000.0 * 19999.0 / 2);
  }
}

} // namespace
} // namespace bulkio
