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

#include "bulkio/error.h"
#include "bulkio/tree_reader.h"
#include "bulkio/writer.h"
#include "test_support.h"

namespace bulkio {
namespace {

ErrorCode codeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kFormatError;
}

template <typename Reader>
class IteratorTest : public ::testing::Test {
 protected:
  testing::TempDir dir;
};

using ReaderTypes = ::testing::Types<TreeReader, FastTreeReader>;
TYPED_TEST_SUITE(IteratorTest, ReaderTypes);

TYPED_TEST(IteratorTest, EmptyFile) {
  const auto path = this->dir.file("empty.bio");
  testing::writeRampF32(path, 0, 32);
  TypeParam reader(path);
  auto x = reader.template attachValue<float>("x");
  EXPECT_FALSE(reader.next());
  EXPECT_EQ(codeOf([&] { *x; }), ErrorCode::kInvalidProxyState);
}

TYPED_TEST(IteratorTest, HundredEntries) {
  const auto path = this->dir.file("h.bio");
  testing::writeRampF32(path, 100, 32);
  TypeParam reader(path);
  auto x = reader.template attachValue<float>("x");
  int trues = 0;
  while (reader.next()) {
    EXPECT_EQ(*x, float(trues));
    ++trues;
  }
  EXPECT_EQ(trues, 100);
  EXPECT_FALSE(reader.next());
  EXPECT_FALSE(reader.next());
  EXPECT_EQ(codeOf([&] { *x; }), ErrorCode::kInvalidProxyState);
}

TYPED_TEST(IteratorTest, DerefAfterEightNexts) {
  const auto path = this->dir.file("d.bio");
  testing::writeRampF32(path, 100, 32);
  TypeParam reader(path);
  auto x = reader.template attachValue<float>("x");
  EXPECT_EQ(codeOf([&] { *x; }), ErrorCode::kInvalidProxyState);
  EXPECT_FALSE(reader.positioned());
  for (int i = 0; i < 8; ++i) {
    ASSERT_TRUE(reader.next());
  }
  EXPECT_EQ(*x, 7.0f);
  EXPECT_EQ(*x, 7.0f);
  EXPECT_EQ(reader.entry(), EntryIndex(7));
}

TYPED_TEST(IteratorTest, SeriesSum) {
  const auto path = this->dir.file("s.bio");
  testing::writeRampF32(path, 1'000'000, 8192);
  TypeParam reader(path);
  auto x = reader.template attachValue<float>("x");
  double sum = 0;
  while (reader.next()) {
    sum += *x;
  }
  EXPECT_EQ(sum, 499999500000.0);
}

TYPED_TEST(IteratorTest, RangeForMatchesNextLoop) {
  const auto path = this->dir.file("rf.bio");
  testing::writeRampF32(path, 1000, 33);
  TypeParam reader(path);
  auto x = reader.template attachValue<float>("x");
  std::uint64_t expected = 0;
  for (EntryIndex e : reader) {
    ASSERT_EQ(e.value, expected);
    ASSERT_EQ(*x, float(expected));
    ++expected;
  }
  EXPECT_EQ(expected, 1000u);
  EXPECT_FALSE(reader.positioned());
}

TYPED_TEST(IteratorTest, AttachErrors) {
  const auto path = this->dir.file("a.bio");
  auto w = TreeWriter::create(
      path,
      {BranchSpec::scalar("x", ElementType::kF32), BranchSpec::varArray("v", ElementType::kF32)});
  w.close();
  TypeParam reader(path);
  EXPECT_EQ(codeOf([&] { reader.template attachValue<double>("x"); }), ErrorCode::kTypeMismatch);
  EXPECT_EQ(codeOf([&] { reader.template attachArray<float>("x"); }), ErrorCode::kTypeMismatch);
  EXPECT_EQ(codeOf([&] { reader.template attachValue<float>("v"); }), ErrorCode::kTypeMismatch);
  EXPECT_EQ(codeOf([&] { reader.template attachValue<float>("missing"); }), ErrorCode::kUnknownBranch);
}

TYPED_TEST(IteratorTest, VarArrayLengthsVary) {
  const auto path = this->dir.file("v.bio");
  auto w = TreeWriter::create(path, {BranchSpec::varArray("v", ElementType::kF32)}, 2);
  const std::vector<Value> events{
      testing::f32Array({1, 2}), testing::f32Array({}), testing::f32Array({7, 8, 9}), testing::f32Array({4})};
  for (const auto& e : events) {
    w.fill({&e, 1});
  }
  w.close();
  TypeParam reader(path);
  auto v = reader.template attachArray<float>("v");
  auto n = reader.template attachValue<std::uint32_t>("v.count");
  std::vector<std::size_t> sizes;
  while (reader.next()) {
    sizes.push_back(v.size());
    EXPECT_EQ(v.size(), *n);
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{2, 0, 3, 1}));

  TypeParam again(path);
  auto w2 = again.template attachArray<float>("v");
  again.next();
  again.next();
  again.next();
  EXPECT_EQ(w2[2], 9.0f);
  EXPECT_EQ(codeOf([&] { w2[3]; }), ErrorCode::kIndexOutOfRange);
}

TEST(FastIterator, RefillCountEqualsBasketCount) {
  testing::TempDir dir;
  const auto path = dir.file("r.bio");
  testing::writeRampF32(path, 100, 32);
  FastTreeReader reader(path);
  auto x = reader.attachValue<float>("x");
  while (reader.next()) {
  }
  EXPECT_EQ(reader.refillCount("x"), 4u);
}

TEST(FastIterator, RangeForRefillsPerBasket) {
  testing::TempDir dir;
  const auto path = dir.file("r.bio");
  testing::writeRampF32(path, 100, 7);
  FastTreeReader reader(path);
  auto x = reader.attachValue<float>("x");
  double sum = 0;
  for ([[maybe_unused]] EntryIndex e : reader) {
    sum += *x;
  }
  EXPECT_EQ(sum, 4950.0);
  EXPECT_EQ(reader.refillCount("x"), 15u);
}

TEST(FastIterator, StaleViewDetected) {
  testing::TempDir dir;
  const auto path = dir.file("sv.bio");
  auto w = TreeWriter::create(path, {BranchSpec::varArray("v", ElementType::kF32)}, 2);
  for (const auto& e : {testing::f32Array({1, 2}), testing::f32Array({3}), testing::f32Array({5, 6})}) {
    w.fill({&e, 1});
  }
  w.close();
  FastTreeReader reader(path);
  auto v = reader.attachArray<float>("v");
  reader.next();
  const auto view = *v;
  EXPECT_EQ(view[1], 2.0f);
  EXPECT_EQ(view.toVector(), (std::vector<float>{1, 2}));
  reader.next();
  EXPECT_EQ(codeOf([&] { view[0]; }), ErrorCode::kInvalidProxyState);
  // A fresh view at the new entry is fine, across a basket boundary too.
  EXPECT_EQ((*v)[0], 3.0f);
  reader.next();
  EXPECT_EQ((*v).toVector(), (std::vector<float>{5, 6}));
}

TEST(FastIterator, AttachMidLoopLoadsCurrentBasket) {
  testing::TempDir dir;
  const auto path = dir.file("mid.bio");
  testing::writeRampF32(path, 100, 32);
  FastTreeReader reader(path);
  for (int i = 0; i < 40; ++i) {
    reader.next();
  }
  auto x = reader.attachValue<float>("x");
  EXPECT_EQ(*x, 39.0f);
  reader.next();
  EXPECT_EQ(*x, 40.0f);
}

// Property: both iterators yield the same sequence for every type and shape.
TEST(IteratorEquivalence, PlainMatchesFast) {
  testing::TempDir dir;
  std::mt19937_64 rng(31);
  for (auto type : kAllElementTypes) {
    const std::vector<BranchSpec> schema{
        BranchSpec::scalar("s", type),
        BranchSpec::fixedArray("f", type, 2),
        BranchSpec::varArray("v", type)};
    std::vector<std::vector<Cell>> rows;
    for (int i = 0; i < 300; ++i) {
      rows.push_back(testing::randomRow(schema, rng));
    }
    const auto path = dir.file(std::string(elementTypeName(type)) + ".bio");
    testing::writeRows(path, schema, rows, 17, Codec::kDeflate);
    visitElementType(type, [&]<typename T>(std::type_identity<T>) {
      TreeReader plain(path);
      FastTreeReader fast(path);
      auto ps = plain.attachValue<T>("s");
      auto pf = plain.attachArray<T>("f");
      auto pv = plain.attachArray<T>("v");
      auto fs = fast.attachValue<T>("s");
      auto ff = fast.attachArray<T>("f");
      auto fv = fast.attachArray<T>("v");
      std::size_t e = 0;
      while (plain.next()) {
        ASSERT_TRUE(fast.next());
        auto asValue = [](const std::vector<T>& xs) {
          std::vector<Scalar> out(xs.begin(), xs.end());
          return Value{out};
        };
        ASSERT_TRUE(testing::sameValue(Value{Scalar{*ps}}, Value{Scalar{*fs}}));
        ASSERT_TRUE(testing::sameValue(Value{Scalar{*ps}}, rows[e][0]));
        ASSERT_TRUE(testing::sameValue(asValue(*pf), asValue((*ff).toVector())));
        ASSERT_TRUE(testing::sameValue(asValue(*pv), asValue((*fv).toVector())));
        ASSERT_TRUE(testing::sameValue(asValue(*pv), rows[e][2]));
        ++e;
      }
      EXPECT_FALSE(fast.next());
      EXPECT_EQ(e, rows.size());
    });
  }
}

} // namespace
} // namespace bulkio
