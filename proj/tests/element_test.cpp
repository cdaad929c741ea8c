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

#include <cmath>
#include <limits>
#include <random>

#include "bulkio/element.h"
#include "bulkio/error.h"
#include "test_support.h"

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

TEST(Element, CodesAndWidths) {
  const std::pair<ElementType, std::size_t> expected[] = {
      {ElementType::kI8, 1},
      {ElementType::kU8, 1},
      {ElementType::kI16, 2},
      {ElementType::kU16, 2},
      {ElementType::kI32, 4},
      {ElementType::kU32, 4},
      {ElementType::kI64, 8},
      {ElementType::kU64, 8},
      {ElementType::kF32, 4},
      {ElementType::kF64, 8},
      {ElementType::kBool, 1},
  };
  std::uint8_t code = 0x01;
  for (const auto& [type, width] : expected) {
    EXPECT_EQ(static_cast<std::uint8_t>(type), code);
    EXPECT_EQ(widthBytes(type), width);
    EXPECT_EQ(elementTypeFromCode(code), type);
    EXPECT_EQ(parseElementType(elementTypeName(type)), type);
    ++code;
  }
  EXPECT_EQ(codeOf([] { elementTypeFromCode(0x00); }), ErrorCode::kFormatError);
  EXPECT_EQ(codeOf([] { elementTypeFromCode(0x0C); }), ErrorCode::kFormatError);
  EXPECT_FALSE(parseElementType("f16").has_value());
}

TEST(Element, EncodeExamples) {
  EXPECT_EQ(encodeElement(Scalar{1.0f}), (Bytes{0x3F, 0x80, 0x00, 0x00}));
  EXPECT_EQ(encodeElement(Scalar{std::int32_t{-1}}), (Bytes{0xFF, 0xFF, 0xFF, 0xFF}));
  EXPECT_EQ(encodeElement(Scalar{std::uint64_t{0}}), Bytes(8, 0x00));
  EXPECT_EQ(encodeElement(Scalar{true}), Bytes{0x01});
  EXPECT_EQ(encodeElement(Scalar{std::uint16_t{0x1234}}), (Bytes{0x12, 0x34}));
}

TEST(Element, DecodeExamples) {
  const Bytes one{0x3F, 0x80, 0x00, 0x00};
  EXPECT_EQ(std::get<float>(decodeElement(one, ElementType::kF32)), 1.0f);
  const Bytes two{0x00, 0x01};
  EXPECT_EQ(codeOf([&] { decodeElement(two, ElementType::kBool); }), ErrorCode::kFormatError);
  EXPECT_EQ(codeOf([&] { decodeElement(one, ElementType::kF64); }), ErrorCode::kFormatError);
  const Bytes badBool{0x02};
  EXPECT_EQ(codeOf([&] { decodeElement(badBool, ElementType::kBool); }), ErrorCode::kFormatError);
}

TEST(Element, RoundTripPropertyAllTypes) {
  std::mt19937_64 rng(11);
  for (auto type : kAllElementTypes) {
    for (int i = 0; i < 20000; ++i) {
      const auto value = testing::randomScalar(type, rng);
      const auto bytes = encodeElement(value);
      ASSERT_EQ(bytes, testing::oracleEncode(value)) << elementTypeName(type);
      ASSERT_EQ(bytes.size(), widthBytes(type));
      ASSERT_TRUE(testing::sameValue(decodeElement(bytes, type), value)) << elementTypeName(type);
    }
  }
}

TEST(Element, ExtremesRoundTrip) {
  const Scalar values[] = {
      Scalar{std::numeric_limits<std::int8_t>::min()},
      Scalar{std::numeric_limits<std::int16_t>::min()},
      Scalar{std::numeric_limits<std::int64_t>::min()},
      Scalar{std::numeric_limits<std::uint64_t>::max()},
      Scalar{-0.0f},
      Scalar{std::numeric_limits<float>::denorm_min()},
      Scalar{std::numeric_limits<double>::infinity()},
      Scalar{std::numeric_limits<double>::quiet_NaN()},
      Scalar{false},
  };
  for (const auto& v : values) {
    const auto decoded = decodeElement(encodeElement(v), scalarType(v));
    EXPECT_TRUE(testing::sameValue(decoded, v)) << testing::describe(v);
  }
}

TEST(Element, ToNativeInPlaceMatchesDecode) {
  std::mt19937_64 rng(5);
  for (auto type : kAllElementTypes) {
    // Odd counts exercise the vector loop tails.
    for (std::size_t count : {0u, 1u, 7u, 33u, 1031u}) {
      std::vector<Scalar> values;
      Bytes bytes;
      for (std::size_t i = 0; i < count; ++i) {
        values.push_back(testing::randomScalar(type, rng));
        auto b = testing::oracleEncode(values.back());
        bytes.insert(bytes.end(), b.begin(), b.end());
      }
      toNativeInPlace(type, bytes.data(), count);
      visitElementType(type, [&]<typename T>(std::type_identity<T>) {
        for (std::size_t i = 0; i < count; ++i) {
          T native;
          std::memcpy(&native, bytes.data() + i * sizeof(T), sizeof(T));
          ASSERT_TRUE(testing::sameValue(Scalar{native}, values[i])) << elementTypeName(type) << " #" << i;
        }
      });
    }
  }
  Bytes bools{0, 1, 3};
  EXPECT_EQ(codeOf([&] { toNativeInPlace(ElementType::kBool, bools.data(), 3); }), ErrorCode::kFormatError);
}

TEST(Element, ScalarToDouble) {
  EXPECT_EQ(scalarToDouble(Scalar{std::int8_t{-5}}), -5.0);
  EXPECT_EQ(scalarToDouble(Scalar{true}), 1.0);
  EXPECT_EQ(scalarToDouble(Scalar{2.5f}), 2.5);
  EXPECT_EQ(scalarType(Scalar{std::uint32_t{3}}), ElementType::kU32);
}

TEST(Error, MessageNamesTheCode) {
  try {
    fail(ErrorCode::kShapeError, "three is not four");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeError);
    EXPECT_STREQ(e.what(), "ShapeError: three is not four");
  }
}

} // namespace
} // namespace bulkio
