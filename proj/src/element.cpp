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

#include "bulkio/element.h"

#include <string>

#include "bulkio/error.h"

namespace bulkio {

namespace {

struct TypeInfo {
  ElementType type;
  std::string_view name;
};

constexpr TypeInfo kTypeInfo[] = {
    {ElementType::kI8, "i8"},
    {ElementType::kU8, "u8"},
    {ElementType::kI16, "i16"},
    {ElementType::kU16, "u16"},
    {ElementType::kI32, "i32"},
    {ElementType::kU32, "u32"},
    {ElementType::kI64, "i64"},
    {ElementType::kU64, "u64"},
    {ElementType::kF32, "f32"},
    {ElementType::kF64, "f64"},
    {ElementType::kBool, "bool"},
};

} // namespace

namespace detail {

void throwBadBool(std::uint8_t byte) {
  fail(
      ErrorCode::kFormatError,
      "bool byte must be 0x00 or 0x01, got " + std::to_string(byte));
}

} // namespace detail

std::size_t widthBytes(ElementType type) {
  return visitElementType(
      type, []<typename T>(std::type_identity<T>) { return sizeof(T); });
}

ElementType elementTypeFromCode(std::uint8_t code) {
  if (code < 0x01 || code > 0x0B) {
    fail(
        ErrorCode::kFormatError,
        "unknown element type code " + std::to_string(code));
  }
  return static_cast<ElementType>(code);
}

std::string_view elementTypeName(ElementType type) {
  for (const auto& info : kTypeInfo) {
    if (info.type == type) {
      return info.name;
    }
  }
  return "?";
}

std::optional<ElementType> parseElementType(std::string_view name) {
  for (const auto& info : kTypeInfo) {
    if (info.name == name) {
      return info.type;
    }
  }
  return std::nullopt;
}

ElementType scalarType(const Scalar& value) {
  return static_cast<ElementType>(value.index() + 1);
}

double scalarToDouble(const Scalar& value) {
  return std::visit([](auto v) { return static_cast<double>(v); }, value);
}

std::vector<std::uint8_t> encodeElement(const Scalar& value) {
  return std::visit(
      []<typename T>(T v) {
        std::vector<std::uint8_t> out(sizeof(T));
        storeBigEndian<T>(v, out.data());
        return out;
      },
      value);
}

Scalar decodeElement(std::span<const std::uint8_t> bytes, ElementType type) {
  const auto width = widthBytes(type);
  if (bytes.size() != width) {
    fail(
        ErrorCode::kFormatError,
        "element " + std::string(elementTypeName(type)) + " needs " +
            std::to_string(width) + " bytes, got " +
            std::to_string(bytes.size()));
  }
  return visitElementType(type, [&]<typename T>(std::type_identity<T>) {
    return Scalar{loadBigEndian<T>(bytes.data())};
  });
}

namespace {

#if defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__)
#define BULKIO_SWAP_CLONES [[gnu::target_clones("avx2", "default")]]
#else
#define BULKIO_SWAP_CLONES
#endif

template <typename U>
void swapRun(std::uint8_t* data, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    U bits;
    std::memcpy(&bits, data + i * sizeof(U), sizeof(U));
    bits = detail::byteswap(bits);
    std::memcpy(data + i * sizeof(U), &bits, sizeof(U));
  }
}

// Clones are chosen at load time; the AVX2 one vectorizes the shuffles.
BULKIO_SWAP_CLONES void swap16(std::uint8_t* data, std::size_t count) {
  swapRun<std::uint16_t>(data, count);
}
BULKIO_SWAP_CLONES void swap32(std::uint8_t* data, std::size_t count) {
  swapRun<std::uint32_t>(data, count);
}
BULKIO_SWAP_CLONES void swap64(std::uint8_t* data, std::size_t count) {
  swapRun<std::uint64_t>(data, count);
}

} // namespace

void toNativeInPlace(ElementType type, std::uint8_t* data, std::size_t count) {
  visitElementType(type, [&]<typename T>(std::type_identity<T>) {
    if constexpr (std::is_same_v<T, bool>) {
      for (std::size_t i = 0; i < count; ++i) {
        if (data[i] > 1) {
          detail::throwBadBool(data[i]);
        }
      }
    } else if constexpr (sizeof(T) > 1 && std::endian::native == std::endian::little) {
      if constexpr (sizeof(T) == 2) {
        swap16(data, count);
      } else if constexpr (sizeof(T) == 4) {
        swap32(data, count);
      } else {
        swap64(data, count);
      }
    }
  });
}

} // namespace bulkio
