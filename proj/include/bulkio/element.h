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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace bulkio {

/// Element type codes as stored in the footer.
enum class ElementType : std::uint8_t {
  kI8 = 0x01,
  kU8 = 0x02,
  kI16 = 0x03,
  kU16 = 0x04,
  kI32 = 0x05,
  kU32 = 0x06,
  kI64 = 0x07,
  kU64 = 0x08,
  kF32 = 0x09,
  kF64 = 0x0A,
  kBool = 0x0B,
};

inline constexpr ElementType kAllElementTypes[] = {
    ElementType::kI8,
    ElementType::kU8,
    ElementType::kI16,
    ElementType::kU16,
    ElementType::kI32,
    ElementType::kU32,
    ElementType::kI64,
    ElementType::kU64,
    ElementType::kF32,
    ElementType::kF64,
    ElementType::kBool,
};

std::size_t widthBytes(ElementType type);

/// Validates a raw footer code; unknown codes raise FormatError.
ElementType elementTypeFromCode(std::uint8_t code);

std::string_view elementTypeName(ElementType type);
std::optional<ElementType> parseElementType(std::string_view name);

/// One decoded element. The alternative index is always code - 1.
using Scalar = std::variant<
    std::int8_t,
    std::uint8_t,
    std::int16_t,
    std::uint16_t,
    std::int32_t,
    std::uint32_t,
    std::int64_t,
    std::uint64_t,
    float,
    double,
    bool>;

/// A scalar, or the elements of one fixed- or variable-size array event.
using Value = std::variant<Scalar, std::vector<Scalar>>;

ElementType scalarType(const Scalar& value);

/// Widens any scalar to double (bool maps to 0/1).
double scalarToDouble(const Scalar& value);

template <typename T>
struct ElementTraits;

#define BULKIO_ELEMENT_TRAITS(Type, Code)            \
  template <>                                        \
  struct ElementTraits<Type> {                       \
    static constexpr ElementType kType = Code;       \
  };

BULKIO_ELEMENT_TRAITS(std::int8_t, ElementType::kI8)
BULKIO_ELEMENT_TRAITS(std::uint8_t, ElementType::kU8)
BULKIO_ELEMENT_TRAITS(std::int16_t, ElementType::kI16)
BULKIO_ELEMENT_TRAITS(std::uint16_t, ElementType::kU16)
BULKIO_ELEMENT_TRAITS(std::int32_t, ElementType::kI32)
BULKIO_ELEMENT_TRAITS(std::uint32_t, ElementType::kU32)
BULKIO_ELEMENT_TRAITS(std::int64_t, ElementType::kI64)
BULKIO_ELEMENT_TRAITS(std::uint64_t, ElementType::kU64)
BULKIO_ELEMENT_TRAITS(float, ElementType::kF32)
BULKIO_ELEMENT_TRAITS(double, ElementType::kF64)
BULKIO_ELEMENT_TRAITS(bool, ElementType::kBool)

#undef BULKIO_ELEMENT_TRAITS

template <typename T>
concept Element = requires { ElementTraits<T>::kType; };

template <Element T>
inline constexpr ElementType kElementTypeOf = ElementTraits<T>::kType;

/// Calls f(std::type_identity<T>{}) with the C++ type backing `type`.
template <typename F>
decltype(auto) visitElementType(ElementType type, F&& f) {
  switch (type) {
    case ElementType::kI8:
      return f(std::type_identity<std::int8_t>{});
    case ElementType::kU8:
      return f(std::type_identity<std::uint8_t>{});
    case ElementType::kI16:
      return f(std::type_identity<std::int16_t>{});
    case ElementType::kU16:
      return f(std::type_identity<std::uint16_t>{});
    case ElementType::kI32:
      return f(std::type_identity<std::int32_t>{});
    case ElementType::kU32:
      return f(std::type_identity<std::uint32_t>{});
    case ElementType::kI64:
      return f(std::type_identity<std::int64_t>{});
    case ElementType::kU64:
      return f(std::type_identity<std::uint64_t>{});
    case ElementType::kF32:
      return f(std::type_identity<float>{});
    case ElementType::kF64:
      return f(std::type_identity<double>{});
    case ElementType::kBool:
      break;
  }
  return f(std::type_identity<bool>{});
}

namespace detail {

template <typename U>
constexpr U byteswap(U v) noexcept {
  if constexpr (sizeof(U) == 1) {
    return v;
  } else if constexpr (sizeof(U) == 2) {
    return __builtin_bswap16(v);
  } else if constexpr (sizeof(U) == 4) {
    return __builtin_bswap32(v);
  } else {
    static_assert(sizeof(U) == 8);
    return __builtin_bswap64(v);
  }
}

template <std::size_t N>
struct UintOfSize;
template <>
struct UintOfSize<1> {
  using type = std::uint8_t;
};
template <>
struct UintOfSize<2> {
  using type = std::uint16_t;
};
template <>
struct UintOfSize<4> {
  using type = std::uint32_t;
};
template <>
struct UintOfSize<8> {
  using type = std::uint64_t;
};

[[noreturn]] void throwBadBool(std::uint8_t byte);

} // namespace detail

/// Writes sizeof(T) big-endian bytes at `out`.
template <Element T>
inline void storeBigEndian(T value, std::uint8_t* out) noexcept {
  if constexpr (std::is_same_v<T, bool>) {
    *out = value ? 1 : 0;
  } else {
    using U = typename detail::UintOfSize<sizeof(T)>::type;
    U bits = std::bit_cast<U>(value);
    if constexpr (std::endian::native == std::endian::little) {
      bits = detail::byteswap(bits);
    }
    std::memcpy(out, &bits, sizeof(U));
  }
}

/// Reads one big-endian element at `in`. A bool byte other than 0/1 raises
/// FormatError.
template <Element T>
inline T loadBigEndian(const std::uint8_t* in) {
  if constexpr (std::is_same_v<T, bool>) {
    if (*in > 1) [[unlikely]] {
      detail::throwBadBool(*in);
    }
    return *in != 0;
  } else {
    using U = typename detail::UintOfSize<sizeof(T)>::type;
    U bits;
    std::memcpy(&bits, in, sizeof(U));
    if constexpr (std::endian::native == std::endian::little) {
      bits = detail::byteswap(bits);
    }
    return std::bit_cast<T>(bits);
  }
}

std::vector<std::uint8_t> encodeElement(const Scalar& value);

/// Inverse of encodeElement. Raises FormatError when bytes.size() differs
/// from the type width or a bool byte is not 0/1.
Scalar decodeElement(std::span<const std::uint8_t> bytes, ElementType type);

/// Converts `count` big-endian elements to native layout in place.
void toNativeInPlace(ElementType type, std::uint8_t* data, std::size_t count);

} // namespace bulkio
