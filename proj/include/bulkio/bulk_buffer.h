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
#include <cstring>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "bulkio/element.h"
#include "bulkio/error.h"

namespace bulkio {

enum class BufferState : std::uint8_t {
  // Native-layout elements, ready for direct indexing.
  kDeserialized,
  // On-disk big-endian bytes; each access decodes.
  kSerialized,
};

/// Caller-owned byte buffer that receives a whole basket. Storage grows to
/// the largest basket seen and is never shrunk, so a buffer reused across an
/// event loop stops allocating after the first basket.
class BulkBuffer {
 public:
  static constexpr std::size_t kAlignment = 64;

  BulkBuffer() = default;
  BulkBuffer(BulkBuffer&&) noexcept = default;
  BulkBuffer& operator=(BulkBuffer&&) noexcept = default;

  BufferState state() const {
    return state_;
  }
  ElementType elementType() const {
    return type_;
  }
  std::uint64_t eventCount() const {
    return eventCount_;
  }
  std::uint64_t elementCount() const {
    return elementCount_;
  }
  std::size_t sizeBytes() const {
    return size_;
  }
  std::size_t capacityBytes() const {
    return capacity_;
  }
  /// Bumped on every refill; lets views detect that they went stale.
  std::uint64_t generation() const {
    return generation_;
  }
  const std::uint8_t* data() const {
    return storage_.get();
  }
  std::span<const std::uint8_t> bytes() const {
    return {storage_.get(), size_};
  }

  /// Native element view (the "reinterpret the buffer as T[]" access).
  /// Requires a Deserialized buffer of element type T.
  template <Element T>
  std::span<const T> view() const {
    if (state_ != BufferState::kDeserialized) {
      fail(ErrorCode::kTypeMismatch, "buffer holds serialized bytes; decode with valueAt");
    }
    checkType<T>();
    return {reinterpret_cast<const T*>(storage_.get()), static_cast<std::size_t>(elementCount_)};
  }

  template <Element T>
  void checkType() const {
    if (kElementTypeOf<T> != type_) {
      fail(
          ErrorCode::kTypeMismatch,
          "buffer holds " + std::string(elementTypeName(type_)) + ", requested " +
              std::string(elementTypeName(kElementTypeOf<T>)));
    }
  }

  /// Makes room for `bytes` bytes, invalidating the current contents.
  std::uint8_t* prepare(std::size_t bytes) {
    if (bytes > capacity_) {
      storage_.reset(static_cast<std::uint8_t*>(
          ::operator new(bytes, std::align_val_t{kAlignment})));
      capacity_ = bytes;
    }
    size_ = 0;
    elementCount_ = 0;
    eventCount_ = 0;
    ++generation_;
    return storage_.get();
  }

  /// Publishes what the last prepare() call's storage now holds.
  void commit(
      BufferState state,
      ElementType type,
      std::uint64_t events,
      std::uint64_t elements) {
    state_ = state;
    type_ = type;
    eventCount_ = events;
    elementCount_ = elements;
    size_ = elements * widthBytes(type);
  }

 private:
  struct AlignedDelete {
    void operator()(std::uint8_t* p) const {
      ::operator delete(p, std::align_val_t{kAlignment});
    }
  };

  std::unique_ptr<std::uint8_t, AlignedDelete> storage_;
  std::size_t capacity_ = 0;
  std::size_t size_ = 0;
  BufferState state_ = BufferState::kDeserialized;
  ElementType type_ = ElementType::kF32;
  std::uint64_t eventCount_ = 0;
  std::uint64_t elementCount_ = 0;
  std::uint64_t generation_ = 0;
};

/// Per-event element counts of one variable-array basket, with their prefix
/// sums: event i occupies elements [offsets[i], offsets[i + 1]).
struct CountBuffer {
  std::vector<std::uint32_t> counts;
  std::vector<std::uint64_t> offsets;

  std::uint64_t totalElements() const {
    return offsets.empty() ? 0 : offsets.back();
  }
  void clear() {
    counts.clear();
    offsets.clear();
  }
};

/// Element `idx` of `buf`: a native load for Deserialized buffers, a
/// big-endian decode for Serialized ones.
template <Element T>
inline T valueAt(const BulkBuffer& buf, std::size_t idx) {
  buf.checkType<T>();
  if (idx >= buf.elementCount()) {
    fail(
        ErrorCode::kIndexOutOfRange,
        "element " + std::to_string(idx) + " of " + std::to_string(buf.elementCount()));
  }
  const auto* at = buf.data() + idx * sizeof(T);
  if (buf.state() == BufferState::kSerialized) {
    return loadBigEndian<T>(at);
  }
  T value;
  std::memcpy(&value, at, sizeof(T));
  return value;
}

Scalar valueAt(const BulkBuffer& buf, ElementType type, std::size_t idx);

} // namespace bulkio
