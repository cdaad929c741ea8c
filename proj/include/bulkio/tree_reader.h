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
#include <iterator>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "bulkio/reader.h"

namespace bulkio {

namespace detail {

[[noreturn]] void throwInvalidProxy(std::string_view branch);
[[noreturn]] void throwStaleView();
void checkAttach(
    const BranchDescriptor& branch,
    ElementType requested,
    bool wantArray);

} // namespace detail

class TreeReader;
class FastTreeReader;

// ---------------------------------------------------------------------------
// Plain event loop. Every dereference loads the cursor's entry with
// BranchReader::getEntry (bounds check, basket lookup, generic decode) into
// the branch's value storage and reads the result from there.

namespace detail {

struct PlainBinding {
  PlainBinding(std::shared_ptr<const BulkFile> file, std::size_t branch)
      : reader(std::move(file), branch) {}

  const Value& load(EntryIndex entry) {
    current = reader.getEntry(entry);
    return current;
  }

  BranchReader reader;
  Value current;
};

} // namespace detail

template <Element T>
class ValueProxy {
 public:
  T operator*() const;
  const std::string& branchName() const;

 private:
  friend class TreeReader;
  ValueProxy(const TreeReader* reader, detail::PlainBinding* binding)
      : reader_(reader), binding_(binding) {}

  const TreeReader* reader_;
  detail::PlainBinding* binding_;
};

template <Element T>
class ArrayProxy {
 public:
  /// The current event's elements, copied out.
  std::vector<T> operator*() const;
  std::size_t size() const {
    return (**this).size();
  }
  T operator[](std::size_t i) const {
    auto elements = **this;
    if (i >= elements.size()) {
      fail(ErrorCode::kIndexOutOfRange, "array element " + std::to_string(i) + " of " + std::to_string(elements.size()));
    }
    return elements[i];
  }

 private:
  friend class TreeReader;
  ArrayProxy(const TreeReader* reader, detail::PlainBinding* binding)
      : reader_(reader), binding_(binding) {}

  const TreeReader* reader_;
  detail::PlainBinding* binding_;
};

class TreeReader {
 public:
  explicit TreeReader(std::shared_ptr<const BulkFile> file);
  explicit TreeReader(const std::string& path);

  TreeReader(const TreeReader&) = delete;
  TreeReader& operator=(const TreeReader&) = delete;

  template <Element T>
  ValueProxy<T> attachValue(std::string_view branch) {
    return ValueProxy<T>(this, &attach(branch, kElementTypeOf<T>, false));
  }

  template <Element T>
  ArrayProxy<T> attachArray(std::string_view branch) {
    return ArrayProxy<T>(this, &attach(branch, kElementTypeOf<T>, true));
  }

  /// Moves to the next entry; false once every entry has been visited.
  bool next();

  /// Single-pass loop over the remaining entries, equivalent to calling
  /// next() until it returns false.
  class iterator {
   public:
    using value_type = EntryIndex;
    using difference_type = std::ptrdiff_t;

    EntryIndex operator*() const {
      return reader_->entry();
    }
    iterator& operator++() {
      reader_->next();
      return *this;
    }
    void operator++(int) {
      ++*this;
    }
    bool operator==(std::default_sentinel_t) const {
      return !reader_->positioned();
    }

   private:
    friend class TreeReader;
    explicit iterator(TreeReader* reader) : reader_(reader) {}

    TreeReader* reader_;
  };

  iterator begin() {
    next();
    return iterator(this);
  }
  std::default_sentinel_t end() const {
    return {};
  }

  bool positioned() const {
    return positioned_;
  }
  /// Current entry; raises InvalidProxyState when not positioned.
  EntryIndex entry() const {
    if (!positioned_) {
      detail::throwInvalidProxy("<cursor>");
    }
    return EntryIndex(cursor_);
  }
  std::uint64_t nEntries() const {
    return file_->nEntries();
  }

 private:
  detail::PlainBinding& attach(std::string_view branch, ElementType type, bool wantArray);

  std::shared_ptr<const BulkFile> file_;
  std::vector<std::unique_ptr<detail::PlainBinding>> bindings_;
  // Entries consumed so far; the current entry is cursor_ when positioned_.
  std::uint64_t cursor_ = 0;
  bool started_ = false;
  bool positioned_ = false;
};

template <Element T>
T ValueProxy<T>::operator*() const {
  return std::get<T>(std::get<Scalar>(binding_->load(reader_->entry())));
}

template <Element T>
const std::string& ValueProxy<T>::branchName() const {
  return binding_->reader.descriptor().name;
}

template <Element T>
std::vector<T> ArrayProxy<T>::operator*() const {
  const auto& elements = std::get<std::vector<Scalar>>(binding_->load(reader_->entry()));
  std::vector<T> out;
  out.reserve(elements.size());
  for (const auto& e : elements) {
    out.push_back(std::get<T>(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fast event loop. Each attached branch keeps one serialized basket in a
// BulkBuffer, refilled with getEntriesSerialized when the cursor crosses a
// basket boundary; dereference decodes the one element it needs.

namespace detail {

struct FastBinding {
  FastBinding(std::shared_ptr<const BulkFile> file, std::size_t branch)
      : reader(std::move(file), branch),
        isVar(reader.descriptor().shape.isVarArray()),
        fixedLength(reader.descriptor().shape.fixedLength()) {}

  void refill(std::uint64_t entry) {
    const auto n = reader.getEntriesSerialized(EntryIndex(entry), buffer, isVar ? &counts : nullptr);
    first = entry;
    end = entry + n;
    ++refills;
  }

  BranchReader reader;
  BulkBuffer buffer;
  CountBuffer counts;
  bool isVar;
  std::uint64_t fixedLength;
  std::uint64_t first = 0;
  std::uint64_t end = 0;
  std::uint64_t refills = 0;
};

} // namespace detail

/// Elements of one array event, decoded lazily from a serialized buffer.
/// Valid until the owning FastTreeReader advances.
template <Element T>
class SerializedArrayView {
 public:
  class const_iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = T;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = T;

    const_iterator() = default;
    T operator*() const {
      return (*view_)[index_];
    }
    const_iterator& operator++() {
      ++index_;
      return *this;
    }
    const_iterator operator++(int) {
      auto copy = *this;
      ++index_;
      return copy;
    }
    difference_type operator-(const const_iterator& other) const {
      return static_cast<difference_type>(index_) - static_cast<difference_type>(other.index_);
    }
    bool operator==(const const_iterator& other) const {
      return index_ == other.index_;
    }

   private:
    friend class SerializedArrayView;
    const_iterator(const SerializedArrayView* view, std::size_t index) : view_(view), index_(index) {}

    const SerializedArrayView* view_ = nullptr;
    std::size_t index_ = 0;
  };

  std::size_t size() const {
    return size_;
  }
  bool empty() const {
    return size_ == 0;
  }
  T operator[](std::size_t i) const {
    if (*cursor_ != snapshot_) [[unlikely]] {
      detail::throwStaleView();
    }
    return loadBigEndian<T>(data_ + i * sizeof(T));
  }
  T at(std::size_t i) const {
    if (i >= size_) {
      fail(ErrorCode::kIndexOutOfRange, "array element " + std::to_string(i) + " of " + std::to_string(size_));
    }
    return (*this)[i];
  }
  const_iterator begin() const {
    return {this, 0};
  }
  const_iterator end() const {
    return {this, size_};
  }
  std::vector<T> toVector() const {
    return {begin(), end()};
  }

 private:
  template <Element>
  friend class FastArrayProxy;
  SerializedArrayView(
      const std::uint8_t* data,
      std::size_t size,
      const std::uint64_t* cursor)
      : data_(data), size_(size), cursor_(cursor), snapshot_(*cursor) {}

  const std::uint8_t* data_;
  std::size_t size_;
  const std::uint64_t* cursor_;
  std::uint64_t snapshot_;
};

template <Element T>
class FastValueProxy {
 public:
  T operator*() const;

 private:
  friend class FastTreeReader;
  FastValueProxy(const FastTreeReader* reader, const detail::FastBinding* binding)
      : reader_(reader), binding_(binding) {}

  const FastTreeReader* reader_;
  const detail::FastBinding* binding_;
};

template <Element T>
class FastArrayProxy {
 public:
  SerializedArrayView<T> operator*() const;
  std::size_t size() const {
    return (**this).size();
  }
  T operator[](std::size_t i) const {
    return (**this).at(i);
  }

 private:
  friend class FastTreeReader;
  FastArrayProxy(const FastTreeReader* reader, const detail::FastBinding* binding)
      : reader_(reader), binding_(binding) {}

  const FastTreeReader* reader_;
  const detail::FastBinding* binding_;
};

class FastTreeReader {
 public:
  explicit FastTreeReader(std::shared_ptr<const BulkFile> file);
  explicit FastTreeReader(const std::string& path);

  FastTreeReader(const FastTreeReader&) = delete;
  FastTreeReader& operator=(const FastTreeReader&) = delete;

  template <Element T>
  FastValueProxy<T> attachValue(std::string_view branch) {
    return FastValueProxy<T>(this, &attach(branch, kElementTypeOf<T>, false));
  }

  template <Element T>
  FastArrayProxy<T> attachArray(std::string_view branch) {
    return FastArrayProxy<T>(this, &attach(branch, kElementTypeOf<T>, true));
  }

  bool next() {
    if (++cursor_ < horizon_) [[likely]] {
      return true;
    }
    return crossBasket();
  }

  /// Single-pass loop over the remaining entries, equivalent to calling
  /// next() until it returns false:
  ///
  ///   for (EntryIndex e : reader) { sum += *x; }
  class iterator {
   public:
    using value_type = EntryIndex;
    using difference_type = std::ptrdiff_t;

    EntryIndex operator*() const {
      return EntryIndex(entry_);
    }
    iterator& operator++() {
      // The cursor is kept here and only published to the reader, so the
      // loop does not round-trip it through memory.
      reader_->cursor_ = ++entry_;
      if (entry_ >= reader_->horizon_) [[unlikely]] {
        reader_->crossBasket();
        entry_ = reader_->cursor_;
      }
      return *this;
    }
    void operator++(int) {
      ++*this;
    }
    bool operator==(std::default_sentinel_t) const {
      return entry_ >= reader_->nEntries_;
    }

   private:
    friend class FastTreeReader;
    iterator(FastTreeReader* reader, std::uint64_t entry) : reader_(reader), entry_(entry) {}

    FastTreeReader* reader_;
    std::uint64_t entry_;
  };

  iterator begin() {
    next();
    return {this, cursor_};
  }
  std::default_sentinel_t end() const {
    return {};
  }

  bool positioned() const {
    return cursor_ < nEntries_;
  }
  EntryIndex entry() const {
    if (!positioned()) {
      detail::throwInvalidProxy("<cursor>");
    }
    return EntryIndex(cursor_);
  }
  std::uint64_t nEntries() const {
    return nEntries_;
  }

  /// Number of basket refills performed for `branch` so far.
  std::uint64_t refillCount(std::string_view branch) const;

 private:
  template <Element>
  friend class FastValueProxy;
  template <Element>
  friend class FastArrayProxy;

  detail::FastBinding& attach(std::string_view branch, ElementType type, bool wantArray);
  bool crossBasket();

  std::shared_ptr<const BulkFile> file_;
  std::vector<std::unique_ptr<detail::FastBinding>> bindings_;
  std::uint64_t nEntries_;
  // Current entry. Starts one before entry 0 (wrapping), is clamped to
  // nEntries_ once exhausted, and doubles as the view staleness stamp.
  std::uint64_t cursor_ = ~std::uint64_t{0};
  // First entry at which some binding needs a refill (or the end of file).
  std::uint64_t horizon_ = 0;
};

template <Element T>
T FastValueProxy<T>::operator*() const {
  if (reader_->cursor_ >= reader_->nEntries_) [[unlikely]] {
    detail::throwInvalidProxy(binding_->reader.descriptor().name);
  }
  const auto local = reader_->cursor_ - binding_->first;
  return loadBigEndian<T>(binding_->buffer.data() + local * sizeof(T));
}

template <Element T>
SerializedArrayView<T> FastArrayProxy<T>::operator*() const {
  if (reader_->cursor_ >= reader_->nEntries_) [[unlikely]] {
    detail::throwInvalidProxy(binding_->reader.descriptor().name);
  }
  const auto local = reader_->cursor_ - binding_->first;
  std::uint64_t begin;
  std::uint64_t size;
  if (binding_->isVar) {
    begin = binding_->counts.offsets[local];
    size = binding_->counts.counts[local];
  } else {
    size = binding_->fixedLength;
    begin = local * size;
  }
  return SerializedArrayView<T>(
      binding_->buffer.data() + begin * sizeof(T), size, &reader_->cursor_);
}

} // namespace bulkio
