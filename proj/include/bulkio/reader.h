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
#include <string_view>
#include <vector>

#include "bulkio/bulk_buffer.h"
#include "bulkio/compression.h"
#include "bulkio/file.h"

namespace bulkio {

/// Bounds-checked 0-based entry number.
struct EntryIndex {
  std::uint64_t value = 0;

  constexpr EntryIndex() = default;
  constexpr explicit EntryIndex(std::uint64_t v) : value(v) {}

  auto operator<=>(const EntryIndex&) const = default;
};

struct BasketSpan {
  std::uint64_t firstEntry = 0;
  std::uint64_t nEntries = 0;

  bool operator==(const BasketSpan&) const = default;
};

/// Reads one branch. Offers the three access paths: one entry at a time
/// (getEntry), a whole basket deserialized to native layout
/// (getBulkEntries), and a whole basket left in on-disk byte order
/// (getEntriesSerialized).
///
/// Not thread-safe; give each thread its own BranchReader over a shared
/// BulkFile.
class BranchReader {
 public:
  BranchReader(std::shared_ptr<const BulkFile> file, std::size_t branchIndex);
  BranchReader(std::shared_ptr<const BulkFile> file, std::string_view branchName);

  const BranchDescriptor& descriptor() const {
    return *branch_;
  }
  std::uint64_t nEntries() const {
    return file_->nEntries();
  }
  std::size_t basketCount() const {
    return branch_->baskets.size();
  }

  /// The value written at `entry`. The containing basket is decompressed
  /// into a one-basket cache, then exactly one event is decoded from it.
  Value getEntry(EntryIndex entry);

  /// Copies the basket starting at `entry` into `buf` in native layout and
  /// returns its entry count. For VarArray branches, `counts` (optional)
  /// receives the per-event lengths.
  std::uint64_t getBulkEntries(EntryIndex entry, BulkBuffer& buf, CountBuffer* counts = nullptr);

  /// Copies the basket starting at `entry` into `buf` byte-for-byte in
  /// on-disk order and returns its entry count. VarArray branches require
  /// `counts`; for other shapes it is cleared.
  std::uint64_t getEntriesSerialized(
      EntryIndex entry,
      BulkBuffer& buf,
      CountBuffer* counts = nullptr);

  BasketSpan basketBounds(EntryIndex entry) const;

  std::size_t basketIndexOf(EntryIndex entry) const;

  /// The basket's on-disk bytes, still compressed.
  std::vector<std::uint8_t> readRawBasket(std::size_t basketIndex) const;

 private:
  void checkEntry(EntryIndex entry) const;
  std::size_t basketStartingAt(EntryIndex entry) const;
  void loadBasket(const BasketDescriptor& basket, std::uint8_t* out);
  void loadCounts(std::size_t basketIndex, CountBuffer& counts);
  void fillCache(std::size_t basketIndex);

  std::shared_ptr<const BulkFile> file_;
  const BranchDescriptor* branch_;
  const BranchDescriptor* countBranch_ = nullptr;
  std::size_t width_;
  Decompressor decompressor_;
  std::vector<std::uint8_t> compressed_;
  std::vector<std::uint8_t> countScratch_;

  // get_entry cache: one decompressed basket in on-disk byte order.
  bool cacheValid_ = false;
  std::size_t cacheBasket_ = 0;
  std::uint64_t cacheFirst_ = 0;
  std::uint64_t cacheEnd_ = 0;
  std::vector<std::uint8_t> cache_;
  CountBuffer cacheCounts_;
};

/// Decodes event `local` of a serialized basket payload (shape-aware).
Value decodeEvent(
    const BranchDescriptor& branch,
    std::span<const std::uint8_t> payload,
    const CountBuffer* counts,
    std::uint64_t local);

} // namespace bulkio
