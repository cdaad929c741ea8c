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

#include "bulkio/reader.h"

#include <algorithm>

#include "bulkio/error.h"

namespace bulkio {

Scalar valueAt(const BulkBuffer& buf, ElementType type, std::size_t idx) {
  return visitElementType(type, [&]<typename T>(std::type_identity<T>) {
    return Scalar{valueAt<T>(buf, idx)};
  });
}

Value decodeEvent(
    const BranchDescriptor& branch,
    std::span<const std::uint8_t> payload,
    const CountBuffer* counts,
    std::uint64_t local) {
  return visitElementType(branch.element, [&]<typename T>(std::type_identity<T>) -> Value {
    const auto* base = payload.data();
    if (branch.shape.isScalar()) {
      return Scalar{loadBigEndian<T>(base + local * sizeof(T))};
    }
    std::uint64_t begin = 0;
    std::uint64_t end = 0;
    if (branch.shape.isFixedArray()) {
      begin = local * branch.shape.fixedLength();
      end = begin + branch.shape.fixedLength();
    } else {
      begin = counts->offsets[local];
      end = counts->offsets[local + 1];
    }
    std::vector<Scalar> out;
    out.reserve(end - begin);
    for (auto i = begin; i < end; ++i) {
      out.emplace_back(loadBigEndian<T>(base + i * sizeof(T)));
    }
    return out;
  });
}

BranchReader::BranchReader(std::shared_ptr<const BulkFile> file, std::size_t branchIndex)
    : file_(std::move(file)),
      branch_(&file_->branch(branchIndex)),
      width_(widthBytes(branch_->element)) {
  if (branch_->shape.isVarArray()) {
    countBranch_ = &file_->branch(branch_->shape.countBranch());
  }
}

BranchReader::BranchReader(std::shared_ptr<const BulkFile> file, std::string_view branchName)
    : BranchReader(file, file->branchIndex(branchName)) {}

void BranchReader::checkEntry(EntryIndex entry) const {
  if (entry.value >= nEntries()) {
    fail(
        ErrorCode::kEntryOutOfRange,
        "entry " + std::to_string(entry.value) + " of branch '" + branch_->name + "' with " +
            std::to_string(nEntries()) + " entries");
  }
}

std::size_t BranchReader::basketIndexOf(EntryIndex entry) const {
  checkEntry(entry);
  const auto& baskets = branch_->baskets;
  auto it = std::upper_bound(
      baskets.begin(),
      baskets.end(),
      entry.value,
      [](std::uint64_t e, const BasketDescriptor& b) { return e < b.firstEntry; });
  return static_cast<std::size_t>(it - baskets.begin()) - 1;
}

BasketSpan BranchReader::basketBounds(EntryIndex entry) const {
  const auto& basket = branch_->baskets[basketIndexOf(entry)];
  return {basket.firstEntry, basket.nEntries};
}

std::size_t BranchReader::basketStartingAt(EntryIndex entry) const {
  const auto index = basketIndexOf(entry);
  if (branch_->baskets[index].firstEntry != entry.value) {
    fail(
        ErrorCode::kNotBasketStart,
        "entry " + std::to_string(entry.value) + " lies inside the basket starting at " +
            std::to_string(branch_->baskets[index].firstEntry));
  }
  return index;
}

std::vector<std::uint8_t> BranchReader::readRawBasket(std::size_t basketIndex) const {
  const auto& basket = branch_->baskets.at(basketIndex);
  std::vector<std::uint8_t> raw(basket.compressedSize);
  file_->file().readAt(basket.fileOffset, raw);
  return raw;
}

void BranchReader::loadBasket(const BasketDescriptor& basket, std::uint8_t* out) {
  auto& stats = file_->stats();
  stats.basketReads.fetch_add(1, std::memory_order_relaxed);
  stats.bytesRead.fetch_add(basket.compressedSize, std::memory_order_relaxed);
  if (basket.codec == Codec::kNone) {
    file_->file().readAt(basket.fileOffset, {out, basket.uncompressedSize});
    return;
  }
  compressed_.resize(basket.compressedSize);
  file_->file().readAt(basket.fileOffset, compressed_);
  decompressor_.decompress(compressed_, basket.codec, {out, basket.uncompressedSize});
}

void BranchReader::loadCounts(std::size_t basketIndex, CountBuffer& counts) {
  const auto& basket = countBranch_->baskets[basketIndex];
  countScratch_.resize(basket.uncompressedSize);
  loadBasket(basket, countScratch_.data());
  counts.counts.resize(basket.nEntries);
  counts.offsets.resize(basket.nEntries + 1);
  std::uint64_t total = 0;
  counts.offsets[0] = 0;
  for (std::uint64_t i = 0; i < basket.nEntries; ++i) {
    const auto n = loadBigEndian<std::uint32_t>(countScratch_.data() + i * 4);
    counts.counts[i] = n;
    total += n;
    counts.offsets[i + 1] = total;
  }
  const auto expected = branch_->baskets[basketIndex].uncompressedSize;
  if (total * width_ != expected) {
    fail(
        ErrorCode::kFormatError,
        "branch '" + branch_->name + "' basket at entry " + std::to_string(basket.firstEntry) +
            " holds " + std::to_string(expected) + " bytes but its counts sum to " +
            std::to_string(total) + " elements");
  }
}

void BranchReader::fillCache(std::size_t basketIndex) {
  const auto& basket = branch_->baskets[basketIndex];
  cacheValid_ = false;
  cache_.resize(basket.uncompressedSize);
  loadBasket(basket, cache_.data());
  if (countBranch_ != nullptr) {
    loadCounts(basketIndex, cacheCounts_);
  }
  cacheBasket_ = basketIndex;
  cacheFirst_ = basket.firstEntry;
  cacheEnd_ = basket.endEntry();
  cacheValid_ = true;
}

Value BranchReader::getEntry(EntryIndex entry) {
  checkEntry(entry);
  if (!cacheValid_ || entry.value < cacheFirst_ || entry.value >= cacheEnd_) {
    fillCache(basketIndexOf(entry));
  }
  return decodeEvent(*branch_, cache_, &cacheCounts_, entry.value - cacheFirst_);
}

std::uint64_t BranchReader::getBulkEntries(
    EntryIndex entry,
    BulkBuffer& buf,
    CountBuffer* counts) {
  const auto index = basketStartingAt(entry);
  const auto& basket = branch_->baskets[index];
  auto* out = buf.prepare(basket.uncompressedSize);
  loadBasket(basket, out);
  const auto elements = basket.uncompressedSize / width_;
  toNativeInPlace(branch_->element, out, elements);
  buf.commit(BufferState::kDeserialized, branch_->element, basket.nEntries, elements);
  if (counts != nullptr) {
    if (countBranch_ != nullptr) {
      loadCounts(index, *counts);
    } else {
      counts->clear();
    }
  }
  return basket.nEntries;
}

std::uint64_t BranchReader::getEntriesSerialized(
    EntryIndex entry,
    BulkBuffer& buf,
    CountBuffer* counts) {
  const auto index = basketStartingAt(entry);
  if (countBranch_ != nullptr && counts == nullptr) {
    fail(
        ErrorCode::kCountBufferRequired,
        "branch '" + branch_->name + "' is a variable-size array");
  }
  const auto& basket = branch_->baskets[index];
  auto* out = buf.prepare(basket.uncompressedSize);
  loadBasket(basket, out);
  buf.commit(
      BufferState::kSerialized,
      branch_->element,
      basket.nEntries,
      basket.uncompressedSize / width_);
  if (countBranch_ != nullptr) {
    loadCounts(index, *counts);
  } else if (counts != nullptr) {
    counts->clear();
  }
  return basket.nEntries;
}

} // namespace bulkio
