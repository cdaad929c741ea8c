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

#include "bulkio/format.h"

#include <algorithm>
#include <array>
#include <cstring>
#include <unordered_set>

#include "bulkio/error.h"
#include "bulkio/file.h"

namespace bulkio {

namespace {

class ByteWriter {
 public:
  void u8(std::uint8_t v) {
    out_.push_back(v);
  }
  void u16(std::uint16_t v) {
    put(v);
  }
  void u64(std::uint64_t v) {
    put(v);
  }
  void str(const std::string& s) {
    if (s.size() > 0xFFFF) {
      fail(ErrorCode::kFormatError, "string longer than 65535 bytes: " + s.substr(0, 32));
    }
    u16(static_cast<std::uint16_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> take() {
    return std::move(out_);
  }

 private:
  template <typename T>
  void put(T v) {
    std::array<std::uint8_t, sizeof(T)> bytes;
    storeBigEndian<T>(v, bytes.data());
    out_.insert(out_.end(), bytes.begin(), bytes.end());
  }

  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    return get<std::uint8_t>();
  }
  std::uint16_t u16() {
    return get<std::uint16_t>();
  }
  std::uint64_t u64() {
    return get<std::uint64_t>();
  }
  std::string str() {
    const auto len = u16();
    need(len);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  // Element counts are bounded by what could possibly fit in the remaining
  // bytes so a corrupt count cannot trigger a huge allocation.
  std::uint64_t count(std::size_t minBytesPerItem) {
    const auto n = u64();
    if (n > remaining() / minBytesPerItem) {
      fail(ErrorCode::kFormatError, "footer list count " + std::to_string(n) + " exceeds footer size");
    }
    return n;
  }
  std::size_t remaining() const {
    return in_.size() - pos_;
  }

 private:
  void need(std::size_t n) const {
    if (n > remaining()) {
      fail(ErrorCode::kFormatError, "footer truncated");
    }
  }
  template <typename T>
  T get() {
    need(sizeof(T));
    const T v = loadBigEndian<T>(in_.data() + pos_);
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

constexpr std::size_t kBasketRecordSize = 5 * 8 + 1;
constexpr std::size_t kBranchRecordMinSize = 2 + 1 + 1 + 8 + 8;

[[noreturn]] void branchError(const BranchDescriptor& branch, const std::string& what) {
  fail(ErrorCode::kFormatError, "branch '" + branch.name + "': " + what);
}

} // namespace

Codec codecFromCode(std::uint8_t code) {
  if (code > 0x01) {
    fail(ErrorCode::kFormatError, "unknown codec " + std::to_string(code));
  }
  return static_cast<Codec>(code);
}

std::string_view codecName(Codec codec) {
  return codec == Codec::kDeflate ? "deflate" : "none";
}

std::optional<Codec> parseCodec(std::string_view name) {
  if (name == "none") {
    return Codec::kNone;
  }
  if (name == "deflate") {
    return Codec::kDeflate;
  }
  return std::nullopt;
}

std::optional<std::size_t> FileFooter::findBranch(std::string_view name) const {
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (branches[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::vector<std::uint8_t> encodeFooter(const FileFooter& footer) {
  ByteWriter w;
  w.str(footer.treeName);
  w.u64(footer.nEntries);
  w.u64(footer.branches.size());
  for (const auto& branch : footer.branches) {
    w.str(branch.name);
    w.u8(static_cast<std::uint8_t>(branch.element));
    w.u8(static_cast<std::uint8_t>(branch.shape.kind));
    w.u64(branch.shape.parameter);
    w.u64(branch.baskets.size());
    for (const auto& basket : branch.baskets) {
      w.u64(basket.firstEntry);
      w.u64(basket.nEntries);
      w.u64(basket.fileOffset);
      w.u64(basket.compressedSize);
      w.u64(basket.uncompressedSize);
      w.u8(static_cast<std::uint8_t>(basket.codec));
    }
  }
  return w.take();
}

FileFooter decodeFooter(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  FileFooter footer;
  footer.treeName = r.str();
  footer.nEntries = r.u64();
  const auto nBranches = r.count(kBranchRecordMinSize);
  footer.branches.reserve(nBranches);
  for (std::uint64_t b = 0; b < nBranches; ++b) {
    BranchDescriptor branch;
    branch.name = r.str();
    branch.element = elementTypeFromCode(r.u8());
    const auto kind = r.u8();
    if (kind > 2) {
      fail(ErrorCode::kFormatError, "unknown shape kind " + std::to_string(kind));
    }
    branch.shape.kind = static_cast<BranchShape::Kind>(kind);
    branch.shape.parameter = r.u64();
    const auto nBaskets = r.count(kBasketRecordSize);
    branch.baskets.reserve(nBaskets);
    for (std::uint64_t k = 0; k < nBaskets; ++k) {
      BasketDescriptor basket;
      basket.firstEntry = r.u64();
      basket.nEntries = r.u64();
      basket.fileOffset = r.u64();
      basket.compressedSize = r.u64();
      basket.uncompressedSize = r.u64();
      basket.codec = codecFromCode(r.u8());
      branch.baskets.push_back(basket);
    }
    footer.branches.push_back(std::move(branch));
  }
  if (r.remaining() != 0) {
    fail(ErrorCode::kFormatError, std::to_string(r.remaining()) + " trailing bytes after footer");
  }
  validateFooter(footer);
  return footer;
}

void validateFooter(const FileFooter& footer, std::uint64_t payloadEnd) {
  std::unordered_set<std::string_view> names;
  for (const auto& branch : footer.branches) {
    if (branch.name.empty()) {
      fail(ErrorCode::kFormatError, "empty branch name");
    }
    if (!names.insert(branch.name).second) {
      branchError(branch, "duplicate branch name");
    }
    const auto width = widthBytes(branch.element);
    if (branch.shape.isFixedArray() && branch.shape.parameter < 1) {
      branchError(branch, "fixed array length must be >= 1");
    }
    if (branch.shape.isScalar() && branch.shape.parameter != 0) {
      branchError(branch, "scalar shape carries a parameter");
    }

    std::uint64_t expectedFirst = 0;
    for (const auto& basket : branch.baskets) {
      if (basket.firstEntry != expectedFirst) {
        branchError(
            branch,
            "basket at entry " + std::to_string(basket.firstEntry) +
                " does not continue at " + std::to_string(expectedFirst));
      }
      if (basket.nEntries == 0) {
        branchError(branch, "empty basket");
      }
      if (basket.nEntries > footer.nEntries - basket.firstEntry) {
        branchError(branch, "basket extends past n_entries");
      }
      if (basket.codec == Codec::kNone && basket.compressedSize != basket.uncompressedSize) {
        branchError(branch, "uncompressed basket with differing sizes");
      }
      if (branch.shape.isVarArray()) {
        if (basket.uncompressedSize % width != 0) {
          branchError(branch, "basket size not a multiple of element width");
        }
      } else {
        const auto expected = basket.nEntries * branch.shape.fixedLength() * width;
        if (basket.uncompressedSize != expected) {
          branchError(
              branch,
              "basket at entry " + std::to_string(basket.firstEntry) + " holds " +
                  std::to_string(basket.uncompressedSize) + " bytes, expected " +
                  std::to_string(expected));
        }
      }
      if (payloadEnd != 0 &&
          (basket.fileOffset < kHeaderSize || basket.fileOffset > payloadEnd ||
           basket.compressedSize > payloadEnd - basket.fileOffset)) {
        branchError(branch, "basket byte range outside the payload area");
      }
      expectedFirst = basket.endEntry();
    }
    if (expectedFirst != footer.nEntries) {
      branchError(
          branch,
          "baskets cover " + std::to_string(expectedFirst) + " of " +
              std::to_string(footer.nEntries) + " entries");
    }
  }

  for (std::size_t i = 0; i < footer.branches.size(); ++i) {
    const auto& branch = footer.branches[i];
    if (!branch.shape.isVarArray()) {
      continue;
    }
    const auto countIndex = branch.shape.countBranch();
    if (countIndex >= footer.branches.size() || countIndex == i) {
      branchError(branch, "dangling count-branch reference " + std::to_string(countIndex));
    }
    const auto& count = footer.branches[countIndex];
    if (!count.shape.isScalar() || count.element != ElementType::kU32) {
      branchError(branch, "count branch '" + count.name + "' is not a scalar u32");
    }
    const bool aligned = std::equal(
        branch.baskets.begin(),
        branch.baskets.end(),
        count.baskets.begin(),
        count.baskets.end(),
        [](const BasketDescriptor& a, const BasketDescriptor& b) {
          return a.firstEntry == b.firstEntry && a.nEntries == b.nEntries;
        });
    if (!aligned) {
      branchError(branch, "basket boundaries differ from count branch '" + count.name + "'");
    }
  }
}

FileFooter readFooter(const RandomAccessFile& file) {
  const auto size = file.size();
  if (size < kHeaderSize) {
    fail(ErrorCode::kNotABulkFile, file.path() + " is too short to be a bulk file");
  }
  std::array<std::uint8_t, kHeaderSize> header;
  file.readAt(0, header);
  if (std::memcmp(header.data(), kMagic, sizeof(kMagic)) != 0) {
    fail(ErrorCode::kNotABulkFile, file.path() + " lacks the BKIO magic");
  }
  const auto version = loadBigEndian<std::uint16_t>(header.data() + 4);
  if (version != kFormatVersion) {
    fail(ErrorCode::kFormatError, "unsupported format version " + std::to_string(version));
  }
  if (size < kHeaderSize + kTrailerSize) {
    fail(ErrorCode::kFormatError, file.path() + " has no footer offset");
  }
  std::array<std::uint8_t, kTrailerSize> trailer;
  file.readAt(size - kTrailerSize, trailer);
  const auto footerOffset = loadBigEndian<std::uint64_t>(trailer.data());
  const auto footerEnd = size - kTrailerSize;
  if (footerOffset < kHeaderSize || footerOffset > footerEnd) {
    fail(
        ErrorCode::kFormatError,
        "footer offset " + std::to_string(footerOffset) + " outside file of " +
            std::to_string(size) + " bytes");
  }
  std::vector<std::uint8_t> body(footerEnd - footerOffset);
  file.readAt(footerOffset, body);
  auto footer = decodeFooter(body);
  validateFooter(footer, footerOffset);
  return footer;
}

FileFooter readFooter(const std::string& path) {
  RandomAccessFile file(path);
  return readFooter(file);
}

} // namespace bulkio
