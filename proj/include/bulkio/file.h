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

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "bulkio/format.h"

namespace bulkio {

/// Read-only file addressed by offset (pread); no shared cursor, so one
/// instance may serve several readers on different threads.
class RandomAccessFile {
 public:
  explicit RandomAccessFile(const std::string& path);
  ~RandomAccessFile();

  RandomAccessFile(const RandomAccessFile&) = delete;
  RandomAccessFile& operator=(const RandomAccessFile&) = delete;

  std::uint64_t size() const {
    return size_;
  }
  const std::string& path() const {
    return path_;
  }

  /// Fills `out` from `offset`. A short read raises FormatError (the index
  /// points past the data actually present).
  void readAt(std::uint64_t offset, std::span<std::uint8_t> out) const;

 private:
  std::string path_;
  int fd_ = -1;
  std::uint64_t size_ = 0;
};

/// Counters shared by every reader opened on one BulkFile.
struct IoStats {
  std::atomic<std::uint64_t> basketReads{0};
  std::atomic<std::uint64_t> bytesRead{0};
};

/// An open file plus its validated footer.
class BulkFile {
 public:
  static std::shared_ptr<BulkFile> open(const std::string& path);

  const FileFooter& footer() const {
    return footer_;
  }
  const RandomAccessFile& file() const {
    return file_;
  }
  std::uint64_t nEntries() const {
    return footer_.nEntries;
  }

  /// Index of `name`; raises UnknownBranch.
  std::size_t branchIndex(std::string_view name) const;
  const BranchDescriptor& branch(std::size_t index) const {
    return footer_.branches.at(index);
  }

  IoStats& stats() const {
    return stats_;
  }

  explicit BulkFile(const std::string& path);

 private:
  RandomAccessFile file_;
  FileFooter footer_;
  mutable IoStats stats_;
};

} // namespace bulkio
