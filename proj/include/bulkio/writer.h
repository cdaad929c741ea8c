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
#include <cstdio>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bulkio/element.h"
#include "bulkio/format.h"

namespace bulkio {

inline constexpr std::uint64_t kDefaultBasketEntries = 8192;
inline constexpr const char* kDefaultTreeName = "events";

/// One user-declared column of a tree being written.
struct BranchSpec {
  std::string name;
  ElementType element = ElementType::kF32;
  BranchShape::Kind kind = BranchShape::Kind::kScalar;
  std::uint64_t fixedLength = 0;
  // VarArray only: name of an explicit scalar u32 branch holding the
  // lengths. Empty means a "<name>.count" branch is created automatically.
  std::string countBranch;

  static BranchSpec scalar(std::string name, ElementType element) {
    return {std::move(name), element, BranchShape::Kind::kScalar, 0, {}};
  }
  static BranchSpec fixedArray(std::string name, ElementType element, std::uint64_t k) {
    return {std::move(name), element, BranchShape::Kind::kFixedArray, k, {}};
  }
  static BranchSpec varArray(
      std::string name,
      ElementType element,
      std::string countBranch = {}) {
    return {std::move(name), element, BranchShape::Kind::kVarArray, 0, std::move(countBranch)};
  }
};

/// One branch's contribution to an entry.
using Cell = Value;

struct WriteStats {
  std::uint64_t nEntries = 0;
  std::uint64_t nBasketsPerBranch = 0;
  std::uint64_t nBaskets = 0;
  std::uint64_t bytesWritten = 0;
};

/// Accumulates entries row by row into per-branch baskets. Every branch is
/// flushed at the same entry boundary, every `basketEntries` fills.
class TreeWriter {
 public:
  static TreeWriter create(
      const std::string& path,
      const std::vector<BranchSpec>& schema,
      std::uint64_t basketEntries = kDefaultBasketEntries,
      Codec codec = Codec::kNone,
      const std::string& treeName = kDefaultTreeName);

  TreeWriter(TreeWriter&&) noexcept;
  TreeWriter& operator=(TreeWriter&&) noexcept;
  /// Closes the file if still open; errors are swallowed.
  ~TreeWriter();

  /// Appends one entry. `cells` holds one value per schema entry, in schema
  /// order (auto-created count branches are filled implicitly). The entry is
  /// validated as a whole before anything is appended. Returns the entry
  /// index.
  std::uint64_t fill(std::span<const Cell> cells);

  WriteStats close();

  std::uint64_t entries() const {
    return nFilled_;
  }
  bool isOpen() const {
    return file_ != nullptr;
  }

  /// Branch layout as it will appear in the footer (including count
  /// branches); basket lists reflect what has been flushed so far.
  const std::vector<BranchDescriptor>& branches() const {
    return branches_;
  }

 private:
  TreeWriter() = default;

  struct FileCloser {
    void operator()(std::FILE* f) const {
      std::fclose(f);
    }
  };

  struct Binding {
    std::size_t branch = 0;
    // Auto-created count branch for VarArray specs.
    std::optional<std::size_t> autoCount;
    // Schema position of an explicit count branch.
    std::optional<std::size_t> explicitCountCell;
  };

  void writeBytes(std::span<const std::uint8_t> bytes);
  void flushBaskets();

  std::string path_;
  std::unique_ptr<std::FILE, FileCloser> file_;
  std::uint64_t basketEntries_ = kDefaultBasketEntries;
  Codec codec_ = Codec::kNone;
  std::string treeName_;
  std::vector<BranchDescriptor> branches_;
  std::vector<Binding> bindings_;
  std::vector<std::vector<std::uint8_t>> open_;
  std::uint64_t basketStart_ = 0;
  std::uint64_t nFilled_ = 0;
  std::uint64_t offset_ = 0;
};

} // namespace bulkio
