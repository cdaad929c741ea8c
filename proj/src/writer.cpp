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

#include "bulkio/writer.h"

#include <array>
#include <cerrno>
#include <cstring>
#include <unordered_map>
#include <unordered_set>

#include "bulkio/compression.h"
#include "bulkio/error.h"

namespace bulkio {

namespace {

[[noreturn]] void schemaError(const std::string& what) {
  fail(ErrorCode::kSchemaError, what);
}

void checkElement(const Scalar& value, const BranchDescriptor& branch) {
  if (scalarType(value) != branch.element) {
    fail(
        ErrorCode::kTypeMismatch,
        "branch '" + branch.name + "' holds " + std::string(elementTypeName(branch.element)) +
            ", got " + std::string(elementTypeName(scalarType(value))));
  }
}

void appendElement(const Scalar& value, std::vector<std::uint8_t>& out) {
  std::visit(
      [&]<typename T>(T v) {
        const auto at = out.size();
        out.resize(at + sizeof(T));
        storeBigEndian<T>(v, out.data() + at);
      },
      value);
}

} // namespace

TreeWriter TreeWriter::create(
    const std::string& path,
    const std::vector<BranchSpec>& schema,
    std::uint64_t basketEntries,
    Codec codec,
    const std::string& treeName) {
  if (schema.empty()) {
    schemaError("schema has no branches");
  }
  if (basketEntries == 0) {
    schemaError("basket capacity must be at least one entry");
  }

  TreeWriter w;
  w.path_ = path;
  w.basketEntries_ = basketEntries;
  w.codec_ = codec;
  w.treeName_ = treeName;

  std::unordered_map<std::string, std::size_t> specIndex;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].name.empty()) {
      schemaError("branch name must not be empty");
    }
    if (!specIndex.emplace(schema[i].name, i).second) {
      schemaError("duplicate branch name '" + schema[i].name + "'");
    }
  }

  std::vector<std::size_t> specToBranch(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& spec = schema[i];
    BranchDescriptor desc;
    desc.name = spec.name;
    desc.element = spec.element;
    Binding binding;
    binding.branch = w.branches_.size();
    specToBranch[i] = binding.branch;
    switch (spec.kind) {
      case BranchShape::Kind::kScalar:
        desc.shape = BranchShape::scalar();
        w.branches_.push_back(std::move(desc));
        break;
      case BranchShape::Kind::kFixedArray:
        if (spec.fixedLength < 1) {
          schemaError("fixed array '" + spec.name + "' needs length >= 1");
        }
        desc.shape = BranchShape::fixedArray(spec.fixedLength);
        w.branches_.push_back(std::move(desc));
        break;
      case BranchShape::Kind::kVarArray:
        if (spec.countBranch.empty()) {
          desc.shape = BranchShape::varArray(binding.branch + 1);
          w.branches_.push_back(std::move(desc));
          binding.autoCount = w.branches_.size();
          BranchDescriptor count;
          count.name = spec.name + ".count";
          count.element = ElementType::kU32;
          w.branches_.push_back(std::move(count));
        } else {
          auto it = specIndex.find(spec.countBranch);
          if (it == specIndex.end()) {
            schemaError(
                "count branch '" + spec.countBranch + "' of '" + spec.name + "' is not in the schema");
          }
          const auto& countSpec = schema[it->second];
          if (it->second == i || countSpec.kind != BranchShape::Kind::kScalar ||
              countSpec.element != ElementType::kU32) {
            schemaError("count branch '" + spec.countBranch + "' must be a scalar u32 branch");
          }
          binding.explicitCountCell = it->second;
          w.branches_.push_back(std::move(desc));
        }
        break;
    }
    w.bindings_.push_back(binding);
  }
  // Explicit count links can only be resolved once every spec has a slot.
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (auto cell = w.bindings_[i].explicitCountCell) {
      w.branches_[w.bindings_[i].branch].shape = BranchShape::varArray(specToBranch[*cell]);
    }
  }
  std::unordered_set<std::string_view> names;
  for (const auto& branch : w.branches_) {
    if (!names.insert(branch.name).second) {
      schemaError("duplicate branch name '" + branch.name + "'");
    }
  }
  w.open_.resize(w.branches_.size());

  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) {
    fail(ErrorCode::kWriteError, "cannot create " + path + ": " + std::strerror(errno));
  }
  w.file_.reset(f);
  std::array<std::uint8_t, kHeaderSize> header{};
  std::memcpy(header.data(), kMagic, sizeof(kMagic));
  storeBigEndian<std::uint16_t>(kFormatVersion, header.data() + 4);
  storeBigEndian<std::uint16_t>(0, header.data() + 6);
  w.writeBytes(header);
  return w;
}

TreeWriter::TreeWriter(TreeWriter&&) noexcept = default;
TreeWriter& TreeWriter::operator=(TreeWriter&&) noexcept = default;

TreeWriter::~TreeWriter() {
  if (file_) {
    try {
      close();
    } catch (...) {
    }
  }
}

std::uint64_t TreeWriter::fill(std::span<const Cell> cells) {
  if (!file_) {
    fail(ErrorCode::kWriterClosed, "fill on closed writer for " + path_);
  }
  if (cells.size() != bindings_.size()) {
    fail(
        ErrorCode::kShapeError,
        "expected " + std::to_string(bindings_.size()) + " values per entry, got " +
            std::to_string(cells.size()));
  }

  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& branch = branches_[bindings_[i].branch];
    const auto& cell = cells[i];
    if (branch.shape.isScalar()) {
      const auto* scalar = std::get_if<Scalar>(&cell);
      if (scalar == nullptr) {
        fail(ErrorCode::kShapeError, "branch '" + branch.name + "' takes a scalar");
      }
      checkElement(*scalar, branch);
      continue;
    }
    const auto* array = std::get_if<std::vector<Scalar>>(&cell);
    if (array == nullptr) {
      fail(ErrorCode::kShapeError, "branch '" + branch.name + "' takes an array");
    }
    if (branch.shape.isFixedArray() && array->size() != branch.shape.fixedLength()) {
      fail(
          ErrorCode::kShapeError,
          "branch '" + branch.name + "' takes " + std::to_string(branch.shape.fixedLength()) +
              " elements, got " + std::to_string(array->size()));
    }
    for (const auto& element : *array) {
      checkElement(element, branch);
    }
    if (branch.shape.isVarArray() && array->size() > 0xFFFFFFFFu) {
      fail(ErrorCode::kShapeError, "array of branch '" + branch.name + "' too long for a u32 count");
    }
    if (auto countCell = bindings_[i].explicitCountCell) {
      const auto* count = std::get_if<Scalar>(&cells[*countCell]);
      const auto* value = count ? std::get_if<std::uint32_t>(count) : nullptr;
      if (value == nullptr || *value != array->size()) {
        fail(
            ErrorCode::kShapeError,
            "count branch of '" + branch.name + "' disagrees with array length " +
                std::to_string(array->size()));
      }
    }
  }

  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& binding = bindings_[i];
    auto& out = open_[binding.branch];
    if (const auto* scalar = std::get_if<Scalar>(&cells[i])) {
      appendElement(*scalar, out);
      continue;
    }
    const auto& array = std::get<std::vector<Scalar>>(cells[i]);
    for (const auto& element : array) {
      appendElement(element, out);
    }
    if (binding.autoCount) {
      appendElement(Scalar{static_cast<std::uint32_t>(array.size())}, open_[*binding.autoCount]);
    }
  }

  const auto entry = nFilled_++;
  if (nFilled_ - basketStart_ == basketEntries_) {
    flushBaskets();
  }
  return entry;
}

void TreeWriter::writeBytes(std::span<const std::uint8_t> bytes) {
  if (!bytes.empty() && std::fwrite(bytes.data(), 1, bytes.size(), file_.get()) != bytes.size()) {
    const int err = errno;
    file_.reset();
    fail(ErrorCode::kWriteError, "write to " + path_ + " failed: " + std::strerror(err));
  }
  offset_ += bytes.size();
}

void TreeWriter::flushBaskets() {
  const auto nEntries = nFilled_ - basketStart_;
  if (nEntries == 0) {
    return;
  }
  for (std::size_t b = 0; b < branches_.size(); ++b) {
    auto& payload = open_[b];
    const auto compressed = compressPayload(payload, codec_);
    BasketDescriptor basket;
    basket.firstEntry = basketStart_;
    basket.nEntries = nEntries;
    basket.fileOffset = offset_;
    basket.compressedSize = compressed.size();
    basket.uncompressedSize = payload.size();
    basket.codec = codec_;
    writeBytes(compressed);
    branches_[b].baskets.push_back(basket);
    payload.clear();
  }
  basketStart_ = nFilled_;
}

WriteStats TreeWriter::close() {
  if (!file_) {
    fail(ErrorCode::kWriterClosed, "writer for " + path_ + " already closed");
  }
  flushBaskets();

  FileFooter footer;
  footer.treeName = treeName_;
  footer.nEntries = nFilled_;
  footer.branches = branches_;
  const auto footerOffset = offset_;
  writeBytes(encodeFooter(footer));
  std::array<std::uint8_t, kTrailerSize> trailer;
  storeBigEndian<std::uint64_t>(footerOffset, trailer.data());
  writeBytes(trailer);

  std::FILE* f = file_.release();
  const bool flushed = std::fflush(f) == 0 && std::ferror(f) == 0;
  const bool closed = std::fclose(f) == 0;
  if (!flushed || !closed) {
    fail(ErrorCode::kWriteError, "failed to finish " + path_);
  }

  WriteStats stats;
  stats.nEntries = nFilled_;
  stats.nBasketsPerBranch = branches_.empty() ? 0 : branches_.front().baskets.size();
  for (const auto& branch : branches_) {
    stats.nBaskets += branch.baskets.size();
  }
  stats.bytesWritten = offset_;
  return stats;
}

} // namespace bulkio
