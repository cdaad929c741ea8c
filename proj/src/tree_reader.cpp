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

#include "bulkio/tree_reader.h"

#include <algorithm>

#include "bulkio/error.h"

namespace bulkio {

namespace detail {

void throwInvalidProxy(std::string_view branch) {
  fail(
      ErrorCode::kInvalidProxyState,
      "dereference of '" + std::string(branch) + "' outside a successful next()");
}

void throwStaleView() {
  fail(ErrorCode::kInvalidProxyState, "array view used after the reader advanced");
}

void checkAttach(const BranchDescriptor& branch, ElementType requested, bool wantArray) {
  if (branch.element != requested) {
    fail(
        ErrorCode::kTypeMismatch,
        "branch '" + branch.name + "' holds " + std::string(elementTypeName(branch.element)) +
            ", not " + std::string(elementTypeName(requested)));
  }
  if (wantArray == branch.shape.isScalar()) {
    fail(
        ErrorCode::kTypeMismatch,
        "branch '" + branch.name + "' is " + (wantArray ? "a scalar" : "an array") +
            "; use " + (wantArray ? "attachValue" : "attachArray"));
  }
}

} // namespace detail

TreeReader::TreeReader(std::shared_ptr<const BulkFile> file) : file_(std::move(file)) {}

TreeReader::TreeReader(const std::string& path) : TreeReader(BulkFile::open(path)) {}

detail::PlainBinding& TreeReader::attach(
    std::string_view branch,
    ElementType type,
    bool wantArray) {
  const auto index = file_->branchIndex(branch);
  detail::checkAttach(file_->branch(index), type, wantArray);
  bindings_.push_back(std::make_unique<detail::PlainBinding>(file_, index));
  return *bindings_.back();
}

bool TreeReader::next() {
  if (started_ && cursor_ < nEntries()) {
    ++cursor_;
  }
  started_ = true;
  positioned_ = cursor_ < nEntries();
  return positioned_;
}

FastTreeReader::FastTreeReader(std::shared_ptr<const BulkFile> file)
    : file_(std::move(file)), nEntries_(file_->nEntries()) {}

FastTreeReader::FastTreeReader(const std::string& path) : FastTreeReader(BulkFile::open(path)) {}

detail::FastBinding& FastTreeReader::attach(
    std::string_view branch,
    ElementType type,
    bool wantArray) {
  const auto index = file_->branchIndex(branch);
  detail::checkAttach(file_->branch(index), type, wantArray);
  auto binding = std::make_unique<detail::FastBinding>(file_, index);
  // Attaching mid-loop loads the current basket right away.
  if (positioned()) {
    binding->refill(binding->reader.basketBounds(EntryIndex(cursor_)).firstEntry);
  }
  horizon_ = std::min(horizon_, binding->end);
  bindings_.push_back(std::move(binding));
  return *bindings_.back();
}

bool FastTreeReader::crossBasket() {
  if (cursor_ >= nEntries_) {
    cursor_ = nEntries_;
    return false;
  }
  horizon_ = nEntries_;
  for (auto& binding : bindings_) {
    if (cursor_ >= binding->end) {
      binding->refill(cursor_);
    }
    horizon_ = std::min(horizon_, binding->end);
  }
  return true;
}

std::uint64_t FastTreeReader::refillCount(std::string_view branch) const {
  std::uint64_t total = 0;
  for (const auto& binding : bindings_) {
    if (binding->reader.descriptor().name == branch) {
      total += binding->refills;
    }
  }
  return total;
}

} // namespace bulkio
