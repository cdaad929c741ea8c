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

#include <stdexcept>
#include <string>
#include <string_view>

namespace bulkio {

enum class ErrorCode {
  // format-core
  kFormatError,
  kNotABulkFile,
  kDecompressError,
  kIoError,
  // writer
  kSchemaError,
  kShapeError,
  kWriteError,
  kWriterClosed,
  // reader
  kEntryOutOfRange,
  kNotBasketStart,
  kCountBufferRequired,
  kIndexOutOfRange,
  // iterator / dataframe
  kUnknownBranch,
  kTypeMismatch,
  kInvalidProxyState,
  kUnknownColumn,
  // benchmark harness
  kEmptyBenchmark,
  kBenchmarkIntegrityError,
  kNoRecords,
  // bad parameters that are not covered above (zero slots, empty ranges)
  kInvalidArgument,
};

std::string_view errorCodeName(ErrorCode code);

/// Every failure raised by the library. The code identifies the error kind;
/// what() is "<CodeName>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept {
    return code_;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail);

} // namespace bulkio
