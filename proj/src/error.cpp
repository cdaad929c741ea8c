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

#include "bulkio/error.h"

namespace bulkio {

std::string_view errorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormatError:
      return "FormatError";
    case ErrorCode::kNotABulkFile:
      return "NotABulkFile";
    case ErrorCode::kDecompressError:
      return "DecompressError";
    case ErrorCode::kIoError:
      return "IoError";
    case ErrorCode::kSchemaError:
      return "SchemaError";
    case ErrorCode::kShapeError:
      return "ShapeError";
    case ErrorCode::kWriteError:
      return "WriteError";
    case ErrorCode::kWriterClosed:
      return "WriterClosed";
    case ErrorCode::kEntryOutOfRange:
      return "EntryOutOfRange";
    case ErrorCode::kNotBasketStart:
      return "NotBasketStart";
    case ErrorCode::kCountBufferRequired:
      return "CountBufferRequired";
    case ErrorCode::kIndexOutOfRange:
      return "IndexOutOfRange";
    case ErrorCode::kUnknownBranch:
      return "UnknownBranch";
    case ErrorCode::kTypeMismatch:
      return "TypeMismatch";
    case ErrorCode::kInvalidProxyState:
      return "InvalidProxyState";
    case ErrorCode::kUnknownColumn:
      return "UnknownColumn";
    case ErrorCode::kEmptyBenchmark:
      return "EmptyBenchmark";
    case ErrorCode::kBenchmarkIntegrityError:
      return "BenchmarkIntegrityError";
    case ErrorCode::kNoRecords:
      return "NoRecords";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(errorCodeName(code)) + ": " + detail),
      code_(code) {}

void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

} // namespace bulkio
