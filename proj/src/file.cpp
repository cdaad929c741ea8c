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

#include "bulkio/file.h"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include "bulkio/error.h"

namespace bulkio {

RandomAccessFile::RandomAccessFile(const std::string& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd_ < 0) {
    fail(
        ErrorCode::kIoError,
        "cannot open " + path + ": " + std::strerror(errno));
  }
  struct stat st {};
  if (::fstat(fd_, &st) != 0) {
    const int err = errno;
    ::close(fd_);
    fail(ErrorCode::kIoError, "cannot stat " + path + ": " + std::strerror(err));
  }
  size_ = static_cast<std::uint64_t>(st.st_size);
}

RandomAccessFile::~RandomAccessFile() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

void RandomAccessFile::readAt(
    std::uint64_t offset,
    std::span<std::uint8_t> out) const {
  if (offset > size_ || out.size() > size_ - offset) {
    fail(
        ErrorCode::kFormatError,
        "read of " + std::to_string(out.size()) + " bytes at offset " +
            std::to_string(offset) + " runs past end of " + path_);
  }
  std::size_t done = 0;
  while (done < out.size()) {
    const auto n = ::pread(
        fd_,
        out.data() + done,
        out.size() - done,
        static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      fail(ErrorCode::kIoError, "pread failed on " + path_ + ": " + std::strerror(errno));
    }
    if (n == 0) {
      fail(ErrorCode::kFormatError, "unexpected end of file in " + path_);
    }
    done += static_cast<std::size_t>(n);
  }
}

BulkFile::BulkFile(const std::string& path)
    : file_(path), footer_(readFooter(file_)) {}

std::shared_ptr<BulkFile> BulkFile::open(const std::string& path) {
  return std::make_shared<BulkFile>(path);
}

std::size_t BulkFile::branchIndex(std::string_view name) const {
  if (auto index = footer_.findBranch(name)) {
    return *index;
  }
  fail(ErrorCode::kUnknownBranch, "no branch named '" + std::string(name) + "'");
}

} // namespace bulkio
