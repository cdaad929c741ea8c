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

#include "bulkio/bench.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <span>

#include "bulkio/compression.h"
#include "bulkio/dataframe.h"
#include "bulkio/error.h"
#include "bulkio/reader.h"
#include "bulkio/tree_reader.h"

namespace bulkio::bench {

namespace {

struct ScenarioInfo {
  Scenario scenario;
  std::string_view name;
  std::string_view description;
};

constexpr ScenarioInfo kScenarioInfo[] = {
    {Scenario::kGetEntry, "get-entry", "per-entry BranchReader::getEntry"},
    {Scenario::kBulk, "bulk", "getBulkEntries, native buffer indexing"},
    {Scenario::kReader, "reader", "TreeReader value proxies (getEntry per deref)"},
    {Scenario::kFastReader, "fast-reader", "FastTreeReader, decode at dereference"},
    {Scenario::kRdfStandard, "rdf-standard", "Frame over a per-entry DataSource"},
    {Scenario::kRdfBulk, "rdf-bulk", "Frame over a bulk DataSource"},
    {Scenario::kRdsBulk, "rds-bulk", "direct reduction over DataSource basket buffers"},
};

std::uint64_t rampModulus(ElementType type) {
  switch (type) {
    case ElementType::kI8:
      return 1ull << 7;
    case ElementType::kU8:
      return 1ull << 8;
    case ElementType::kI16:
      return 1ull << 15;
    case ElementType::kU16:
      return 1ull << 16;
    case ElementType::kI32:
      return 1ull << 31;
    case ElementType::kU32:
      return 1ull << 32;
    case ElementType::kF32:
      return 1ull << 24;
    case ElementType::kBool:
      return 2;
    default:
      return 1ull << 53;
  }
}

template <Element T>
Scalar rampScalar(std::uint64_t i) {
  return Scalar{static_cast<T>(i % rampModulus(kElementTypeOf<T>))};
}

using Clock = std::chrono::steady_clock;

// Scenario bodies are kept out of line so each loop gets its own register
// allocation instead of sharing one with the type dispatch.
template <Element T>
[[gnu::noinline]] double sumGetEntry(const std::shared_ptr<const BulkFile>& file) {
  BranchReader reader(file, kBranchName);
  const auto n = reader.nEntries();
  double sum = 0;
  if (reader.descriptor().shape.isScalar()) {
    for (std::uint64_t e = 0; e < n; ++e) {
      sum += static_cast<double>(std::get<T>(std::get<Scalar>(reader.getEntry(EntryIndex(e)))));
    }
    return sum;
  }
  for (std::uint64_t e = 0; e < n; ++e) {
    const auto value = reader.getEntry(EntryIndex(e));
    for (const auto& v : std::get<std::vector<Scalar>>(value)) {
      sum += static_cast<double>(std::get<T>(v));
    }
  }
  return sum;
}

// Integral terms, each below 2^32 in magnitude, keep every partial sum of
// a run of at most 2^20 of them exact while |acc| < 2^51. Such runs add up
// to the same bits in any order, so they are split over four independent
// accumulators; anything else is added in sequence.
template <Element T>
bool exactInAnyOrder(double acc, std::span<const T> values) {
  if (values.size() > (std::size_t{1} << 20) || !(std::fabs(acc) < 0x1p51)) {
    return false;
  }
  if constexpr (std::is_same_v<T, float>) {
    // Bitwise, so NaN and -0 fall to the sequential path too.
    std::uint32_t mismatch = 0;
    for (const float v : values) {
      const auto truncated = static_cast<float>(static_cast<std::int32_t>(v));
      mismatch |= std::bit_cast<std::uint32_t>(truncated) ^ std::bit_cast<std::uint32_t>(v);
    }
    return mismatch == 0;
  } else {
    return std::is_integral_v<T> && sizeof(T) <= 4;
  }
}

// Out of line so the accumulators stay in registers across basket loads.
template <Element T>
[[gnu::noinline]] double accumulate(double acc, std::span<const T> values) {
  std::size_t i = 0;
  if (exactInAnyOrder(acc, values)) {
    double lanes[4] = {acc, 0, 0, 0};
    for (; i + 4 <= values.size(); i += 4) {
      for (int k = 0; k < 4; ++k) {
        lanes[k] += static_cast<double>(values[i + k]);
      }
    }
    acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  }
  for (; i < values.size(); ++i) {
    acc += static_cast<double>(values[i]);
  }
  return acc;
}

template <Element T>
[[gnu::noinline]] double sumBulk(const std::shared_ptr<const BulkFile>& file) {
  BranchReader reader(file, kBranchName);
  BulkBuffer buffer;
  const auto n = reader.nEntries();
  double sum = 0;
  for (std::uint64_t entry = 0; entry < n;) {
    entry += reader.getBulkEntries(EntryIndex(entry), buffer);
    sum = accumulate(sum, buffer.view<T>());
  }
  return sum;
}

template <typename Reader, typename Proxy>
[[gnu::noinline]] double sumValueLoop(Reader& reader, const Proxy& x) {
  double sum = 0;
  for ([[maybe_unused]] EntryIndex entry : reader) {
    sum += static_cast<double>(*x);
  }
  return sum;
}

template <typename Reader, typename Proxy>
[[gnu::noinline]] double sumArrayLoop(Reader& reader, const Proxy& x) {
  double sum = 0;
  for ([[maybe_unused]] EntryIndex entry : reader) {
    for (const auto v : *x) {
      sum += static_cast<double>(v);
    }
  }
  return sum;
}

template <Element T, typename Reader>
double sumIterator(const std::shared_ptr<const BulkFile>& file) {
  Reader reader(file);
  if (file->branch(file->branchIndex(kBranchName)).shape.isScalar()) {
    const auto x = reader.template attachValue<T>(kBranchName);
    return sumValueLoop(reader, x);
  }
  const auto x = reader.template attachArray<T>(kBranchName);
  return sumArrayLoop(reader, x);
}

template <Element T>
[[gnu::noinline]] double sumFrame(const std::shared_ptr<const BulkFile>& file, SourceMode mode) {
  auto source = std::make_shared<DataSource>(file, mode, 1);
  Frame frame(source);
  const auto& info = source->columns()[source->columnIndex(kBranchName)];
  if (info.shape.isScalar()) {
    if (info.element != ElementType::kBool) {
      return frame.sum(kBranchName);
    }
    return frame.define("s", {kBranchName}, [](T v) { return static_cast<double>(v); }).sum("s");
  }
  return frame
      .define(
          "s",
          {kBranchName},
          [](const std::vector<T>& v) {
            double s = 0;
            for (const T e : v) {
              s += static_cast<double>(e);
            }
            return s;
          })
      .sum("s");
}

[[gnu::noinline]] double sumDirect(const std::shared_ptr<const BulkFile>& file) {
  DataSource source(file, SourceMode::kBulk, 1);
  return directSumElements(source, kBranchName);
}

double runScenario(const std::shared_ptr<const BulkFile>& file, Scenario scenario) {
  const auto type = file->branch(file->branchIndex(kBranchName)).element;
  return visitElementType(type, [&]<typename T>(std::type_identity<T>) -> double {
    switch (scenario) {
      case Scenario::kGetEntry:
        return sumGetEntry<T>(file);
      case Scenario::kBulk:
        return sumBulk<T>(file);
      case Scenario::kReader:
        return sumIterator<T, TreeReader>(file);
      case Scenario::kFastReader:
        return sumIterator<T, FastTreeReader>(file);
      case Scenario::kRdfStandard:
        return sumFrame<T>(file, SourceMode::kPerEntry);
      case Scenario::kRdfBulk:
        return sumFrame<T>(file, SourceMode::kBulk);
      case Scenario::kRdsBulk:
        return sumDirect(file);
    }
    return 0.0;
  });
}

std::string formatG6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Full precision: integral values as plain integers, anything else in the
// shortest form that round-trips.
std::string formatFull(double v) {
  char buf[400];
  const bool integral = std::isfinite(v) && v == std::trunc(v) && std::fabs(v) < 1e17;
  const auto result = integral ? std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed)
                               : std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

std::string encoded(const Value& value) {
  std::string out;
  auto append = [&](const Scalar& s) {
    auto bytes = encodeElement(s);
    out.append(bytes.begin(), bytes.end());
  };
  if (const auto* scalar = std::get_if<Scalar>(&value)) {
    append(*scalar);
  } else {
    for (const auto& s : std::get<std::vector<Scalar>>(value)) {
      append(s);
    }
  }
  return out;
}

Value sliceBuffer(
    const BranchDescriptor& branch,
    const BulkBuffer& buf,
    const CountBuffer& counts,
    std::uint64_t local) {
  if (branch.shape.isScalar()) {
    return valueAt(buf, branch.element, local);
  }
  std::uint64_t begin = local * branch.shape.fixedLength();
  std::uint64_t end = begin + branch.shape.fixedLength();
  if (branch.shape.isVarArray()) {
    begin = counts.offsets[local];
    end = counts.offsets[local + 1];
  }
  std::vector<Scalar> out;
  for (auto i = begin; i < end; ++i) {
    out.push_back(valueAt(buf, branch.element, i));
  }
  return out;
}

} // namespace

std::string_view scenarioName(Scenario scenario) {
  for (const auto& info : kScenarioInfo) {
    if (info.scenario == scenario) {
      return info.name;
    }
  }
  return "?";
}

std::string_view scenarioDescription(Scenario scenario) {
  for (const auto& info : kScenarioInfo) {
    if (info.scenario == scenario) {
      return info.description;
    }
  }
  return "?";
}

std::optional<Scenario> parseScenario(std::string_view name) {
  for (const auto& info : kScenarioInfo) {
    if (info.name == name) {
      return info.scenario;
    }
  }
  return std::nullopt;
}

bool parseShape(std::string_view text, GenerateOptions& opts) {
  if (text == "scalar") {
    opts.shape = BranchShape::Kind::kScalar;
    opts.fixedLength = 1;
    return true;
  }
  if (text == "var") {
    opts.shape = BranchShape::Kind::kVarArray;
    return true;
  }
  if (text.starts_with("fixed:")) {
    const auto digits = text.substr(6);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string_view::npos) {
      return false;
    }
    const auto k = std::stoull(std::string(digits));
    if (k == 0) {
      return false;
    }
    opts.shape = BranchShape::Kind::kFixedArray;
    opts.fixedLength = k;
    return true;
  }
  return false;
}

double rampValue(ElementType type, std::uint64_t i) {
  return static_cast<double>(i % rampModulus(type));
}

WriteStats generate(const GenerateOptions& opts) {
  if (opts.entries == 0) {
    fail(ErrorCode::kEmptyBenchmark, "a benchmark file needs at least one entry");
  }
  BranchSpec spec;
  switch (opts.shape) {
    case BranchShape::Kind::kScalar:
      spec = BranchSpec::scalar(kBranchName, opts.type);
      break;
    case BranchShape::Kind::kFixedArray:
      spec = BranchSpec::fixedArray(kBranchName, opts.type, opts.fixedLength);
      break;
    case BranchShape::Kind::kVarArray:
      spec = BranchSpec::varArray(kBranchName, opts.type);
      break;
  }
  auto writer = TreeWriter::create(opts.output, {spec}, opts.basketEntries, opts.codec);
  visitElementType(opts.type, [&]<typename T>(std::type_identity<T>) {
    std::vector<Cell> row(1);
    std::uint64_t flat = 0;
    for (std::uint64_t e = 0; e < opts.entries; ++e) {
      if (opts.shape == BranchShape::Kind::kScalar) {
        row[0] = rampScalar<T>(flat++);
      } else {
        const auto n = opts.shape == BranchShape::Kind::kVarArray ? varLength(e) : opts.fixedLength;
        std::vector<Scalar> elements;
        elements.reserve(n);
        for (std::uint64_t j = 0; j < n; ++j) {
          elements.push_back(rampScalar<T>(flat++));
        }
        row[0] = std::move(elements);
      }
      writer.fill(row);
    }
  });
  return writer.close();
}

BenchRecord runOnce(const std::string& file, Scenario scenario, std::uint32_t repeat) {
  const auto start = Clock::now();
  auto bulkFile = BulkFile::open(file);
  const double checksum = runScenario(bulkFile, scenario);
  const std::chrono::duration<double> wall = Clock::now() - start;

  BenchRecord record;
  record.scenario = scenario;
  record.entries = bulkFile->nEntries();
  const auto& branch = bulkFile->branch(bulkFile->branchIndex(kBranchName));
  for (const auto& basket : branch.baskets) {
    record.basketEntries = std::max(record.basketEntries, basket.nEntries);
  }
  record.codec = branch.baskets.empty() ? Codec::kNone : branch.baskets.front().codec;
  record.repeat = repeat;
  record.wallSeconds = wall.count();
  record.eventsPerSecond =
      record.wallSeconds > 0 ? static_cast<double>(record.entries) / record.wallSeconds : 0.0;
  record.checksum = checksum;
  return record;
}

std::vector<BenchRecord> run(
    const std::string& file,
    const std::vector<Scenario>& scenarios,
    std::uint32_t repeat) {
  if (repeat == 0) {
    fail(ErrorCode::kInvalidArgument, "repeat must be at least 1");
  }
  std::vector<BenchRecord> records;
  for (const auto scenario : scenarios) {
    for (std::uint32_t r = 0; r < repeat; ++r) {
      records.push_back(runOnce(file, scenario, r));
      const auto& first = records.front();
      const auto& last = records.back();
      if (std::memcmp(&first.checksum, &last.checksum, sizeof(double)) != 0) {
        fail(
            ErrorCode::kBenchmarkIntegrityError,
            std::string(scenarioName(last.scenario)) + " repeat " + std::to_string(r) +
                " summed to " + formatFull(last.checksum) + " but " +
                std::string(scenarioName(first.scenario)) + " summed to " +
                formatFull(first.checksum));
      }
    }
  }
  return records;
}

double medianWallSeconds(const std::vector<BenchRecord>& records, Scenario scenario) {
  std::vector<double> walls;
  for (const auto& r : records) {
    if (r.scenario == scenario) {
      walls.push_back(r.wallSeconds);
    }
  }
  if (walls.empty()) {
    fail(ErrorCode::kNoRecords, "no records for scenario " + std::string(scenarioName(scenario)));
  }
  std::sort(walls.begin(), walls.end());
  const auto mid = walls.size() / 2;
  return walls.size() % 2 == 1 ? walls[mid] : 0.5 * (walls[mid - 1] + walls[mid]);
}

std::string formatCsv(const std::vector<BenchRecord>& records) {
  if (records.empty()) {
    fail(ErrorCode::kNoRecords, "nothing to report");
  }
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) {
    out += std::string(scenarioName(r.scenario)) + "," + std::to_string(r.entries) + "," +
        std::to_string(r.basketEntries) + "," + std::string(codecName(r.codec)) + "," +
        std::to_string(r.repeat) + "," + formatG6(r.wallSeconds) + "," +
        formatG6(r.eventsPerSecond) + "," + formatFull(r.checksum) + "\n";
  }
  return out;
}

void report(const std::vector<BenchRecord>& records, const std::string& path) {
  const auto text = formatCsv(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) {
    fail(ErrorCode::kWriteError, "cannot write " + path);
  }
}

VerifyReport verify(const std::string& path, std::uint64_t exhaustiveLimit, std::uint64_t samples) {
  VerifyReport report;
  std::shared_ptr<BulkFile> file;
  try {
    file = BulkFile::open(path);
  } catch (const Error& e) {
    report.ok = false;
    report.failures.push_back(std::string("footer: ") + e.what());
    return report;
  }
  const auto n = file->nEntries();
  report.exhaustive = n <= exhaustiveLimit;

  std::vector<std::uint64_t> entries;
  if (report.exhaustive) {
    entries.resize(n);
    for (std::uint64_t e = 0; e < n; ++e) {
      entries[e] = e;
    }
  } else {
    std::mt19937_64 rng(0x5eed);
    std::uniform_int_distribution<std::uint64_t> pick(0, n - 1);
    std::set<std::uint64_t> chosen;
    while (chosen.size() < std::min(samples, n)) {
      chosen.insert(pick(rng));
    }
    entries.assign(chosen.begin(), chosen.end());
  }

  for (std::size_t b = 0; b < file->footer().branches.size(); ++b) {
    const auto& branch = file->branch(b);
    BranchReader reader(file, b);
    BulkBuffer deserialized;
    BulkBuffer serialized;
    CountBuffer bulkCounts;
    CountBuffer serialCounts;
    std::size_t i = 0;
    std::uint64_t basketFirst = 0;
    try {
      while (i < entries.size()) {
        const auto bounds = reader.basketBounds(EntryIndex(entries[i]));
        basketFirst = bounds.firstEntry;
        const auto start = EntryIndex(bounds.firstEntry);
        reader.getBulkEntries(start, deserialized, &bulkCounts);
        reader.getEntriesSerialized(start, serialized, &serialCounts);
        ++report.basketsChecked;

        const auto index = reader.basketIndexOf(start);
        const auto& basket = branch.baskets[index];
        const auto independent =
            decompressPayload(reader.readRawBasket(index), basket.codec, basket.uncompressedSize);
        if (!std::equal(
                independent.begin(),
                independent.end(),
                serialized.bytes().begin(),
                serialized.bytes().end())) {
          report.failures.push_back(
              "branch '" + branch.name + "' basket at entry " + std::to_string(basketFirst) +
              ": serialized payload differs from the raw basket");
        }
        if (branch.shape.isVarArray() && serialCounts.totalElements() != serialized.elementCount()) {
          report.failures.push_back(
              "branch '" + branch.name + "' basket at entry " + std::to_string(basketFirst) +
              ": count buffer sums to " + std::to_string(serialCounts.totalElements()) +
              " but the basket holds " + std::to_string(serialized.elementCount()) + " elements");
        }

        for (; i < entries.size() && entries[i] < bounds.firstEntry + bounds.nEntries; ++i) {
          const auto entry = entries[i];
          const auto local = entry - bounds.firstEntry;
          const auto expected = encoded(reader.getEntry(EntryIndex(entry)));
          const auto fromBulk = encoded(sliceBuffer(branch, deserialized, bulkCounts, local));
          const auto fromSerialized = encoded(sliceBuffer(branch, serialized, serialCounts, local));
          if (expected != fromBulk || expected != fromSerialized) {
            report.failures.push_back(
                "branch '" + branch.name + "' entry " + std::to_string(entry) +
                ": getEntry, bulk and serialized reads disagree");
          }
          ++report.entriesChecked;
        }
      }
    } catch (const Error& e) {
      report.failures.push_back(
          "branch '" + branch.name + "' basket at entry " + std::to_string(basketFirst) + ": " +
          e.what());
    }
  }
  report.ok = report.failures.empty();
  return report;
}

} // namespace bulkio::bench
