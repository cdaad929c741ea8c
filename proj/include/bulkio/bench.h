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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bulkio/format.h"
#include "bulkio/writer.h"

namespace bulkio::bench {

/// The read paths being compared. All compute the same F64 sum.
enum class Scenario {
  kGetEntry,     // BranchReader::getEntry per entry
  kBulk,         // getBulkEntries + native indexing
  kReader,       // TreeReader (plain iterator over getEntry)
  kFastReader,   // FastTreeReader (serialized baskets, decode on deref)
  kRdfStandard,  // Frame over a per-entry DataSource
  kRdfBulk,      // Frame over a bulk DataSource
  kRdsBulk,      // direct reduction over the DataSource's basket buffers
};

inline constexpr Scenario kAllScenarios[] = {
    Scenario::kGetEntry,
    Scenario::kBulk,
    Scenario::kReader,
    Scenario::kFastReader,
    Scenario::kRdfStandard,
    Scenario::kRdfBulk,
    Scenario::kRdsBulk,
};

std::string_view scenarioName(Scenario scenario);
std::string_view scenarioDescription(Scenario scenario);
std::optional<Scenario> parseScenario(std::string_view name);

inline constexpr const char* kBranchName = "x";
inline constexpr std::uint64_t kDefaultEntries = 10'000'000;

struct GenerateOptions {
  std::uint64_t entries = kDefaultEntries;
  ElementType type = ElementType::kF32;
  BranchShape::Kind shape = BranchShape::Kind::kScalar;
  std::uint64_t fixedLength = 1;
  std::uint64_t basketEntries = kDefaultBasketEntries;
  Codec codec = Codec::kNone;
  std::string output;
};

/// Parses "scalar", "fixed:K" or "var" into opts.shape/opts.fixedLength.
bool parseShape(std::string_view text, GenerateOptions& opts);

/// Value of flat element `i` in generated files: a ramp wrapped to stay
/// exactly representable in the element type (2^24 for f32), 0/1 for bool.
double rampValue(ElementType type, std::uint64_t i);

/// Elements in event `entry` of a generated var-array file.
inline std::uint32_t varLength(std::uint64_t entry) {
  return static_cast<std::uint32_t>(entry % 4);
}

/// Writes one branch "x" (plus "x.count" for var arrays) of ramp data.
/// Raises EmptyBenchmark for zero entries.
WriteStats generate(const GenerateOptions& opts);

struct BenchRecord {
  Scenario scenario = Scenario::kGetEntry;
  std::uint64_t entries = 0;
  std::uint64_t basketEntries = 0;
  Codec codec = Codec::kNone;
  std::uint32_t repeat = 0;
  double wallSeconds = 0;
  double eventsPerSecond = 0;
  double checksum = 0;

  // The first repetition runs against whatever the page cache holds.
  bool coldCache() const {
    return repeat == 0;
  }
};

/// One timed pass: opens fresh readers, sums every element of branch "x".
BenchRecord runOnce(const std::string& file, Scenario scenario, std::uint32_t repeat);

/// `repeat` passes of every scenario (scenario-major order). Raises
/// BenchmarkIntegrityError if any two checksums differ.
std::vector<BenchRecord> run(
    const std::string& file,
    const std::vector<Scenario>& scenarios,
    std::uint32_t repeat);

/// Median wall time of `scenario` among `records`.
double medianWallSeconds(const std::vector<BenchRecord>& records, Scenario scenario);

inline constexpr const char* kCsvHeader =
    "scenario,entries,basket_entries,codec,repeat,wall_seconds,events_per_second,checksum";

/// CSV text; raises NoRecords when empty.
std::string formatCsv(const std::vector<BenchRecord>& records);
void report(const std::vector<BenchRecord>& records, const std::string& path);

struct VerifyReport {
  bool ok = true;
  bool exhaustive = true;
  std::uint64_t entriesChecked = 0;
  std::uint64_t basketsChecked = 0;
  std::vector<std::string> failures;
};

/// Cross-checks getEntry, getBulkEntries and getEntriesSerialized on every
/// branch: all entries for files of at most `exhaustiveLimit` entries,
/// otherwise `samples` random entries. Serialized payloads are also
/// compared with an independent decompression of the raw basket bytes.
VerifyReport verify(
    const std::string& file,
    std::uint64_t exhaustiveLimit = 100'000,
    std::uint64_t samples = 10'000);

} // namespace bulkio::bench
