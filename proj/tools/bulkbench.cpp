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

// bulkbench: generate benchmark files, time the read paths, verify files.
//
//   bulkbench generate --entries N --type f32 --shape scalar|fixed:K|var
//                      --basket-entries B --codec none|deflate --out PATH
//   bulkbench run --file PATH --scenario S[,S...] --repeat R --csv PATH
//   bulkbench verify --file PATH
//
// Exit status: 0 success, 1 verification/integrity failure, 2 usage error.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bulkio/bench.h"
#include "bulkio/error.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

using namespace bulkio;

struct UsageError {
  std::string message;
};

std::vector<bench::Scenario> parseScenarios(const std::string& text) {
  std::vector<bench::Scenario> out;
  if (text.empty() || text == "all") {
    return {std::begin(bench::kAllScenarios), std::end(bench::kAllScenarios)};
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto scenario = bench::parseScenario(item);
    if (!scenario) {
      throw UsageError{"unknown scenario '" + item + "'"};
    }
    out.push_back(*scenario);
  }
  return out;
}

int cmdGenerate(
    std::uint64_t entries,
    const std::string& type,
    const std::string& shape,
    std::uint64_t basketEntries,
    const std::string& codec,
    const std::string& out) {
  bench::GenerateOptions opts;
  opts.entries = entries;
  opts.basketEntries = basketEntries;
  opts.output = out;
  auto parsedType = parseElementType(type);
  if (!parsedType) {
    throw UsageError{"unknown element type '" + type + "'"};
  }
  opts.type = *parsedType;
  if (!bench::parseShape(shape, opts)) {
    throw UsageError{"bad shape '" + shape + "' (scalar, fixed:K or var)"};
  }
  auto parsedCodec = parseCodec(codec);
  if (!parsedCodec) {
    throw UsageError{"unknown codec '" + codec + "'"};
  }
  opts.codec = *parsedCodec;
  if (entries == 0) {
    throw UsageError{"EmptyBenchmark: --entries must be at least 1"};
  }
  if (basketEntries == 0) {
    throw UsageError{"--basket-entries must be at least 1"};
  }
  const auto stats = bench::generate(opts);
  std::printf(
      "wrote %s: %llu entries, %llu baskets per branch, %llu bytes\n",
      out.c_str(),
      static_cast<unsigned long long>(stats.nEntries),
      static_cast<unsigned long long>(stats.nBasketsPerBranch),
      static_cast<unsigned long long>(stats.bytesWritten));
  return 0;
}

int cmdRun(
    const std::string& file,
    const std::string& scenarios,
    std::uint32_t repeat,
    const std::string& csv) {
  if (repeat == 0) {
    throw UsageError{"--repeat must be at least 1"};
  }
  const auto selected = parseScenarios(scenarios);
  const auto records = bench::run(file, selected, repeat);
  if (csv.empty()) {
    std::cout << bench::formatCsv(records);
  } else {
    bench::report(records, csv);
  }
  std::fprintf(stderr, "%-13s %12s %14s %10s\n", "scenario", "median_s", "events/s", "cold_s");
  for (const auto scenario : selected) {
    const double median = bench::medianWallSeconds(records, scenario);
    double cold = 0;
    for (const auto& r : records) {
      if (r.scenario == scenario && r.coldCache()) {
        cold = r.wallSeconds;
      }
    }
    std::fprintf(
        stderr,
        "%-13s %12.6f %14.4g %10.6f\n",
        std::string(bench::scenarioName(scenario)).c_str(),
        median,
        static_cast<double>(records.front().entries) / median,
        cold);
  }
  std::fprintf(stderr, "checksum %.17g\n", records.front().checksum);
  return 0;
}

int cmdVerify(const std::string& file) {
  const auto result = bench::verify(file);
  for (const auto& failure : result.failures) {
    std::printf("FAIL %s\n", failure.c_str());
  }
  std::printf(
      "%s: %llu entries in %llu baskets checked (%s)\n",
      result.ok ? "PASS" : "FAIL",
      static_cast<unsigned long long>(result.entriesChecked),
      static_cast<unsigned long long>(result.basketsChecked),
      result.exhaustive ? "exhaustive" : "sampled");
  return result.ok ? 0 : kExitFailure;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bulk read-path benchmark for bulkio files"};
  app.require_subcommand(1);

  std::uint64_t entries = bench::kDefaultEntries;
  std::string type = "f32";
  std::string shape = "scalar";
  std::uint64_t basketEntries = kDefaultBasketEntries;
  std::string codec = "none";
  std::string out;
  auto* generate = app.add_subcommand("generate", "write a ramp-data benchmark file");
  generate->add_option("--entries", entries, "number of entries")->capture_default_str();
  generate->add_option("--type", type, "element type (i8..u64, f32, f64, bool)")->capture_default_str();
  generate->add_option("--shape", shape, "scalar, fixed:K or var")->capture_default_str();
  generate->add_option("--basket-entries", basketEntries, "entries per basket")->capture_default_str();
  generate->add_option("--codec", codec, "none or deflate")->capture_default_str();
  generate->add_option("--out", out, "output path")->required();

  std::string file;
  std::string scenarios = "all";
  std::uint32_t repeat = 3;
  std::string csv;
  auto* run = app.add_subcommand("run", "time read scenarios over a file");
  run->add_option("--file", file, "input file")->required();
  run->add_option("--scenario", scenarios, "comma-separated scenarios or 'all'")->capture_default_str();
  run->add_option("--repeat", repeat, "repetitions per scenario")->capture_default_str();
  run->add_option("--csv", csv, "CSV output path (stdout when omitted)");

  std::string verifyFile;
  auto* verify = app.add_subcommand("verify", "cross-check the read paths on a file");
  verify->add_option("--file", verifyFile, "input file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (generate->parsed()) {
      return cmdGenerate(entries, type, shape, basketEntries, codec, out);
    }
    if (run->parsed()) {
      return cmdRun(file, scenarios, repeat, csv);
    }
    return cmdVerify(verifyFile);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "bulkbench: %s\n", e.message.c_str());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bulkbench: %s\n", e.what());
    return kExitFailure;
  }
}
