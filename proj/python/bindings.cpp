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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "bulkio/bench.h"
#include "bulkio/dataframe.h"
#include "bulkio/error.h"
#include "bulkio/reader.h"
#include "bulkio/writer.h"

namespace py = pybind11;

namespace {

using namespace bulkio;

[[noreturn]] void usage(const std::string& message) {
  throw py::value_error(message);
}

ElementType elementOf(const py::dtype& dtype) {
  std::optional<ElementType> found;
  for (auto type : kAllElementTypes) {
    visitElementType(type, [&]<typename T>(std::type_identity<T>) {
      if (!found && dtype.is(py::dtype::of<T>())) {
        found = type;
      }
    });
  }
  if (!found) {
    for (auto type : kAllElementTypes) {
      visitElementType(type, [&]<typename T>(std::type_identity<T>) {
        if (!found && dtype.equal(py::dtype::of<T>())) {
          found = type;
        }
      });
    }
  }
  if (!found) {
    usage("unsupported dtype " + std::string(py::str(dtype)));
  }
  return *found;
}

Codec codecOf(const std::string& name) {
  const auto codec = parseCodec(name);
  if (!codec) {
    usage("unknown codec '" + name + "'");
  }
  return *codec;
}

SourceMode modeOf(const std::string& name) {
  if (name == "bulk") {
    return SourceMode::kBulk;
  }
  if (name == "per-entry") {
    return SourceMode::kPerEntry;
  }
  usage("mode must be 'bulk' or 'per-entry', not '" + name + "'");
}

py::dict statsDict(const WriteStats& stats) {
  py::dict d;
  d["entries"] = stats.nEntries;
  d["baskets"] = stats.nBaskets;
  d["baskets_per_branch"] = stats.nBasketsPerBranch;
  d["bytes"] = stats.bytesWritten;
  return d;
}

// Scalar columns only: one 1-D array per branch, all the same length.
py::dict writeColumns(
    const std::string& path,
    const py::dict& columns,
    std::uint64_t basketEntries,
    const std::string& codec,
    const std::string& tree) {
  std::vector<BranchSpec> schema;
  std::vector<py::array> arrays;
  for (const auto& [key, value] : columns) {
    auto array = py::array::ensure(value, py::array::c_style);
    if (!array || array.ndim() != 1) {
      usage("column '" + py::cast<std::string>(key) + "' must be a 1-D array");
    }
    schema.push_back(BranchSpec::scalar(py::cast<std::string>(key), elementOf(array.dtype())));
    arrays.push_back(std::move(array));
  }
  const auto n = arrays.empty() ? 0 : arrays.front().shape(0);
  for (const auto& a : arrays) {
    if (a.shape(0) != n) {
      usage("all columns must have the same length");
    }
  }
  auto writer = TreeWriter::create(path, schema, basketEntries, codecOf(codec), tree);
  std::vector<Cell> row(arrays.size());
  for (py::ssize_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < arrays.size(); ++c) {
      visitElementType(schema[c].element, [&]<typename T>(std::type_identity<T>) {
        T v;
        std::memcpy(&v, static_cast<const char*>(arrays[c].data()) + i * sizeof(T), sizeof(T));
        row[c] = Scalar{v};
      });
    }
    writer.fill(row);
  }
  return statsDict(writer.close());
}

// Whole branch through the bulk path. Scalars come back 1-D, fixed arrays
// as (entries, k), var arrays as a (values, counts) pair.
py::object readColumn(const std::string& path, const std::string& name) {
  BranchReader reader(BulkFile::open(path), name);
  const auto& desc = reader.descriptor();
  const auto n = reader.nEntries();
  return visitElementType(desc.element, [&]<typename T>(std::type_identity<T>) -> py::object {
    // std::vector<bool> has no data(); bools are stored one byte each.
    std::vector<std::conditional_t<std::is_same_v<T, bool>, std::uint8_t, T>> values;
    std::vector<std::uint32_t> counts;
    BulkBuffer buf;
    CountBuffer basketCounts;
    for (std::uint64_t first = 0; first < n;) {
      const auto got = reader.getBulkEntries(EntryIndex(first), buf, &basketCounts);
      const auto view = buf.view<T>();
      values.insert(values.end(), view.begin(), view.end());
      if (desc.shape.isVarArray()) {
        counts.insert(counts.end(), basketCounts.counts.begin(), basketCounts.counts.end());
      }
      first += got;
    }
    py::array_t<T> out(static_cast<py::ssize_t>(values.size()));
    if (!values.empty()) {
      std::memcpy(out.mutable_data(), values.data(), values.size() * sizeof(T));
    }
    if (desc.shape.isVarArray()) {
      return py::make_tuple(out, py::array_t<std::uint32_t>(counts.size(), counts.data()));
    }
    if (desc.shape.kind == BranchShape::Kind::kFixedArray) {
      const auto k = static_cast<py::ssize_t>(desc.shape.parameter);
      return out.reshape(std::vector<py::ssize_t>{static_cast<py::ssize_t>(n), k});
    }
    return out;
  });
}

py::list branches(const std::string& path) {
  py::list out;
  for (const auto& b : readFooter(path).branches) {
    py::dict d;
    d["name"] = b.name;
    d["type"] = std::string(elementTypeName(b.element));
    d["shape"] = b.shape.isScalar() ? "scalar" : b.shape.isVarArray() ? "var" : "fixed:" + std::to_string(b.shape.parameter);
    d["baskets"] = b.baskets.size();
    out.append(d);
  }
  return out;
}

py::dict generate(
    const std::string& path,
    std::uint64_t entries,
    const std::string& type,
    const std::string& shape,
    std::uint64_t basketEntries,
    const std::string& codec) {
  bench::GenerateOptions opts;
  opts.entries = entries;
  const auto element = parseElementType(type);
  if (!element) {
    usage("unknown element type '" + type + "'");
  }
  opts.type = *element;
  if (!bench::parseShape(shape, opts)) {
    usage("shape must be scalar, fixed:K or var, not '" + shape + "'");
  }
  opts.basketEntries = basketEntries;
  opts.codec = codecOf(codec);
  opts.output = path;
  return statsDict(bench::generate(opts));
}

py::list run(const std::string& path, const std::optional<std::vector<std::string>>& names, std::uint32_t repeat) {
  std::vector<bench::Scenario> scenarios;
  if (!names) {
    scenarios.assign(std::begin(bench::kAllScenarios), std::end(bench::kAllScenarios));
  } else {
    for (const auto& name : *names) {
      const auto s = bench::parseScenario(name);
      if (!s) {
        usage("unknown scenario '" + name + "'");
      }
      scenarios.push_back(*s);
    }
  }
  py::list out;
  for (const auto& r : bench::run(path, scenarios, repeat)) {
    py::dict d;
    d["scenario"] = std::string(bench::scenarioName(r.scenario));
    d["entries"] = r.entries;
    d["basket_entries"] = r.basketEntries;
    d["codec"] = std::string(codecName(r.codec));
    d["repeat"] = r.repeat;
    d["wall_seconds"] = r.wallSeconds;
    d["events_per_second"] = r.eventsPerSecond;
    d["checksum"] = r.checksum;
    out.append(d);
  }
  return out;
}

py::dict verify(const std::string& path) {
  const auto report = bench::verify(path);
  py::dict d;
  d["ok"] = report.ok;
  d["exhaustive"] = report.exhaustive;
  d["entries_checked"] = report.entriesChecked;
  d["baskets_checked"] = report.basketsChecked;
  d["failures"] = report.failures;
  return d;
}

std::shared_ptr<DataSource> sourceOf(const std::string& path, const std::string& mode, std::size_t slots) {
  return DataSource::make(path, kDefaultTreeName, modeOf(mode), slots);
}

} // namespace

PYBIND11_MODULE(_bulkio, m) {
  m.doc() = "Columnar event files with per-basket bulk reads.";

  static py::exception<Error> error(m, "BulkIOError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) {
        std::rethrow_exception(p);
      }
    } catch (const Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      instance.attr("code") = std::string(errorCodeName(e.code()));
      PyErr_SetObject(error.ptr(), instance.ptr());
    }
  });

  m.def("write_columns", &writeColumns, py::arg("path"), py::arg("columns"),
        py::arg("basket_entries") = kDefaultBasketEntries, py::arg("codec") = "none",
        py::arg("tree") = kDefaultTreeName,
        "Write 1-D numpy arrays as scalar branches, one entry per row.");
  m.def("read_column", &readColumn, py::arg("path"), py::arg("name"),
        "Read a whole branch with bulk basket reads.");
  m.def("branches", &branches, py::arg("path"));
  m.def("generate", &generate, py::arg("path"), py::arg("entries") = bench::kDefaultEntries,
        py::arg("type") = "f32", py::arg("shape") = "scalar",
        py::arg("basket_entries") = kDefaultBasketEntries, py::arg("codec") = "none");
  m.def("run", &run, py::arg("path"), py::arg("scenarios") = std::nullopt, py::arg("repeat") = 3);
  m.def("verify", &verify, py::arg("path"));
  m.def("scenarios", [] {
    std::vector<std::string> out;
    for (auto s : bench::kAllScenarios) {
      out.emplace_back(bench::scenarioName(s));
    }
    return out;
  });

  m.def("count", [](const std::string& path, const std::string& mode, std::size_t slots) {
    return Frame(sourceOf(path, mode, slots)).count();
  }, py::arg("path"), py::arg("mode") = "bulk", py::arg("slots") = 1);
  m.def("sum", [](const std::string& path, const std::string& column, const std::string& mode, std::size_t slots) {
    return Frame(sourceOf(path, mode, slots)).sum(column);
  }, py::arg("path"), py::arg("column"), py::arg("mode") = "bulk", py::arg("slots") = 1);
  m.def("histogram", [](const std::string& path, const std::string& column, std::size_t bins, double lo, double hi,
                        const std::string& mode, std::size_t slots) {
    const auto h = Frame(sourceOf(path, mode, slots)).histogram(column, bins, lo, hi);
    py::dict d;
    d["bins"] = h.bins;
    d["underflow"] = h.underflow;
    d["overflow"] = h.overflow;
    return d;
  }, py::arg("path"), py::arg("column"), py::arg("bins"), py::arg("lo"), py::arg("hi"),
     py::arg("mode") = "bulk", py::arg("slots") = 1);
  m.def("direct_sum", [](const std::string& path, const std::string& column, std::size_t slots) {
    return directSum(*sourceOf(path, "bulk", slots), column);
  }, py::arg("path"), py::arg("column"), py::arg("slots") = 1);
}
