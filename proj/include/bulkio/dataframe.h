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
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "bulkio/reader.h"

namespace bulkio {

enum class SourceMode {
  // Every value is fetched with BranchReader::getEntry.
  kPerEntry,
  // Values are decoded from serialized basket buffers refilled per basket.
  kBulk,
};

/// Type of a column as seen by frame callables: an element, or an array of
/// elements (std::vector<T>).
struct ColumnType {
  ElementType element = ElementType::kF32;
  bool isArray = false;

  bool operator==(const ColumnType&) const = default;
};

struct ColumnInfo {
  std::string name;
  ElementType element;
  BranchShape shape;

  ColumnType type() const {
    return {element, !shape.isScalar()};
  }
};

struct EntryRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  bool operator==(const EntryRange&) const = default;
};

/// Supplies the current entry's value of one column. `value()` points at a
/// T (scalar columns) or std::vector<T> (array columns) owned by the reader.
class ColumnReader {
 public:
  virtual ~ColumnReader() = default;
  virtual void load(std::uint64_t entry) = 0;
  virtual const void* value() const = 0;
};

struct Histogram {
  double lo = 0;
  double hi = 1;
  std::vector<std::uint64_t> bins;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  Histogram() = default;
  Histogram(std::size_t nBins, double lo, double hi);

  /// Values in [lo, hi) land in bin floor((x - lo) * nBins / (hi - lo)).
  void fill(double x);
  void merge(const Histogram& other);
  std::uint64_t entries() const;

  bool operator==(const Histogram&) const = default;
};

/// Column-reading seam under the frame. Entries are split into one range
/// per slot, aligned to basket boundaries; each slot opens its own readers,
/// so slots share no mutable state.
class DataSource {
 public:
  static std::shared_ptr<DataSource> make(
      const std::string& path,
      const std::string& tree,
      SourceMode mode,
      std::size_t nSlots = 1);

  SourceMode mode() const {
    return mode_;
  }
  std::size_t slotCount() const {
    return ranges_.size();
  }
  const std::vector<EntryRange>& ranges() const {
    return ranges_;
  }
  const std::vector<ColumnInfo>& columns() const {
    return columns_;
  }
  std::uint64_t nEntries() const {
    return file_->nEntries();
  }
  const std::shared_ptr<const BulkFile>& file() const {
    return file_;
  }

  /// Column index; raises UnknownColumn.
  std::size_t columnIndex(std::string_view name) const;

  /// A fresh reader for `column`, private to the caller's slot.
  std::unique_ptr<ColumnReader> openColumn(std::size_t column) const;

  /// Calls `visit` once per basket of `slot`'s range with the basket loaded
  /// in serialized form (counts filled for VarArray columns). Direct
  /// reductions loop over these buffers without per-event dispatch.
  void forEachBasket(
      std::size_t slot,
      std::size_t column,
      const std::function<void(const BulkBuffer&, const CountBuffer&)>& visit) const;

  /// Runs slots on separate threads when enabled (default: one thread).
  void setParallel(bool parallel) {
    parallel_ = parallel;
  }
  /// Runs fn(slot) for every slot, in parallel if enabled.
  void runSlots(const std::function<void(std::size_t)>& fn) const;

  DataSource(std::shared_ptr<const BulkFile> file, SourceMode mode, std::size_t nSlots);

 private:
  std::shared_ptr<const BulkFile> file_;
  SourceMode mode_;
  std::vector<ColumnInfo> columns_;
  std::vector<EntryRange> ranges_;
  bool parallel_ = false;
};

namespace detail {

template <typename T>
struct ColumnTypeOf;

template <Element T>
struct ColumnTypeOf<T> {
  static constexpr ColumnType kValue{kElementTypeOf<T>, false};
};

template <Element T>
struct ColumnTypeOf<std::vector<T>> {
  static constexpr ColumnType kValue{kElementTypeOf<T>, true};
};

template <typename F>
struct CallableTraits : CallableTraits<decltype(&F::operator())> {};

template <typename C, typename R, typename... A>
struct CallableTraits<R (C::*)(A...) const> {
  using Result = R;
  using Args = std::tuple<std::remove_cvref_t<A>...>;
};

template <typename C, typename R, typename... A>
struct CallableTraits<R (C::*)(A...)> : CallableTraits<R (C::*)(A...) const> {};

template <typename R, typename... A>
struct CallableTraits<R (*)(A...)> {
  using Result = R;
  using Args = std::tuple<std::remove_cvref_t<A>...>;
};

using Args = const void* const*;

template <typename F, typename... A, std::size_t... I>
decltype(auto) invokeWithArgs(F& f, Args args, std::index_sequence<I...>) {
  return f(*static_cast<const A*>(args[I])...);
}

template <typename... A>
std::vector<ColumnType> columnTypes(std::type_identity<std::tuple<A...>>) {
  return {ColumnTypeOf<A>::kValue...};
}

struct Plan;

} // namespace detail

/// Lazily composed analysis over a DataSource. Filters and defines only
/// record work; count/sum/histogram run the event loop.
///
///   Frame f(source);
///   auto n = f.filter({"x"}, [](float x) { return x > 0.5f; }).count();
class Frame {
 public:
  explicit Frame(std::shared_ptr<DataSource> source);

  /// Keeps entries for which `predicate(columns...)` is true. Argument
  /// types are taken from the callable and checked against the columns.
  template <typename F>
  Frame filter(std::vector<std::string> columns, F predicate) const {
    using Traits = detail::CallableTraits<std::decay_t<F>>;
    using ArgTuple = typename Traits::Args;
    auto types = detail::columnTypes(std::type_identity<ArgTuple>{});
    auto fn = [predicate](detail::Args args) mutable -> bool {
      return invokeFilter(predicate, args, std::type_identity<ArgTuple>{});
    };
    return addFilter(std::move(columns), std::move(types), std::move(fn));
  }

  /// Adds column `name` computed as `expression(columns...)`. The result
  /// type must be an element type or std::vector of one.
  template <typename F>
  Frame define(std::string name, std::vector<std::string> columns, F expression) const {
    using Traits = detail::CallableTraits<std::decay_t<F>>;
    using ArgTuple = typename Traits::Args;
    using Result = std::remove_cvref_t<typename Traits::Result>;
    auto types = detail::columnTypes(std::type_identity<ArgTuple>{});
    auto fn = [expression](detail::Args args, void* out) mutable {
      *static_cast<Result*>(out) = invokeDefine(expression, args, std::type_identity<ArgTuple>{});
    };
    auto storage = [] { return std::shared_ptr<void>(std::make_shared<Result>()); };
    return addDefine(
        std::move(name),
        detail::ColumnTypeOf<Result>::kValue,
        std::move(columns),
        std::move(types),
        std::move(fn),
        std::move(storage));
  }

  std::uint64_t count() const;
  /// F64 sum of a scalar numeric column, accumulated per slot and combined
  /// in slot order.
  double sum(std::string_view column) const;
  Histogram histogram(std::string_view column, std::size_t bins, double lo, double hi) const;

  const DataSource& source() const;

 private:
  template <typename F, typename... A>
  static bool invokeFilter(F& f, detail::Args args, std::type_identity<std::tuple<A...>>) {
    return detail::invokeWithArgs<F, A...>(f, args, std::index_sequence_for<A...>{});
  }
  template <typename F, typename... A>
  static decltype(auto) invokeDefine(F& f, detail::Args args, std::type_identity<std::tuple<A...>>) {
    return detail::invokeWithArgs<F, A...>(f, args, std::index_sequence_for<A...>{});
  }

  Frame addFilter(
      std::vector<std::string> columns,
      std::vector<ColumnType> types,
      std::function<bool(detail::Args)> predicate) const;
  Frame addDefine(
      std::string name,
      ColumnType type,
      std::vector<std::string> columns,
      std::vector<ColumnType> types,
      std::function<void(detail::Args, void*)> compute,
      std::function<std::shared_ptr<void>()> storage) const;

  explicit Frame(std::shared_ptr<const detail::Plan> plan);

  std::shared_ptr<const detail::Plan> plan_;
};

// Reductions that loop over the source's basket buffers directly, with no
// frame nodes and no per-event virtual calls. They always read in bulk,
// whatever the source mode.

std::uint64_t directCount(const DataSource& source);
/// Sum of a scalar numeric column.
double directSum(const DataSource& source, std::string_view column);
/// Sum of every element of a column of any shape (bool counts as 0/1).
double directSumElements(const DataSource& source, std::string_view column);
Histogram directHistogram(
    const DataSource& source,
    std::string_view column,
    std::size_t bins,
    double lo,
    double hi);

/// Number of entries of scalar column `column` satisfying `predicate`.
template <Element T, typename Pred>
std::uint64_t directCountIf(const DataSource& source, std::string_view column, Pred predicate) {
  const auto index = source.columnIndex(column);
  const auto& info = source.columns()[index];
  if (info.type() != ColumnType{kElementTypeOf<T>, false}) {
    fail(ErrorCode::kTypeMismatch, "column '" + info.name + "' is not a scalar " + std::string(elementTypeName(kElementTypeOf<T>)));
  }
  std::vector<std::uint64_t> perSlot(source.slotCount(), 0);
  source.runSlots([&](std::size_t slot) {
    std::uint64_t n = 0;
    source.forEachBasket(slot, index, [&](const BulkBuffer& buf, const CountBuffer&) {
      const auto* data = buf.data();
      const auto elements = buf.elementCount();
      for (std::uint64_t i = 0; i < elements; ++i) {
        n += predicate(loadBigEndian<T>(data + i * sizeof(T))) ? 1 : 0;
      }
    });
    perSlot[slot] = n;
  });
  std::uint64_t total = 0;
  for (auto n : perSlot) {
    total += n;
  }
  return total;
}

} // namespace bulkio
