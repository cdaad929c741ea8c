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

#include "bulkio/dataframe.h"

#include <cmath>
#include <exception>
#include <thread>

#include "bulkio/error.h"

namespace bulkio {

namespace detail {

struct DefinedColumn {
  std::string name;
  ColumnType type;
  std::function<std::shared_ptr<void>()> storage;
};

struct ColumnRef {
  bool isDefine = false;
  std::size_t index = 0;
};

struct Step {
  bool isFilter = false;
  std::vector<ColumnRef> inputs;
  std::function<bool(Args)> predicate;
  std::function<void(Args, void*)> compute;
  std::size_t defineIndex = 0;
};

struct Plan {
  std::shared_ptr<DataSource> source;
  std::vector<DefinedColumn> defines;
  std::vector<Step> steps;
};

} // namespace detail

namespace {

using detail::ColumnRef;
using detail::Plan;

std::string describe(ColumnType type) {
  auto name = std::string(elementTypeName(type.element));
  return type.isArray ? "array<" + name + ">" : name;
}

template <Element T>
class PerEntryScalarReader final : public ColumnReader {
 public:
  PerEntryScalarReader(std::shared_ptr<const BulkFile> file, std::size_t branch)
      : reader_(std::move(file), branch) {}

  void load(std::uint64_t entry) override {
    value_ = std::get<T>(std::get<Scalar>(reader_.getEntry(EntryIndex(entry))));
  }
  const void* value() const override {
    return &value_;
  }

 private:
  BranchReader reader_;
  T value_{};
};

template <Element T>
class PerEntryArrayReader final : public ColumnReader {
 public:
  PerEntryArrayReader(std::shared_ptr<const BulkFile> file, std::size_t branch)
      : reader_(std::move(file), branch) {}

  void load(std::uint64_t entry) override {
    auto value = reader_.getEntry(EntryIndex(entry));
    const auto& elements = std::get<std::vector<Scalar>>(value);
    value_.clear();
    for (const auto& e : elements) {
      value_.push_back(std::get<T>(e));
    }
  }
  const void* value() const override {
    return &value_;
  }

 private:
  BranchReader reader_;
  std::vector<T> value_;
};

template <Element T>
class BulkColumnReader final : public ColumnReader {
 public:
  BulkColumnReader(std::shared_ptr<const BulkFile> file, std::size_t branch, bool isArray)
      : reader_(std::move(file), branch),
        isArray_(isArray),
        isVar_(reader_.descriptor().shape.isVarArray()),
        fixedLength_(reader_.descriptor().shape.fixedLength()) {}

  void load(std::uint64_t entry) override {
    if (entry < first_ || entry >= end_) [[unlikely]] {
      first_ = reader_.basketBounds(EntryIndex(entry)).firstEntry;
      end_ = first_ +
          reader_.getEntriesSerialized(EntryIndex(first_), buffer_, isVar_ ? &counts_ : nullptr);
    }
    const auto local = entry - first_;
    const auto* data = buffer_.data();
    if (!isArray_) {
      scalar_ = loadBigEndian<T>(data + local * sizeof(T));
      return;
    }
    std::uint64_t begin = local * fixedLength_;
    std::uint64_t size = fixedLength_;
    if (isVar_) {
      begin = counts_.offsets[local];
      size = counts_.counts[local];
    }
    array_.resize(size);
    for (std::uint64_t i = 0; i < size; ++i) {
      array_[i] = loadBigEndian<T>(data + (begin + i) * sizeof(T));
    }
  }
  const void* value() const override {
    return isArray_ ? static_cast<const void*>(&array_) : static_cast<const void*>(&scalar_);
  }

 private:
  BranchReader reader_;
  BulkBuffer buffer_;
  CountBuffer counts_;
  bool isArray_;
  bool isVar_;
  std::uint64_t fixedLength_;
  std::uint64_t first_ = 1;
  std::uint64_t end_ = 0;
  T scalar_{};
  std::vector<T> array_;
};

using ToDouble = double (*)(const void*);

ToDouble numericGetter(ColumnType type, const std::string& name) {
  if (type.isArray || type.element == ElementType::kBool) {
    fail(ErrorCode::kTypeMismatch, "column '" + name + "' (" + describe(type) + ") is not a numeric scalar");
  }
  return visitElementType(type.element, []<typename T>(std::type_identity<T>) -> ToDouble {
    return [](const void* p) { return static_cast<double>(*static_cast<const T*>(p)); };
  });
}

// Resolves `name` against the plan's defines (latest first), then the
// source catalog.
ColumnRef resolve(const Plan& plan, std::string_view name, ColumnType* type) {
  for (std::size_t i = plan.defines.size(); i-- > 0;) {
    if (plan.defines[i].name == name) {
      if (type) {
        *type = plan.defines[i].type;
      }
      return {true, i};
    }
  }
  const auto index = plan.source->columnIndex(name);
  if (type) {
    *type = plan.source->columns()[index].type();
  }
  return {false, index};
}

std::vector<ColumnRef> resolveInputs(
    const Plan& plan,
    const std::vector<std::string>& columns,
    const std::vector<ColumnType>& types) {
  if (columns.size() != types.size()) {
    fail(
        ErrorCode::kInvalidArgument,
        "callable takes " + std::to_string(types.size()) + " arguments but " +
            std::to_string(columns.size()) + " columns were named");
  }
  std::vector<ColumnRef> refs;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    ColumnType actual;
    refs.push_back(resolve(plan, columns[i], &actual));
    if (actual != types[i]) {
      fail(
          ErrorCode::kTypeMismatch,
          "column '" + columns[i] + "' is " + describe(actual) + ", callable expects " +
              describe(types[i]));
    }
  }
  return refs;
}

// Per-slot execution state of a plan: private readers, define storage and
// argument tables.
class SlotRun {
 public:
  SlotRun(const Plan& plan, std::optional<ColumnRef> actionColumn) : plan_(plan) {
    const auto& source = *plan.source;
    readerFor_.assign(source.columns().size(), -1);
    auto need = [&](const ColumnRef& ref) {
      if (!ref.isDefine && readerFor_[ref.index] < 0) {
        readerFor_[ref.index] = static_cast<int>(readers_.size());
        readers_.push_back(source.openColumn(ref.index));
      }
    };
    for (const auto& step : plan.steps) {
      for (const auto& ref : step.inputs) {
        need(ref);
      }
    }
    if (actionColumn) {
      need(*actionColumn);
    }
    for (const auto& define : plan.defines) {
      defineStorage_.push_back(define.storage());
    }
    for (const auto& step : plan.steps) {
      std::vector<const void*> args;
      for (const auto& ref : step.inputs) {
        args.push_back(pointer(ref));
      }
      args_.push_back(std::move(args));
    }
    if (actionColumn) {
      action_ = pointer(*actionColumn);
    }
  }

  /// Loads `entry` and runs the node chain; true when every filter passed.
  bool process(std::uint64_t entry) {
    for (auto& reader : readers_) {
      reader->load(entry);
    }
    for (std::size_t s = 0; s < plan_.steps.size(); ++s) {
      const auto& step = plan_.steps[s];
      if (step.isFilter) {
        if (!step.predicate(args_[s].data())) {
          return false;
        }
      } else {
        step.compute(args_[s].data(), defineStorage_[step.defineIndex].get());
      }
    }
    return true;
  }

  const void* actionValue() const {
    return action_;
  }

 private:
  const void* pointer(const ColumnRef& ref) const {
    if (ref.isDefine) {
      return defineStorage_[ref.index].get();
    }
    return readers_[readerFor_[ref.index]]->value();
  }

  const Plan& plan_;
  std::vector<int> readerFor_;
  std::vector<std::unique_ptr<ColumnReader>> readers_;
  std::vector<std::shared_ptr<void>> defineStorage_;
  std::vector<std::vector<const void*>> args_;
  const void* action_ = nullptr;
};

template <typename OnPass>
void runLoop(const Plan& plan, std::optional<ColumnRef> actionColumn, OnPass&& onPass) {
  const auto& source = *plan.source;
  source.runSlots([&](std::size_t slot) {
    SlotRun run(plan, actionColumn);
    const auto range = source.ranges()[slot];
    for (auto entry = range.begin; entry < range.end; ++entry) {
      if (run.process(entry)) {
        onPass(slot, run.actionValue());
      }
    }
  });
}

} // namespace

Histogram::Histogram(std::size_t nBins, double lo_, double hi_) : lo(lo_), hi(hi_), bins(nBins, 0) {
  if (nBins == 0 || !(hi_ > lo_)) {
    fail(ErrorCode::kInvalidArgument, "histogram needs at least one bin and lo < hi");
  }
}

void Histogram::fill(double x) {
  if (x < lo) {
    ++underflow;
    return;
  }
  if (!(x < hi)) {
    ++overflow;
    return;
  }
  auto bin = static_cast<std::size_t>(std::floor((x - lo) * static_cast<double>(bins.size()) / (hi - lo)));
  if (bin >= bins.size()) {
    bin = bins.size() - 1;
  }
  ++bins[bin];
}

void Histogram::merge(const Histogram& other) {
  for (std::size_t i = 0; i < bins.size(); ++i) {
    bins[i] += other.bins[i];
  }
  underflow += other.underflow;
  overflow += other.overflow;
}

std::uint64_t Histogram::entries() const {
  std::uint64_t total = underflow + overflow;
  for (auto n : bins) {
    total += n;
  }
  return total;
}

DataSource::DataSource(std::shared_ptr<const BulkFile> file, SourceMode mode, std::size_t nSlots)
    : file_(std::move(file)), mode_(mode) {
  if (nSlots == 0) {
    fail(ErrorCode::kInvalidArgument, "a data source needs at least one slot");
  }
  const auto& footer = file_->footer();
  for (const auto& branch : footer.branches) {
    columns_.push_back({branch.name, branch.element, branch.shape});
  }
  std::vector<std::uint64_t> starts;
  if (!footer.branches.empty()) {
    const auto& reference = footer.branches.front().baskets;
    for (const auto& branch : footer.branches) {
      const bool aligned = std::equal(
          branch.baskets.begin(),
          branch.baskets.end(),
          reference.begin(),
          reference.end(),
          [](const BasketDescriptor& a, const BasketDescriptor& b) {
            return a.firstEntry == b.firstEntry && a.nEntries == b.nEntries;
          });
      if (!aligned) {
        fail(ErrorCode::kFormatError, "branch '" + branch.name + "' is not basket-aligned with the others");
      }
    }
    for (const auto& basket : reference) {
      starts.push_back(basket.firstEntry);
    }
  }
  starts.push_back(footer.nEntries);
  const auto nBaskets = starts.size() - 1;
  for (std::size_t s = 0; s < nSlots; ++s) {
    const auto lo = s * nBaskets / nSlots;
    const auto hi = (s + 1) * nBaskets / nSlots;
    ranges_.push_back({starts[lo], starts[hi]});
  }
}

std::shared_ptr<DataSource> DataSource::make(
    const std::string& path,
    const std::string& tree,
    SourceMode mode,
    std::size_t nSlots) {
  auto file = BulkFile::open(path);
  if (file->footer().treeName != tree) {
    fail(ErrorCode::kUnknownBranch, "file " + path + " holds tree '" + file->footer().treeName + "', not '" + tree + "'");
  }
  return std::make_shared<DataSource>(std::move(file), mode, nSlots);
}

std::size_t DataSource::columnIndex(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) {
      return i;
    }
  }
  fail(ErrorCode::kUnknownColumn, "no column named '" + std::string(name) + "'");
}

std::unique_ptr<ColumnReader> DataSource::openColumn(std::size_t column) const {
  const auto& info = columns_.at(column);
  const bool isArray = !info.shape.isScalar();
  return visitElementType(info.element, [&]<typename T>(std::type_identity<T>) -> std::unique_ptr<ColumnReader> {
    if (mode_ == SourceMode::kBulk) {
      return std::make_unique<BulkColumnReader<T>>(file_, column, isArray);
    }
    if (isArray) {
      return std::make_unique<PerEntryArrayReader<T>>(file_, column);
    }
    return std::make_unique<PerEntryScalarReader<T>>(file_, column);
  });
}

void DataSource::forEachBasket(
    std::size_t slot,
    std::size_t column,
    const std::function<void(const BulkBuffer&, const CountBuffer&)>& visit) const {
  BranchReader reader(file_, column);
  BulkBuffer buffer;
  CountBuffer counts;
  const auto range = ranges_.at(slot);
  for (auto entry = range.begin; entry < range.end;) {
    entry += reader.getEntriesSerialized(EntryIndex(entry), buffer, &counts);
    visit(buffer, counts);
  }
}

void DataSource::runSlots(const std::function<void(std::size_t)>& fn) const {
  if (!parallel_ || ranges_.size() == 1) {
    for (std::size_t s = 0; s < ranges_.size(); ++s) {
      fn(s);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(ranges_.size());
  {
    std::vector<std::jthread> threads;
    for (std::size_t s = 0; s < ranges_.size(); ++s) {
      threads.emplace_back([&, s] {
        try {
          fn(s);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      });
    }
  }
  for (auto& error : errors) {
    if (error) {
      std::rethrow_exception(error);
    }
  }
}

Frame::Frame(std::shared_ptr<DataSource> source) {
  auto plan = std::make_shared<Plan>();
  plan->source = std::move(source);
  plan_ = std::move(plan);
}

Frame::Frame(std::shared_ptr<const detail::Plan> plan) : plan_(std::move(plan)) {}

const DataSource& Frame::source() const {
  return *plan_->source;
}

Frame Frame::addFilter(
    std::vector<std::string> columns,
    std::vector<ColumnType> types,
    std::function<bool(detail::Args)> predicate) const {
  auto plan = std::make_shared<Plan>(*plan_);
  detail::Step step;
  step.isFilter = true;
  step.inputs = resolveInputs(*plan, columns, types);
  step.predicate = std::move(predicate);
  plan->steps.push_back(std::move(step));
  return Frame(std::move(plan));
}

Frame Frame::addDefine(
    std::string name,
    ColumnType type,
    std::vector<std::string> columns,
    std::vector<ColumnType> types,
    std::function<void(detail::Args, void*)> compute,
    std::function<std::shared_ptr<void>()> storage) const {
  auto plan = std::make_shared<Plan>(*plan_);
  bool exists = false;
  for (const auto& define : plan->defines) {
    exists = exists || define.name == name;
  }
  for (const auto& column : plan->source->columns()) {
    exists = exists || column.name == name;
  }
  if (exists || name.empty()) {
    fail(ErrorCode::kInvalidArgument, "cannot define column '" + name + "': name taken or empty");
  }
  detail::Step step;
  step.inputs = resolveInputs(*plan, columns, types);
  step.compute = std::move(compute);
  step.defineIndex = plan->defines.size();
  plan->defines.push_back({std::move(name), type, std::move(storage)});
  plan->steps.push_back(std::move(step));
  return Frame(std::move(plan));
}

std::uint64_t Frame::count() const {
  std::vector<std::uint64_t> perSlot(source().slotCount(), 0);
  runLoop(*plan_, std::nullopt, [&](std::size_t slot, const void*) { ++perSlot[slot]; });
  std::uint64_t total = 0;
  for (auto n : perSlot) {
    total += n;
  }
  return total;
}

double Frame::sum(std::string_view column) const {
  ColumnType type;
  const auto ref = resolve(*plan_, column, &type);
  const auto get = numericGetter(type, std::string(column));
  std::vector<double> perSlot(source().slotCount(), 0.0);
  runLoop(*plan_, ref, [&](std::size_t slot, const void* value) { perSlot[slot] += get(value); });
  double total = 0.0;
  for (auto s : perSlot) {
    total += s;
  }
  return total;
}

Histogram Frame::histogram(std::string_view column, std::size_t bins, double lo, double hi) const {
  ColumnType type;
  const auto ref = resolve(*plan_, column, &type);
  const auto get = numericGetter(type, std::string(column));
  Histogram prototype(bins, lo, hi);
  std::vector<Histogram> perSlot(source().slotCount(), prototype);
  runLoop(*plan_, ref, [&](std::size_t slot, const void* value) { perSlot[slot].fill(get(value)); });
  for (const auto& h : perSlot) {
    prototype.merge(h);
  }
  return prototype;
}

namespace {

template <typename PerBasket>
double sumOver(const DataSource& source, std::size_t column, PerBasket&& perBasket) {
  std::vector<double> perSlot(source.slotCount(), 0.0);
  source.runSlots([&](std::size_t slot) {
    double acc = 0.0;
    source.forEachBasket(slot, column, [&](const BulkBuffer& buf, const CountBuffer&) {
      acc = perBasket(buf, acc);
    });
    perSlot[slot] = acc;
  });
  double total = 0.0;
  for (auto s : perSlot) {
    total += s;
  }
  return total;
}

double sumElements(const DataSource& source, std::size_t column) {
  const auto& info = source.columns()[column];
  return visitElementType(info.element, [&]<typename T>(std::type_identity<T>) {
    return sumOver(source, column, [](const BulkBuffer& buf, double acc) {
      const auto* data = buf.data();
      const auto n = buf.elementCount();
      for (std::uint64_t i = 0; i < n; ++i) {
        acc += static_cast<double>(loadBigEndian<T>(data + i * sizeof(T)));
      }
      return acc;
    });
  });
}

} // namespace

std::uint64_t directCount(const DataSource& source) {
  std::uint64_t total = 0;
  for (const auto& range : source.ranges()) {
    total += range.end - range.begin;
  }
  return total;
}

double directSum(const DataSource& source, std::string_view column) {
  const auto index = source.columnIndex(column);
  numericGetter(source.columns()[index].type(), std::string(column));
  return sumElements(source, index);
}

double directSumElements(const DataSource& source, std::string_view column) {
  return sumElements(source, source.columnIndex(column));
}

Histogram directHistogram(
    const DataSource& source,
    std::string_view column,
    std::size_t bins,
    double lo,
    double hi) {
  const auto index = source.columnIndex(column);
  const auto& info = source.columns()[index];
  numericGetter(info.type(), info.name);
  Histogram prototype(bins, lo, hi);
  std::vector<Histogram> perSlot(source.slotCount(), prototype);
  visitElementType(info.element, [&]<typename T>(std::type_identity<T>) {
    source.runSlots([&](std::size_t slot) {
      auto& h = perSlot[slot];
      source.forEachBasket(slot, index, [&](const BulkBuffer& buf, const CountBuffer&) {
        const auto* data = buf.data();
        const auto n = buf.elementCount();
        for (std::uint64_t i = 0; i < n; ++i) {
          h.fill(static_cast<double>(loadBigEndian<T>(data + i * sizeof(T))));
        }
      });
    });
  });
  for (const auto& h : perSlot) {
    prototype.merge(h);
  }
  return prototype;
}

} // namespace bulkio
