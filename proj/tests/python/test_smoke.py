# Copyright (c) bulkio contributors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import numpy as np
import pytest

import bulkio


def test_scalar_columns_round_trip(tmp_path):
    path = str(tmp_path / "cols.bio")
    rng = np.random.default_rng(5)
    columns = {
        "x": rng.standard_normal(1000).astype(np.float32),
        "k": rng.integers(-50, 50, 1000, dtype=np.int64),
        "flag": rng.integers(0, 2, 1000).astype(bool),
    }
    stats = bulkio.write_columns(path, columns, basket_entries=64, codec="deflate")
    assert stats["entries"] == 1000
    assert stats["baskets_per_branch"] == 16
    for name, values in columns.items():
        got = bulkio.read_column(path, name)
        assert got.dtype == values.dtype
        np.testing.assert_array_equal(got, values)
    assert [b["name"] for b in bulkio.branches(path)] == ["x", "k", "flag"]


def test_frame_actions_agree_across_modes(tmp_path):
    path = str(tmp_path / "ramp.bio")
    bulkio.generate(path, entries=10_000, basket_entries=512)
    for mode in ("bulk", "per-entry"):
        for slots in (1, 2, 4):
            assert bulkio.count(path, mode=mode, slots=slots) == 10_000
            assert bulkio.sum(path, "x", mode=mode, slots=slots) == 49_995_000
            h = bulkio.histogram(path, "x", 10, 0, 10_000, mode=mode, slots=slots)
            assert h["bins"] == [1000] * 10
    assert bulkio.direct_sum(path, "x", slots=4) == 49_995_000


def test_array_shapes(tmp_path):
    path = str(tmp_path / "arr.bio")
    bulkio.generate(path, entries=100, type="i16", shape="fixed:3", basket_entries=7)
    fixed = bulkio.read_column(path, "x")
    assert fixed.shape == (100, 3)
    np.testing.assert_array_equal(fixed.ravel(), np.arange(300, dtype=np.int16))

    bulkio.generate(path, entries=100, type="f64", shape="var", basket_entries=7)
    values, counts = bulkio.read_column(path, "x")
    np.testing.assert_array_equal(counts, np.arange(100) % 4)
    assert len(values) == counts.sum()


def test_benchmark_and_verify(tmp_path):
    path = str(tmp_path / "bench.bio")
    bulkio.generate(path, entries=5000, basket_entries=256, codec="deflate")
    records = bulkio.run(path, repeat=2)
    assert [r["scenario"] for r in records[::2]] == bulkio.scenarios()
    assert {r["checksum"] for r in records} == {5000 * 4999 / 2}
    report = bulkio.verify(path)
    assert report["ok"] and report["exhaustive"]
    assert report["entries_checked"] == 5000


def test_errors(tmp_path):
    with pytest.raises(bulkio.BulkIOError) as info:
        bulkio.read_column(str(tmp_path / "missing.bio"), "x")
    assert info.value.code == "IoError"

    path = str(tmp_path / "e.bio")
    bulkio.generate(path, entries=10)
    with pytest.raises(bulkio.BulkIOError) as info:
        bulkio.read_column(path, "nope")
    assert info.value.code == "UnknownBranch"
    with pytest.raises(ValueError):
        bulkio.generate(path, entries=10, codec="lz4")
    with pytest.raises(bulkio.BulkIOError) as info:
        bulkio.generate(path, entries=0)
    assert info.value.code == "EmptyBenchmark"
