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

"""Columnar event files with per-basket bulk reads."""

from ._bulkio import (
    BulkIOError,
    branches,
    count,
    direct_sum,
    generate,
    histogram,
    read_column,
    run,
    scenarios,
    sum,
    verify,
    write_columns,
)

__all__ = [
    "BulkIOError",
    "branches",
    "count",
    "direct_sum",
    "generate",
    "histogram",
    "read_column",
    "run",
    "scenarios",
    "sum",
    "verify",
    "write_columns",
]
