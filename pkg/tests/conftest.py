import datetime as dt

import pytest

from lakecover.index import build_index
from lakecover.lake import Lake, LakeFile, StoredTable
from lakecover.model import Kind, TableSchema
from lakecover.store import ObjectStore

METRICS_SCHEMA = TableSchema.of(("date", Kind.DATE), ("metric", Kind.TEXT), ("val", Kind.INT))

D = dt.date.fromisoformat
METRIC_FILES = {
    "file201": [(D("2020-02-10"), "cpu", 47), (D("2020-02-14"), "cpu", 58), (D("2020-02-18"), "memory", 11)],
    "file170": [(D("2020-02-16"), "memory", 8), (D("2020-02-20"), "cpu", 88), (D("2020-02-21"), "cpu", 66)],
    "file051": [(D("2020-03-13"), "memory", 6), (D("2020-03-22"), "cpu", 92), (D("2020-03-28"), "cpu", 71)],
}
# per-column index file sizes of the worked example
METRIC_CHUNKS = {"val": [4, 5], "date": [5, 4]}


def key(name: str) -> str:
    return f"data/metrics/{name}"


def rec(n: int) -> tuple[str, int]:
    """Global 1-based record number of the sample table -> (file key, ordinal)."""
    name = list(METRIC_FILES)[(n - 1) // 3]
    return key(name), (n - 1) % 3


def metrics_lake() -> Lake:
    return Lake("metrics", METRICS_SCHEMA, [LakeFile(k, tuple(v)) for k, v in METRIC_FILES.items()])


@pytest.fixture
def metrics():
    store = ObjectStore()
    lake = metrics_lake()
    table = StoredTable.publish(lake, store)
    root = build_index(lake, ["val", "date"], store, chunk_sizes=METRIC_CHUNKS)
    store.reset_reads()
    return store, table, root


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
