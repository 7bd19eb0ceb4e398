"""Bucketed chromosome/position layout for variant region queries."""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from typing import Iterable

from .errors import MalformedRecordError
from .store import ObjectStore

DEFAULT_P = 100_000
CHROMOSOMES = tuple(str(i) for i in range(1, 23)) + ("X", "Y")
_BASES = re.compile(r"^[GACT]+$")
RAW_HEADER = "chrom\tpos\tref\talt\tsample_id"
VARIANT_HEADER = "chrom\tpos\tref\talt\tids"


@dataclass(frozen=True)
class VariantRecord:
    chrom: str
    pos: int
    ref: str
    alt: str
    ids: tuple[str, ...]

    def to_tsv(self) -> str:
        return f"{self.chrom}\t{self.pos}\t{self.ref}\t{self.alt}\t{','.join(self.ids)}"


def bucket_of(pos: int, p: int = DEFAULT_P) -> int:
    if p < 1:
        raise ValueError("bucket width must be >= 1")
    if pos < 0:
        raise ValueError("position must be >= 0")
    return pos // p


def variant_key(chrom: str, bucket: int, root: str = "variants") -> str:
    return f"{root}/{chrom}/{bucket}"


def manifest_key(root: str = "variants") -> str:
    return f"{root}/_manifest"


def validate_raw(record, line_no: int) -> tuple[str, int, str, str, str]:
    if len(record) != 5:
        raise MalformedRecordError(line_no, f"expected 5 fields, got {len(record)}")
    chrom, pos, ref, alt, sample = record
    chrom = str(chrom)
    if chrom not in CHROMOSOMES:
        raise MalformedRecordError(line_no, f"unknown chromosome {chrom!r}")
    try:
        pos = int(pos)
    except (TypeError, ValueError):
        raise MalformedRecordError(line_no, f"position {pos!r} is not an integer") from None
    if pos < 1:
        raise MalformedRecordError(line_no, f"position {pos} is not positive")
    for name, seq in (("ref", ref), ("alt", alt)):
        if not isinstance(seq, str) or not _BASES.match(seq):
            raise MalformedRecordError(line_no, f"{name} {seq!r} is not a G/A/C/T sequence")
    sample = str(sample)
    if not sample or any(c in sample for c in ",\t\n "):
        raise MalformedRecordError(line_no, f"bad sample id {sample!r}")
    return chrom, pos, ref, alt, sample


def parse_raw_tsv(text: str) -> list[tuple]:
    """Raw ``chrom pos ref alt sample_id`` lines; an optional header is skipped."""
    out = []
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or (n == 1 and line == RAW_HEADER):
            continue
        out.append(validate_raw(tuple(line.split("\t")), n))
    return out


def aggregate(raw: Iterable) -> list[VariantRecord]:
    """Group sample ids by (chrom, pos, ref, alt); output sorted by chrom order then pos."""
    groups: dict[tuple, set] = {}
    for n, rec in enumerate(raw, start=1):
        chrom, pos, ref, alt, sample = validate_raw(rec, n)
        groups.setdefault((chrom, pos, ref, alt), set()).add(sample)
    order = {c: i for i, c in enumerate(CHROMOSOMES)}
    keys = sorted(groups, key=lambda k: (order[k[0]], k[1], k[2], k[3]))
    return [VariantRecord(*k, tuple(sorted(groups[k]))) for k in keys]


@dataclass
class Manifest:
    p: int = DEFAULT_P
    root: str = "variants"
    buckets: dict[str, list[int]] = field(default_factory=dict)

    def keys(self) -> list[str]:
        return [variant_key(c, b, self.root) for c in CHROMOSOMES for b in self.buckets.get(c, ())]

    def __len__(self):
        return sum(len(b) for b in self.buckets.values())

    def to_tsv(self) -> bytes:
        lines = [f"p\t{self.p}"]
        lines += [f"{c}\t{b}" for c in CHROMOSOMES for b in self.buckets.get(c, ())]
        return ("\n".join(lines) + "\n").encode("utf-8")

    @classmethod
    def from_tsv(cls, blob: bytes, root: str = "variants") -> "Manifest":
        lines = blob.decode("utf-8").splitlines()
        p = int(lines[0].split("\t")[1])
        buckets: dict[str, list[int]] = {}
        for line in lines[1:]:
            c, b = line.split("\t")
            buckets.setdefault(c, []).append(int(b))
        return cls(p, root, {c: sorted(v) for c, v in buckets.items()})

    @classmethod
    def load(cls, store: ObjectStore, root: str = "variants") -> "Manifest":
        return cls.from_tsv(store.get(manifest_key(root)), root)


def encode_variants(records: Iterable[VariantRecord]) -> bytes:
    return ("\n".join([VARIANT_HEADER] + [r.to_tsv() for r in records]) + "\n").encode("utf-8")


def decode_variants(blob: bytes) -> list[VariantRecord]:
    out = []
    for line in blob.decode("utf-8").splitlines()[1:]:
        chrom, pos, ref, alt, ids = line.split("\t")
        out.append(VariantRecord(chrom, int(pos), ref, alt, tuple(ids.split(","))))
    return out


def partition_variants(raw: Iterable, p: int, store: ObjectStore, root: str = "variants") -> Manifest:
    """Aggregate raw calls and write one sorted file per non-empty (chrom, bucket).

    Files of an earlier layout under ``root`` that are no longer needed are removed.
    """
    if p < 1:
        raise ValueError("bucket width must be >= 1")
    files: dict[tuple[str, int], list[VariantRecord]] = {}
    for rec in aggregate(raw):
        files.setdefault((rec.chrom, bucket_of(rec.pos, p)), []).append(rec)
    manifest = Manifest(p, root)
    for (chrom, b) in sorted(files, key=lambda k: (CHROMOSOMES.index(k[0]), k[1])):
        manifest.buckets.setdefault(chrom, []).append(b)
    keep = set(manifest.keys())
    for old in store.list(root + "/"):
        if old not in keep and old != manifest_key(root):
            store.delete(old)
    for (chrom, b), recs in files.items():
        store.put(variant_key(chrom, b, root), encode_variants(recs))
    store.put(manifest_key(root), manifest.to_tsv())
    return manifest


def range_coverage(manifest: Manifest, chrom: str, start: int, end: int) -> list[str]:
    """Existing files whose bucket lies in [start // p, end // p]."""
    if start > end:
        raise ValueError(f"range start {start} exceeds end {end}")
    buckets = manifest.buckets.get(str(chrom), [])
    lo = bisect.bisect_left(buckets, bucket_of(max(start, 0), manifest.p))
    hi = bisect.bisect_right(buckets, bucket_of(max(end, 0), manifest.p))
    return [variant_key(str(chrom), b, manifest.root) for b in buckets[lo:hi]]


def query_range(manifest: Manifest, chrom: str, start: int, end: int, store: ObjectStore) -> list[VariantRecord]:
    out = []
    for key in range_coverage(manifest, chrom, start, end):
        out.extend(r for r in decode_variants(store.get(key)) if start <= r.pos <= end)
    return out
