"""Command-line entry point: gen, index, run, genomic-etl, genomic-query."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import bench, genomic
from .errors import CorrectnessError, LakeError
from .index import build_index
from .lake import StoredTable
from .store import ObjectStore

log = logging.getLogger("lakecover")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_bench_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config value (repeatable)")
    for f in dataclasses.fields(bench.BenchConfig):
        p.add_argument("--" + f.name.replace("_", "-"), dest="cfg_" + f.name, default=None)


def _store(args) -> ObjectStore:
    return ObjectStore.from_env(args.store, args.latency_us)


def _config(args, store: ObjectStore | None) -> bench.BenchConfig:
    values: dict = {}
    table = getattr(args, "cfg_table", None) or "t"
    if store is not None and store.exists(bench.config_key(table)):
        values.update(bench.parse_config_text(store.get(bench.config_key(table)).decode("utf-8")))
    if args.config:
        values.update(bench.load_config(args.config))
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    for f in dataclasses.fields(bench.BenchConfig):
        v = getattr(args, "cfg_" + f.name, None)
        if v is not None:
            values[f.name] = v
    try:
        return bench.BenchConfig.from_mapping(values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_gen(args) -> int:
    store = _store(args)
    cfg = _config(args, None)
    bench.prepare(cfg, store, index=False)
    print(f"wrote {cfg.files} files, {cfg.records} rows and {cfg.queries} queries for table {cfg.table}")
    return 0


def cmd_index(args) -> int:
    store = _store(args)
    cfg = _config(args, store)
    lake = StoredTable.open(store, cfg.table).to_lake()
    root = build_index(lake, cfg.index_columns, store, cfg.entries_per_file)
    print(f"indexed {', '.join(root.columns)} into {len(root)} index files")
    return 0


_WORKLOAD_FIELDS = ("seed", "domain", "columns", "queries", "style", "query_columns", "widths", "anchors",
                    "clauses", "terms_per_clause")


def cmd_run(args) -> int:
    store = _store(args)
    cfg = _config(args, store)
    if not store.exists(f"meta/{cfg.table}/schema"):
        log.info("table %s not found; generating it", cfg.table)
        bench.prepare(cfg, store, index=cfg.mode in ("indexed", "indexed-cached"))
    queries = None
    stored = cfg
    if store.exists(bench.config_key(cfg.table)):
        stored = bench.BenchConfig.from_mapping(
            bench.parse_config_text(store.get(bench.config_key(cfg.table)).decode("utf-8")))
    if any(getattr(stored, f) != getattr(cfg, f) for f in _WORKLOAD_FIELDS):
        log.info("workload settings changed; regenerating queries")
        queries = bench.generate_workload(cfg)
    if args.workload:
        schema = StoredTable.open(store, cfg.table).schema
        queries = bench.parse_workload(Path(args.workload).read_text(encoding="utf-8"), schema)
    result = bench.run_scenario(cfg, store, queries, verify=not args.no_verify, out_dir=args.out)
    sys.stdout.write(result.summary_text())
    if args.plot:
        from .plotting import plot_report

        path = plot_report(result, Path(args.out) / "report.png")
        print(f"figure: {path}")
    return 0


def cmd_genomic_etl(args) -> int:
    store = _store(args)
    text = Path(args.input).read_text(encoding="utf-8")
    raw = genomic.parse_raw_tsv(text)
    manifest = genomic.partition_variants(raw, args.p, store, args.root)
    print(f"wrote {len(manifest)} bucket files from {len(raw)} calls")
    return 0


def cmd_genomic_query(args) -> int:
    store = _store(args)
    manifest = genomic.Manifest.load(store, args.root)
    before = store.reads
    recs = genomic.query_range(manifest, args.chrom, args.start, args.end, store)
    print(genomic.VARIANT_HEADER)
    for r in recs:
        print(r.to_tsv())
    log.info("read %d files", store.reads - before)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lakecover", description="Coverage-set planning, caching and benchmarking over a simulated data lake.")
    p.add_argument("--store", help="store directory (default: $LAKECOVER_STORE, else in-memory)")
    p.add_argument("--latency-us", type=float, default=None, help="injected per-get latency")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a lake and its workload")
    _add_bench_flags(g)
    g.set_defaults(func=cmd_gen)

    i = sub.add_parser("index", help="build indexes and the root index")
    _add_bench_flags(i)
    i.set_defaults(func=cmd_index)

    r = sub.add_parser("run", help="run the workload against Baseline")
    _add_bench_flags(r)
    r.add_argument("--out", default="report", help="report directory")
    r.add_argument("--workload", help="file with one predicate per line")
    r.add_argument("--no-verify", action="store_true", help="skip the Baseline row check")
    r.add_argument("--plot", action="store_true", help="also write report.png")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("genomic-etl", help="bucket raw variant calls")
    e.add_argument("input", help="TSV chrom,pos,ref,alt,sample_id")
    e.add_argument("-p", type=int, default=genomic.DEFAULT_P, help="bucket width")
    e.add_argument("--root", default="variants", help="layout root (one per reference genome)")
    e.set_defaults(func=cmd_genomic_etl)

    q = sub.add_parser("genomic-query", help="variants in a chromosome region")
    q.add_argument("chrom")
    q.add_argument("start", type=int)
    q.add_argument("end", type=int)
    q.add_argument("--root", default="variants")
    q.set_defaults(func=cmd_genomic_query)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"lakecover: error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lakecover: error: {exc}", file=sys.stderr)
        return 1
    except CorrectnessError as exc:
        print(f"lakecover: correctness failure: {exc}", file=sys.stderr)
        return 2
    except (LakeError, ValueError, FileNotFoundError) as exc:
        print(f"lakecover: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
