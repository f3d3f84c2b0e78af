"""Command-line entry point: compute, verify, distance, render, bench."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np

from .bifiltration import BifiltrationError, GradedComplex, GradeMap, load_bifiltration, transpose_axes
from .generators import triangulated_grid
from .metrics import erosion_mdgm, erosion_mrk, resolution
from .mrk import MetaRankTable, cells_equal, compute_metarank, iter_rows
from .oracle import (first_rank_mismatch, mrk_from_rank, rank_from_rectangles, rank_invariant,
                     rank_table_from_cells)
from .reduction import InvariantError
from .render import render_diagram_of_diagrams, render_signed_barcode
from .serialize import dumps, result_document
from .signed import mobius_invert, mrk_from_mdgm_all, rank_decomposition, stream_signed_counts

log = logging.getLogger("metarank")

EXIT_INPUT = 1
EXIT_INVARIANT = 2
EXIT_MISMATCH = 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load(path: str, axis: str) -> tuple[GradedComplex, GradeMap]:
    try:
        cx, gmap = load_bifiltration(path)
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {exc.strerror or exc}") from exc
    except BifiltrationError as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}") from exc
    if axis == "y":
        cx, gmap = transpose_axes(cx), gmap.transposed()
    return cx, gmap


def _dims(args, cx: GradedComplex) -> list[int]:
    if args.dim is not None:
        return sorted(set(args.dim))
    return list(range(cx.max_dim + 1)) if cx.n else []


def _write(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _pool_map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# compute ---------------------------------------------------------------

def _text_report(table: MetaRankTable, mdgm, dims: list[int]) -> str:
    lines = [f"n = {table.n}"]
    for d in dims:
        lines.append(f"# degree {d}: meta-rank")
        for (s, t), bars in sorted(table.multisets(d).items()):
            lines.append(f"[{s},{t}] " + " ".join(f"[{lo},{hi}]" for (lo, hi), m in sorted(bars.items()) for _ in range(m)))
        lines.append(f"# degree {d}: meta-diagram")
        for (s, t), sb in sorted(mdgm.cells.get(d, {}).items()):
            lines.append(f"[{s},{t}] {sb!r}")
    return "\n".join(lines) + "\n"


def cmd_compute(args) -> int:
    cx, gmap = _load(args.input, args.axis)
    dims = _dims(args, cx)
    if args.stream:
        out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
        try:
            for t, row in iter_rows(cx):
                cells = []
                for s, (d, lo, hi) in enumerate(row, start=1):
                    for dd in dims:
                        m = (d == dd) & (lo <= hi)
                        if m.any():
                            bars = sorted(zip(lo[m].tolist(), hi[m].tolist()))
                            cells.append({"dim": dd, "s": s, "bars": [list(b) for b in bars]})
                out.write(json.dumps({"t": t, "cells": cells}, sort_keys=True) + "\n")
        finally:
            if args.out:
                out.close()
        return 0
    table = compute_metarank(cx)
    mdgm = mobius_invert(table)
    for d in dims:
        mrk_from_mdgm_all(mdgm, d)  # raises InvariantError on a negative recovered multiplicity
    if args.format == "text":
        _write(args, _text_report(table, mdgm, dims))
    else:
        _write(args, dumps(result_document(table, mdgm, gmap, dims)))
    return 0


# verify ----------------------------------------------------------------

def _corrupt(table: MetaRankTable) -> tuple[int, int]:
    """Test hook: add a spurious bar to the first non-empty cell."""
    key = min(table.cells) if table.cells else (1, 1)
    d, lo, hi = table.cells.get(key, (np.zeros(0, np.int8), np.zeros(0, np.int32), np.zeros(0, np.int32)))
    dd = int(d[0]) if len(d) else 0
    table.cells[key] = (np.append(d, np.int8(dd)), np.append(lo, np.int32(1)),
                        np.append(hi, np.int32(max(table.n, 1))))
    return key


def verify_complex(cx: GradedComplex, dims: list[int], threads: int = 1,
                   corrupt: bool = False) -> list[tuple[str, int, Optional[str]]]:
    """Run the oracle equivalences; returns (check, dim, first offending location or None)."""
    n = cx.n
    table = compute_metarank(cx)
    if corrupt:
        _corrupt(table)
    mdgm = mobius_invert(table)
    rk = rank_invariant(cx, dims)

    def one(d: int) -> list[tuple[str, int, Optional[str]]]:
        res = []
        cells = table.multisets(d)
        bad = cells_equal(mrk_from_rank(rk, d), cells)
        res.append(("rank->mrk", d, None if bad is None else f"cell {list(bad)}"))
        bad4 = first_rank_mismatch(rank_table_from_cells(cells, n), rk.ranks[d], n) if n else None
        res.append(("mrk->rank", d, None if bad4 is None else f"pair {list(bad4)}"))
        try:
            back = mrk_from_mdgm_all(mdgm, d)
            bad = cells_equal(back, cells)
            res.append(("moebius-roundtrip", d, None if bad is None else f"cell {list(bad)}"))
        except InvariantError as exc:
            res.append(("moebius-roundtrip", d, str(exc)))
        rd = rank_decomposition(mdgm, d)
        rect = rank_from_rectangles(rd.R.elements(), rd.S.elements(), n) if n else None
        bad4 = first_rank_mismatch(rect, rk.ranks[d], n) if n else None
        res.append(("rank-decomposition", d, None if bad4 is None else f"pair {list(bad4)}"))
        return res

    out = []
    for part in _pool_map(one, dims, threads):
        out.extend(part)
    return out


def cmd_verify(args) -> int:
    cx, _ = _load(args.input, args.axis)
    if cx.n > args.oracle_cap:
        raise CliError(EXIT_INPUT, f"complex has {cx.n} simplices, above the oracle cap of {args.oracle_cap}")
    results = verify_complex(cx, _dims(args, cx), args.threads, corrupt=args.inject_fault)
    failed = False
    for check, d, where in results:
        if where is None:
            print(f"PASS {check} degree {d}")
        else:
            failed = True
            print(f"FAIL {check} degree {d}: first mismatch at {where}")
    return EXIT_MISMATCH if failed else 0


# distance --------------------------------------------------------------

def cmd_distance(args) -> int:
    if not args.input_b:
        raise CliError(EXIT_INPUT, "distance needs --input-b")
    ca, ga = _load(args.input, args.axis)
    cb, gb = _load(args.input_b, args.axis)
    ta, tb = compute_metarank(ca), compute_metarank(cb)
    top = max(ca.max_dim if ca.n else 0, cb.max_dim if cb.n else 0)
    dims = sorted(set(args.dim)) if args.dim is not None else list(range(top + 1))

    def one(d: int) -> dict:
        if args.kind == "mrk":
            return {"dim": d, "distance": erosion_mrk(ta, ga, tb, gb, d)}
        r = erosion_mdgm(ta, ga, tb, gb, d, strict_def=args.strict_endpoint,
                         widen_by_irreg=args.widen_by_irreg)
        return {"dim": d, "distance": r.distance, "irreg_x": r.irreg_x, "irreg_y": r.irreg_y}

    rows = _pool_map(one, dims, args.threads)
    res = resolution(ga, gb)
    irx = max(ga.irreg("x") if ga.n else 0.0, gb.irreg("x") if gb.n else 0.0)
    iry = max(ga.irreg("y") if ga.n else 0.0, gb.irreg("y") if gb.n else 0.0)
    if args.format == "json":
        _write(args, json.dumps({"kind": args.kind, "resolution": res, "irreg_x": irx, "irreg_y": iry,
                                 "per_dim": rows}, indent=1, sort_keys=True) + "\n")
        return 0
    lines = []
    for r in rows:
        extra = f" irreg(S) x={r['irreg_x']:g} y={r['irreg_y']:g}" if "irreg_x" in r else ""
        lines.append(f"degree {r['dim']}: {args.kind} erosion distance = {r['distance']:g}{extra}")
    lines.append(f"candidate resolution = {res:g}")
    lines.append(f"irreg x = {irx:g}, irreg y = {iry:g}")
    _write(args, "\n".join(lines) + "\n")
    return 0


# render ----------------------------------------------------------------

def cmd_render(args) -> int:
    cx, gmap = _load(args.input, args.axis)
    dims = _dims(args, cx)
    d = dims[0] if dims else 0
    mdgm = mobius_invert(compute_metarank(cx))
    if args.target == "signed-barcode":
        svg = render_signed_barcode(rank_decomposition(mdgm, d), gmap, d)
    else:
        svg = render_diagram_of_diagrams(mdgm, gmap, d)
    _write(args, svg)
    return 0


# bench -----------------------------------------------------------------

def bench_one(n: int, seed: int) -> dict:
    cx, _ = triangulated_grid(n, seed=seed)
    t0 = time.perf_counter()
    bars = 0
    for _, row in iter_rows(cx):
        bars += sum(int(np.count_nonzero(lo <= hi)) for _, lo, hi in row)
    t1 = time.perf_counter()
    _, pos, neg = stream_signed_counts(cx)
    t2 = time.perf_counter()
    return {"n": cx.n, "wall_time": round(t1 - t0, 4), "wall_time_signed": round(t2 - t1, 4),
            "mrk_bars": bars, "signed_pos": pos, "signed_neg": neg}


BENCH_FIELDS = ["n", "wall_time", "wall_time_signed", "mrk_bars", "signed_pos", "signed_neg"]


def cmd_bench(args) -> int:
    rows = [bench_one(n, args.seed) for n in args.sizes]
    out = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=BENCH_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
    finally:
        if args.out:
            out.close()
    return 0


# parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metarank", description="Meta-ranks and meta-diagrams of bifiltrations.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_input=True):
        sp.add_argument("--input", required=need_input, help="bifiltration file (one 'v0 .. vk ; x y' per line)")
        sp.add_argument("--dim", type=int, action="append", help="homology degree (repeatable; default all)")
        sp.add_argument("--axis", choices=["x", "y"], default="x", help="sweep axis; y transposes the parameters")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--threads", type=int, default=1)

    c = sub.add_parser("compute", help="meta-rank, meta-diagram and rank decomposition")
    common(c)
    c.add_argument("--format", choices=["json", "text"], default="json")
    c.add_argument("--stream", action="store_true", help="emit one JSON line per target column, keep nothing")
    c.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify", help="check against the brute-force rank invariant")
    common(v)
    v.add_argument("--oracle-cap", type=int, default=40)
    v.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("distance", help="erosion distance between two inputs")
    common(d)
    d.add_argument("--input-b", required=False)
    d.add_argument("--kind", choices=["mrk", "mdgm"], default="mrk")
    d.add_argument("--format", choices=["text", "json"], default="text")
    d.add_argument("--strict-endpoint", "--strict-paper-def412", dest="strict_endpoint", action="store_true",
                   help="erode the right end from s instead of t (degenerate: always 0)")
    d.add_argument("--widen-by-irreg", action="store_true", help="add irreg(S) to eps in the grid lookups")
    d.set_defaults(func=cmd_distance)

    r = sub.add_parser("render", help="SVG of the meta-diagram or of the signed barcode")
    common(r)
    r.add_argument("--target", choices=["diagram-of-diagrams", "signed-barcode"], default="diagram-of-diagrams")
    r.add_argument("--format", choices=["svg"], default="svg")
    r.set_defaults(func=cmd_render)

    b = sub.add_parser("bench", help="timings on triangulated-grid bifiltrations (CSV)")
    b.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400, 800])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("METARANK_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
