"""JSON form of a computed result: meta-rank table, meta-diagram and rank decomposition."""
from __future__ import annotations

import json
from collections import Counter
from typing import Any, Iterable, Optional

from .bifiltration import GradeMap
from .metrics import RealMetaRank, mdgm_on_grid
from .mrk import MetaRankTable, table_from_cells
from .signed import MetaDiagram, RankDecomposition, SignedBarcode, rank_decomposition


def _bars(c: Counter) -> list[list[int]]:
    return [[lo, hi] for (lo, hi), m in sorted(c.items()) for _ in range(m)]


def mrk_records(table: MetaRankTable, dims: Iterable[int]) -> list[dict[str, Any]]:
    out = []
    for d in dims:
        for (s, t), bars in sorted(table.multisets(d).items()):
            out.append({"dim": d, "s": s, "t": t, "bars": _bars(bars)})
    return out


def mdgm_records(mdgm: MetaDiagram, dims: Iterable[int]) -> list[dict[str, Any]]:
    out = []
    for d in dims:
        for (s, t), sb in sorted(mdgm.cells.get(d, {}).items()):
            out.append({"dim": d, "s": s, "t": t, "pos": _bars(sb.positive), "neg": _bars(sb.negative)})
    return out


def rank_records(mdgm: MetaDiagram, dims: Iterable[int]) -> list[dict[str, Any]]:
    out = []
    for d in dims:
        rd = rank_decomposition(mdgm, d)
        out.append({
            "dim": d,
            "R": [list(r) for r, m in sorted(rd.R.items()) for _ in range(m)],
            "S": [list(r) for r, m in sorted(rd.S.items()) for _ in range(m)],
        })
    return out


def _real(v: float) -> Optional[float]:
    return None if v == float("inf") else float(v)


def real_mdgm_records(table: MetaRankTable, gmap: GradeMap, dims: Iterable[int]) -> list[dict[str, Any]]:
    """Meta-diagram on the distinct real x-values; an upper end or bar end of null means infinity."""
    xs = gmap.distinct("x")
    ext = list(xs) + [float("inf")]
    out = []
    for d in dims:
        cells = mdgm_on_grid(RealMetaRank(table, gmap, d), xs)
        for (i, j), c in sorted(cells.items()):
            bars = sorted(c.items())
            out.append({
                "dim": d, "s": xs[i - 1], "t": _real(ext[j]),
                "pos": [[lo, _real(hi)] for (lo, hi), k in bars if k > 0 for _ in range(k)],
                "neg": [[lo, _real(hi)] for (lo, hi), k in bars if k < 0 for _ in range(-k)],
            })
    return out


def result_document(table: MetaRankTable, mdgm: MetaDiagram, gmap: GradeMap, dims: list[int]) -> dict[str, Any]:
    return {
        "meta": {
            "n": table.n,
            "dims": dims,
            "grade_values_x": [float(v) for v in gmap.xvalues],
            "grade_values_y": [float(v) for v in gmap.yvalues],
        },
        "mrk": mrk_records(table, dims),
        "mdgm": mdgm_records(mdgm, dims),
        "mdgm_real": real_mdgm_records(table, gmap, dims),
        "rank_decomposition": rank_records(mdgm, dims),
    }


def dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def load_document(doc: dict[str, Any]) -> tuple[MetaRankTable, MetaDiagram, dict[int, RankDecomposition], GradeMap]:
    """Inverse of :func:`result_document`."""
    meta = doc["meta"]
    n = int(meta["n"])
    gmap = GradeMap(tuple(meta["grade_values_x"]), tuple(meta["grade_values_y"]))
    by_dim: dict[int, dict[tuple[int, int], Counter]] = {}
    for rec in doc["mrk"]:
        by_dim.setdefault(rec["dim"], {})[(rec["s"], rec["t"])] = Counter(tuple(b) for b in rec["bars"])
    table = table_from_cells(by_dim, n)
    mdgm = MetaDiagram(n)
    for rec in doc["mdgm"]:
        sb = SignedBarcode([(tuple(b), 1) for b in rec["pos"]] + [(tuple(b), -1) for b in rec["neg"]])
        mdgm.cells.setdefault(rec["dim"], {})[(rec["s"], rec["t"])] = sb
    rds = {rec["dim"]: RankDecomposition(Counter(tuple(r) for r in rec["R"]), Counter(tuple(r) for r in rec["S"]))
           for rec in doc["rank_decomposition"]}
    return table, mdgm, rds, gmap


def loads(text: str, expect_n: Optional[int] = None):
    doc = json.loads(text)
    if expect_n is not None and doc["meta"]["n"] != expect_n:
        raise ValueError("grid size mismatch")
    return load_document(doc)
