from __future__ import annotations
import json
import logging
import math
import os
import tempfile
from typing import Any, Callable, Tuple

import numpy as np
import pandas as pd

from .engine.graph_model import GraphSample
from .engine.spectral import SpectralDecomposition
from .constants import EIGENVECTOR_DUMP_WARN_ENTRIES
from .errors import ParseError

logger = logging.getLogger(__name__)

EDGE_COLUMNS = ["i", "j"]
METADATA_FIELDS = ("n", "p", "seed", "rng_id")
CSV_FLOAT_FORMAT = "%.17g"


def graph_paths(prefix: str) -> Tuple[str, str]:
    """Edge-list CSV and metadata JSON paths for a graph stored under ``prefix``."""
    base, ext = os.path.splitext(prefix)
    if ext.lower() in (".csv", ".json"):
        prefix = base
    return f"{prefix}.csv", f"{prefix}.json"


def atomic_write(path: str, writer: Callable[[str], None]) -> None:
    """Run ``writer`` against a temp file next to ``path``, then rename over it."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.debug(f"Wrote {path}")


def to_jsonable(value: Any) -> Any:
    """numpy scalars/arrays to plain Python; NaN and infinities to None."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps_json(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2, allow_nan=False) + "\n"


def write_json(path: str, payload: Any) -> None:
    text = dumps_json(payload)

    def _write(tmp: str) -> None:
        with open(tmp, "w", encoding="utf-8") as f:
            f.write(text)

    atomic_write(path, _write)


def write_csv(path: str, df: pd.DataFrame) -> None:
    atomic_write(
        path,
        lambda tmp: df.to_csv(tmp, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n", encoding="utf-8"),
    )


def write_graph(g: GraphSample, prefix: str) -> Tuple[str, str]:
    csv_path, meta_path = graph_paths(prefix)
    edges = pd.DataFrame(g.edges(), columns=EDGE_COLUMNS)
    write_csv(csv_path, edges)
    write_json(meta_path, {"n": g.n, "p": g.p, "seed": g.seed, "rng_id": g.rng_id})
    return csv_path, meta_path


def _read_metadata(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            meta = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", path=path, line=e.lineno) from e
    if not isinstance(meta, dict):
        raise ParseError("metadata must be a JSON object", path=path, line=1)
    missing = [k for k in METADATA_FIELDS if k not in meta]
    if missing:
        raise ParseError(f"missing metadata fields {missing}", path=path)
    if not isinstance(meta["n"], int) or meta["n"] < 1:
        raise ParseError(f"n must be a positive integer, got {meta['n']!r}", path=path)
    if not isinstance(meta["seed"], int) or meta["seed"] < 0:
        raise ParseError(f"seed must be a non-negative integer, got {meta['seed']!r}", path=path)
    if not isinstance(meta["p"], (int, float)) or not (0.0 <= meta["p"] <= 1.0):
        raise ParseError(f"p must be a number in [0, 1], got {meta['p']!r}", path=path)
    return meta


def _blank(value) -> bool:
    return pd.isna(value) or value == ""


def read_graph(prefix: str) -> GraphSample:
    """
    Read an edge-list CSV (header ``i,j``, one row per edge, i < j) and its
    metadata JSON. Malformed rows raise ParseError with the 1-based file line.
    """
    csv_path, meta_path = graph_paths(prefix)
    meta = _read_metadata(meta_path)
    n = meta["n"]

    try:
        df = pd.read_csv(csv_path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except pd.errors.EmptyDataError as e:
        raise ParseError("empty file, expected header 'i,j'", path=csv_path, line=1) from e
    except pd.errors.ParserError as e:
        raise ParseError(f"malformed CSV: {e}", path=csv_path) from e
    if list(df.columns) != EDGE_COLUMNS:
        raise ParseError(f"header must be 'i,j', got {','.join(df.columns)!r}", path=csv_path, line=1)

    adj = np.zeros((n, n), dtype=bool)
    for idx, (si, sj) in enumerate(zip(df["i"], df["j"])):
        line = idx + 2
        if _blank(si) and _blank(sj):
            raise ParseError("blank line in edge list", path=csv_path, line=line)
        try:
            i, j = int(si), int(sj)
        except ValueError:
            raise ParseError(f"non-integer vertex in row {si!r},{sj!r}", path=csv_path, line=line) from None
        if not (0 <= i < j < n):
            raise ParseError(f"edge ({i},{j}) must satisfy 0 <= i < j < {n}", path=csv_path, line=line)
        if adj[i, j]:
            raise ParseError(f"duplicate edge ({i},{j})", path=csv_path, line=line)
        adj[i, j] = adj[j, i] = True

    return GraphSample(n=n, p=float(meta["p"]), adjacency=adj, seed=meta["seed"], rng_id=meta["rng_id"])


def roundtrip(g: GraphSample, prefix: str) -> GraphSample:
    write_graph(g, prefix)
    return read_graph(prefix)


def write_eigenvectors(path: str, dec: SpectralDecomposition) -> None:
    """Row k of the CSV is v_{k+1}."""
    entries = dec.eigenvectors.size
    if entries > EIGENVECTOR_DUMP_WARN_ENTRIES:
        logger.warning(f"Eigenvector dump has {entries} entries; {path} will be large")
    df = pd.DataFrame(dec.eigenvectors.T, columns=[f"x{i}" for i in range(dec.n)])
    write_csv(path, df)
