"""Labelled similarity matrices, functional (cosine) similarity and CSV I/O."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

KINDS = ("similarity", "difference", "score")

TASKS = ("M-U", "M-S", "M-MM", "U-M", "U-S", "U-MM",
         "S-M", "S-U", "S-MM", "MM-M", "MM-U", "MM-S")
VARIANTS = ("baseline", "neurn")
NAS_SUFFIX = "(NAS)"


class CsvFormatError(ValueError):
    def __init__(self, msg: str, line: int, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {msg}")


class SimilarityMatrix:
    """Square labelled matrix.

    ``kind`` is ``"similarity"`` (symmetric, unit diagonal), ``"difference"``
    (symmetric, zero-ish diagonal, not enforced) or ``"score"`` (symmetric raw
    alignment scores).
    """

    def __init__(self, labels: Iterable[str], values, kind: str = "similarity"):
        labels = tuple(labels)
        values = np.array(values, dtype=float)
        if kind not in KINDS:
            raise ValueError(f"unknown matrix kind {kind!r}")
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"matrix must be square, got shape {values.shape}")
        if values.shape[0] != len(labels):
            raise ValueError(f"{len(labels)} labels for a {values.shape[0]}x{values.shape[0]} matrix")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be unique")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix contains non-finite values")
        if not np.allclose(values, values.T, rtol=0, atol=1e-9):
            raise ValueError("matrix is not symmetric")
        if kind == "similarity" and not np.allclose(np.diag(values), 1.0, rtol=0, atol=1e-12):
            raise ValueError("similarity matrix must have a unit diagonal")
        self.labels = labels
        self.values = values
        self.kind = kind

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"SimilarityMatrix({len(self)}x{len(self)}, kind={self.kind!r})"

    def __getitem__(self, key: tuple[str, str]) -> float:
        a, b = key
        return float(self.values[self.labels.index(a), self.labels.index(b)])

    def offdiagonal(self) -> np.ndarray:
        n = len(self)
        return self.values[~np.eye(n, dtype=bool)]

    def reorder(self, order: Sequence[str]) -> "SimilarityMatrix":
        idx = [self.labels.index(lbl) for lbl in order]
        if sorted(idx) != list(range(len(self))):
            raise ValueError("order must be a permutation of the labels")
        return SimilarityMatrix(order, self.values[np.ix_(idx, idx)], self.kind)


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim != 1 or v.ndim != 1 or u.shape != v.shape or u.size == 0:
        raise ValueError(f"vectors must be 1-D and equal length, got {u.shape} and {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine is undefined for a zero vector")
    c = float(np.dot(u, v) / (nu * nv))
    return min(1.0, max(-1.0, c))


def cosine_matrix(labels: Sequence[str], rows) -> SimilarityMatrix:
    rows = np.asarray(rows, dtype=float)
    n = len(labels)
    values = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = cosine(rows[i], rows[j])
    return SimilarityMatrix(labels, values)


@dataclass
class PerfTable:
    """Accuracy (percent) per model, variant and transfer task."""

    models: list[str] = field(default_factory=list)
    rows: dict[tuple[str, str], np.ndarray] = field(default_factory=dict)
    tasks: tuple[str, ...] = TASKS

    def add(self, model: str, variant: str, values) -> None:
        if variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
        vec = np.asarray(values, dtype=float)
        if vec.shape != (len(self.tasks),):
            raise ValueError(f"{model}/{variant}: expected {len(self.tasks)} values, got {vec.size}")
        if np.any(vec < 0) or np.any(vec > 100) or not np.all(np.isfinite(vec)):
            raise ValueError(f"{model}/{variant}: accuracies must lie in [0, 100]")
        if (model, variant) in self.rows:
            raise ValueError(f"duplicate row for {model}/{variant}")
        if model not in self.models:
            self.models.append(model)
        self.rows[(model, variant)] = vec

    def is_nas(self, model: str) -> bool:
        return model.endswith(NAS_SUFFIX)

    def select(self, include_nas: bool = True) -> list[str]:
        return [m for m in self.models if include_nas or not self.is_nas(m)]


def read_perf_table(source: Union[str, Path, io.TextIOBase]) -> PerfTable:
    """Read the ``model,variant,<12 tasks>`` CSV; errors carry line/column."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_perf_table(fh)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty table", 1) from None
    expected = ["model", "variant", *TASKS]
    if [h.strip() for h in header] != expected:
        raise CsvFormatError(f"header must be {','.join(expected)}", 1)
    table = PerfTable()
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(expected):
            raise CsvFormatError(f"expected {len(expected)} columns, got {len(row)}", lineno)
        model, variant = row[0].strip(), row[1].strip()
        if variant not in VARIANTS:
            raise CsvFormatError(f"variant must be baseline or neurn, got {variant!r}", lineno, 2)
        vals = []
        for col, cell in enumerate(row[2:], start=3):
            try:
                v = float(cell)
            except ValueError:
                raise CsvFormatError(f"non-numeric accuracy {cell!r}", lineno, col) from None
            if not 0 <= v <= 100:
                raise CsvFormatError(f"accuracy {v} outside [0, 100]", lineno, col)
            vals.append(v)
        try:
            table.add(model, variant, vals)
        except ValueError as exc:
            raise CsvFormatError(str(exc), lineno) from None
    return table


def default_perf_table() -> PerfTable:
    path = resources.files("neurnkit") / "data" / "table1.csv"
    return read_perf_table(io.StringIO(path.read_text(encoding="utf-8")))


def functional_similarity(table: PerfTable, variant: str = "baseline",
                          include_nas: bool = True) -> SimilarityMatrix:
    """Pairwise cosine of the models' accuracy rows for one variant."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    models = table.select(include_nas)
    missing = [m for m in models if (m, variant) not in table.rows]
    if missing:
        raise ValueError(f"no {variant} row for model(s): {', '.join(missing)}")
    return cosine_matrix(models, [table.rows[(m, variant)] for m in models])


def difference_matrix(a: SimilarityMatrix, b: SimilarityMatrix) -> SimilarityMatrix:
    if a.labels != b.labels:
        raise ValueError("matrices have different labels")
    return SimilarityMatrix(a.labels, a.values - b.values, kind="difference")


def mean_offdiagonal(m: SimilarityMatrix) -> float:
    n = len(m)
    if n < 2:
        raise ValueError("need at least a 2x2 matrix")
    return float(m.offdiagonal().sum() / (n * (n - 1)))


def cluster_order(m: SimilarityMatrix) -> list[str]:
    """Leaf order of average-linkage clustering on ``1 - similarity``.

    Exact distance ties merge the pair whose clusters have the lowest
    original indices; within a merge the lower-index cluster goes first.
    """
    dist = 1.0 - m.values
    clusters: list[list[int]] = [[i] for i in range(len(m))]
    while len(clusters) > 1:
        best = None
        for p in range(len(clusters)):
            for q in range(p + 1, len(clusters)):
                d = dist[np.ix_(clusters[p], clusters[q])].mean()
                if best is None or d < best[0]:
                    best = (d, p, q)
        _, p, q = best
        merged = clusters[p] + clusters[q]
        clusters = [c for k, c in enumerate(clusters) if k not in (p, q)]
        clusters.append(merged)
        clusters.sort(key=min)
    return [m.labels[i] for i in clusters[0]]


def format_csv(m: SimilarityMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["", *m.labels])
    integral = m.kind == "score" and np.all(m.values == np.round(m.values))
    for label, row in zip(m.labels, m.values):
        if integral:
            cells = [str(int(v)) for v in row]
        else:
            cells = [f"{v:.6f}" for v in row]
        w.writerow([label, *cells])
    return buf.getvalue()


def export_csv(m: SimilarityMatrix, path: Union[str, Path]) -> None:
    Path(path).write_text(format_csv(m), encoding="utf-8", newline="")


def parse_csv(text: str, kind: str = "similarity") -> SimilarityMatrix:
    rows = list(csv.reader(io.StringIO(text)))
    while rows and not rows[-1]:
        rows.pop()
    if not rows:
        raise CsvFormatError("empty file", 1)
    header = rows[0]
    if len(header) < 2 or header[0] != "":
        raise CsvFormatError("header must start with an empty cell followed by labels", 1)
    labels = header[1:]
    n = len(labels)
    body = rows[1:]
    if len(body) != n:
        raise CsvFormatError(f"header has {n} labels but file has {len(body)} data rows", 1)
    values = np.zeros((n, n))
    for r, row in enumerate(body):
        lineno = r + 2
        if len(row) != n + 1:
            raise CsvFormatError(f"expected {n + 1} columns, got {len(row)}", lineno)
        if row[0] != labels[r]:
            raise CsvFormatError(f"row label {row[0]!r} does not match header label {labels[r]!r}", lineno, 1)
        for c, cell in enumerate(row[1:]):
            try:
                v = float(cell)
            except ValueError:
                raise CsvFormatError(f"non-numeric value {cell!r}", lineno, c + 2) from None
            if not math.isfinite(v):
                raise CsvFormatError(f"non-finite value {cell!r}", lineno, c + 2)
            values[r, c] = v
    try:
        return SimilarityMatrix(labels, values, kind)
    except ValueError as exc:
        raise CsvFormatError(str(exc), 1) from None


def import_csv(path: Union[str, Path], kind: str = "similarity") -> SimilarityMatrix:
    return parse_csv(Path(path).read_text(encoding="utf-8"), kind)
