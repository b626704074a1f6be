"""Needleman-Wunsch alignment of layer strings with a zero boundary.

Unlike textbook N-W, row 0 and column 0 of the score matrix are all zero,
so leading gaps are free; trailing gaps still cost ``gap`` each because the
score is read from the bottom-right cell.

Each row is filled in one vectorised pass.  With a constant gap penalty the
left-neighbour dependency unrolls to

    M[i, j] = j*gap + max_{0 <= k <= j} (c[k] - k*gap)

where c[k] is the best of the diagonal and vertical candidates (c[0] = 0,
the boundary), so a running maximum replaces the inner loop.  All scores
are exact int64.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .archspec import ArchSpec
from .simmat import SimilarityMatrix

DIAG, UP, LEFT = 0, 1, 2
MOVE_NAMES = ("diag", "up", "left")


@dataclass(frozen=True)
class ScoreParams:
    match: int = 4
    mismatch: int = -2
    gap: int = -1

    def __post_init__(self):
        for field in ("match", "mismatch", "gap"):
            v = getattr(self, field)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise TypeError(f"{field} must be an integer, got {v!r}")
        if self.match <= 0:
            raise ValueError(f"match must be > 0, got {self.match}")
        if self.mismatch >= self.match:
            raise ValueError(f"mismatch ({self.mismatch}) must be < match ({self.match})")
        if self.gap >= 0:
            raise ValueError(f"gap must be < 0, got {self.gap}")

    def s(self, x, y) -> int:
        return self.match if x == y else self.mismatch


@dataclass(frozen=True)
class DpMatrix:
    """Score grid of shape (l+1, m+1) plus the chosen move per interior cell."""

    a: Sequence
    b: Sequence
    params: ScoreParams
    scores: np.ndarray
    moves: np.ndarray

    @property
    def raw_score(self) -> int:
        return int(self.scores[-1, -1])


@dataclass(frozen=True)
class AlignmentResult:
    raw_score: int
    similarity: float
    path: list


def _as_seq(x) -> Sequence:
    if isinstance(x, ArchSpec):
        return x.layers
    return x


def _check(a, b):
    if len(a) == 0 or len(b) == 0:
        raise ValueError(f"cannot align empty sequence (lengths {len(a)} and {len(b)})")


def _codes(a: Sequence, b: Sequence) -> tuple[np.ndarray, np.ndarray]:
    table: dict = {}
    ia = np.array([table.setdefault(x, len(table)) for x in a], dtype=np.int64)
    ib = np.array([table.setdefault(x, len(table)) for x in b], dtype=np.int64)
    return ia, ib


def nw_matrix(a, b, params: ScoreParams = ScoreParams()) -> DpMatrix:
    a, b = _as_seq(a), _as_seq(b)
    _check(a, b)
    l, m = len(a), len(b)
    ia, ib = _codes(a, b)
    gap = np.int64(params.gap)
    ks = np.arange(m + 1, dtype=np.int64) * gap

    scores = np.zeros((l + 1, m + 1), dtype=np.int64)
    moves = np.full((l + 1, m + 1), -1, dtype=np.int8)
    for i in range(1, l + 1):
        prev = scores[i - 1]
        s = np.where(ib == ia[i - 1], params.match, params.mismatch)
        diag = prev[:-1] + s
        up = prev[1:] + gap
        c = np.empty(m + 1, dtype=np.int64)
        c[0] = 0
        np.maximum(diag, up, out=c[1:])
        row = np.maximum.accumulate(c - ks) + ks
        row[0] = 0
        scores[i] = row
        cur = row[1:]
        mv = np.where(cur == diag, DIAG, np.where(cur == up, UP, LEFT))
        moves[i, 1:] = mv
    return DpMatrix(a=a, b=b, params=params, scores=scores, moves=moves)


def nw_score(a, b, params: ScoreParams = ScoreParams()) -> int:
    return nw_matrix(a, b, params).raw_score


def traceback(matrix: DpMatrix) -> list[tuple[int, int, str]]:
    """Follow back-pointers from the bottom-right cell to the zero boundary.

    Returns ``(i, j, move)`` for every cell left, ending with the step that
    reaches row 0 or column 0.  Ties were resolved diag > up > left.
    """
    i, j = matrix.scores.shape[0] - 1, matrix.scores.shape[1] - 1
    path = []
    while i > 0 and j > 0:
        mv = int(matrix.moves[i, j])
        path.append((i, j, MOVE_NAMES[mv]))
        if mv == DIAG:
            i, j = i - 1, j - 1
        elif mv == UP:
            i -= 1
        else:
            j -= 1
    return path


def similarity_index(a, b, params: ScoreParams = ScoreParams()) -> float:
    """Raw score divided by ``match * min(l, m)``; 1.0 for identical inputs."""
    a, b = _as_seq(a), _as_seq(b)
    raw = nw_score(a, b, params)
    return raw / (params.match * min(len(a), len(b)))


def align(a, b, params: ScoreParams = ScoreParams()) -> AlignmentResult:
    a, b = _as_seq(a), _as_seq(b)
    mat = nw_matrix(a, b, params)
    raw = mat.raw_score
    return AlignmentResult(
        raw_score=raw,
        similarity=raw / (params.match * min(len(a), len(b))),
        path=traceback(mat),
    )


def pairwise_matrix(specs: Sequence[ArchSpec], params: ScoreParams = ScoreParams(),
                    raw: bool = False) -> SimilarityMatrix:
    """All-pairs similarity index (or raw integer score with ``raw=True``)."""
    if len(specs) < 2:
        raise ValueError("need at least 2 specs")
    names = [s.name for s in specs]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ValueError(f"duplicate spec names: {', '.join(dupes)}")
    n = len(specs)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            if i == j and not raw:
                values[i, i] = 1.0
                continue
            score = nw_score(specs[i].layers, specs[j].layers, params)
            if not raw:
                score = score / (params.match * min(len(specs[i]), len(specs[j])))
            values[i, j] = values[j, i] = score
    return SimilarityMatrix(names, values, kind="score" if raw else "similarity")
