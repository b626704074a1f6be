"""Shared layer-combination patterns (contiguous n-grams) between architectures.

Each model is reduced to the set of distinct contiguous runs of its layer
string with length in ``[min_len, n - 1]``, ``n`` being the layer count of the
shorter model in the pair.  Two models are scored by the weight of the runs
they share, normalised by the smaller self-weight, so identical models score
1 and models with no common run score 0.
"""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .archspec import ArchSpec, LayerAlphabet
from .simmat import SimilarityMatrix

WEIGHTINGS = ("length", "uniform")


@dataclass(frozen=True)
class PatternConfig:
    min_len: int = 2
    weighting: str = "length"

    def __post_init__(self):
        if self.min_len < 2:
            raise ValueError(f"min_len must be >= 2, got {self.min_len}")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"weighting must be one of {WEIGHTINGS}")

    def weight(self, length: int) -> int:
        return length if self.weighting == "length" else 1


@dataclass(frozen=True)
class PatternSet:
    patterns: frozenset
    min_len: int
    max_len: int

    def __len__(self) -> int:
        return len(self.patterns)

    def __contains__(self, p) -> bool:
        return p in self.patterns

    def weight(self, cfg: PatternConfig = PatternConfig()) -> int:
        return sum(cfg.weight(len(p)) for p in self.patterns)


def enumerate_ngrams(seq: str, min_len: int, max_len: int) -> PatternSet:
    """Distinct contiguous substrings of ``seq`` with length in range."""
    pats = set()
    n = len(seq)
    for length in range(min_len, min(max_len, n) + 1):
        for i in range(n - length + 1):
            pats.add(seq[i:i + length])
    return PatternSet(frozenset(pats), min_len, max_len)


def _substrings(seq: str, length: int) -> set:
    return {seq[i:i + length] for i in range(len(seq) - length + 1)}


@lru_cache(maxsize=256)
def _distinct_counts(seq: str) -> np.ndarray:
    """counts[L] = number of distinct substrings of length L, via suffix array + LCP."""
    n = len(seq)
    sa = sorted(range(n), key=lambda i: seq[i:])
    lcp = np.zeros(n, dtype=np.int64)
    for r in range(1, n):
        x, y = sa[r - 1], sa[r]
        h = 0
        while x + h < n and y + h < n and seq[x + h] == seq[y + h]:
            h += 1
        lcp[r] = h
    suffix_len = np.array([n - i for i in sa], dtype=np.int64)
    lengths = np.arange(n + 1)[:, None]
    counts = ((suffix_len[None, :] >= lengths) & (lcp[None, :] < lengths)).sum(axis=1)
    counts[0] = 0
    return counts


def self_weight(seq: str, max_len: int, cfg: PatternConfig = PatternConfig()) -> int:
    counts = _distinct_counts(seq)
    top = min(max_len, len(seq))
    return int(sum(cfg.weight(L) * int(counts[L]) for L in range(cfg.min_len, top + 1)))


def common_weight(a: str, b: str, max_len: int, cfg: PatternConfig = PatternConfig()) -> int:
    total = 0
    for length in range(cfg.min_len, max_len + 1):
        shared = _substrings(a, length) & _substrings(b, length)
        if not shared:
            # every sub-run of a shared run is shared, so nothing longer can be
            break
        total += cfg.weight(length) * len(shared)
    return total


def _seq(x) -> tuple[str, str]:
    if isinstance(x, ArchSpec):
        return x.name, x.layers
    seq = x if isinstance(x, str) else "".join(x)
    return seq, seq


def pattern_similarity(a, b, cfg: PatternConfig = PatternConfig()) -> float:
    (na, sa), (nb, sb) = _seq(a), _seq(b)
    max_len = min(len(sa), len(sb)) - 1
    for name, s in ((na, sa), (nb, sb)):
        if len(s) < cfg.min_len + 1:
            raise ValueError(
                f"spec {name!r} has {len(s)} layers; need at least {cfg.min_len + 1}")
    common = common_weight(sa, sb, max_len, cfg)
    denom = min(self_weight(sa, max_len, cfg), self_weight(sb, max_len, cfg))
    return common / denom


def pattern_matrix(specs: Sequence[ArchSpec], cfg: PatternConfig = PatternConfig()) -> SimilarityMatrix:
    if len(specs) < 2:
        raise ValueError("need at least 2 specs")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError("duplicate spec names")
    n = len(specs)
    values = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = pattern_similarity(specs[i], specs[j], cfg)
    return SimilarityMatrix(names, values)


def top_common_patterns(specs: Sequence[ArchSpec], k: int,
                        min_len: int = 2) -> list[tuple[str, tuple[str, ...]]]:
    """Patterns ranked by how many models contain them.

    Ties go to the longer pattern, then to the lexicographically smaller code
    string.  A model contributes runs of length ``min_len`` .. ``len - 1``.
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if len(specs) < 2:
        raise ValueError("need at least 2 specs")

    def runs(spec, length):
        if length > len(spec) - 1:
            return set()
        return _substrings(spec.layers, length)

    # level-wise search for patterns shared by >= 2 models
    frequent: dict[str, tuple[str, ...]] = {}
    prev = None
    length = min_len
    while True:
        holders = defaultdict(list)
        for spec in specs:
            for p in runs(spec, length):
                if prev is None or p[:-1] in prev:
                    holders[p].append(spec.name)
        level = {p: tuple(names) for p, names in holders.items() if len(names) >= 2}
        if not level:
            break
        frequent.update(level)
        prev = level
        length += 1

    ranked = sorted(frequent.items(), key=lambda kv: (-len(kv[1]), -len(kv[0]), kv[0]))
    if len(ranked) >= k:
        return ranked[:k]

    # fill with single-model patterns, longest first
    longest = max(len(s) for s in specs) - 1
    for length in range(longest, min_len - 1, -1):
        singles = []
        for spec in specs:
            for p in runs(spec, length):
                if p not in frequent:
                    singles.append((p, (spec.name,)))
        ranked.extend(sorted(set(singles), key=lambda kv: kv[0]))
        if len(ranked) >= k:
            break
    return ranked[:k]


def format_patterns_csv(rows, alphabet: LayerAlphabet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pattern", "model_count", "models"])
    for pattern, models in rows:
        w.writerow(["+".join(alphabet.name(c) for c in pattern), len(models), ";".join(models)])
    return buf.getvalue()
