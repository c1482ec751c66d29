"""Nonparametric tests and reader-study confusion statistics.

Both tests handle ties through midranks and switch from exact enumeration to
a tie-corrected normal approximation with continuity correction once the
sample is large enough that enumeration stops being cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

MWU_EXACT_LIMIT = 12  # exact enumeration when n_a + n_b <= this
WILCOXON_EXACT_LIMIT = 15


class StatsError(ValueError):
    pass


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    sv = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _u_statistic(a: np.ndarray, b: np.ndarray) -> float:
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    r_a = float(ranks[: len(a)].sum())
    return r_a - len(a) * (len(a) + 1) / 2.0


def mann_whitney_one_sided(a, b) -> tuple[float, float]:
    """U statistic and one-sided p for the alternative "a stochastically
    greater than b". Ties contribute half to U.

    Exact permutation enumeration for n_a + n_b <= 12, otherwise the normal
    approximation with tie and continuity corrections.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise StatsError("both samples must be non-empty")
    n_a, n_b = len(a), len(b)
    u_obs = _u_statistic(a, b)

    if n_a + n_b <= MWU_EXACT_LIMIT:
        pooled = np.concatenate([a, b])
        n = n_a + n_b
        hits = 0
        total = 0
        for picked in combinations(range(n), n_a):
            mask = np.zeros(n, dtype=bool)
            mask[list(picked)] = True
            u = _u_statistic(pooled[mask], pooled[~mask])
            hits += u >= u_obs - 1e-12
            total += 1
        return u_obs, hits / total

    n = n_a + n_b
    pooled = np.concatenate([a, b])
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = float(((counts**3 - counts).sum()) / (n * (n - 1)))
    sigma2 = n_a * n_b / 12.0 * ((n + 1) - tie_term)
    if sigma2 <= 0:
        return u_obs, 1.0
    z = (u_obs - n_a * n_b / 2.0 - 0.5) / math.sqrt(sigma2)
    return u_obs, _normal_sf(z)


def wilcoxon_signed_rank_vs(values, mu: float = 0.5) -> float:
    """One-sided signed-rank p for the alternative "median below mu".

    Exact zeros are dropped; remaining absolute differences are midranked.
    Exact sign-pattern enumeration for n <= 15, else the normal approximation
    with tie and continuity corrections.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise StatsError("sample must be non-empty")
    diffs = values - mu
    diffs = diffs[diffs != 0.0]
    if diffs.size == 0:
        raise StatsError("all differences are zero; the test is undefined")
    n = len(diffs)
    ranks = _midranks(np.abs(diffs))
    w_pos = float(ranks[diffs > 0].sum())

    if n <= WILCOXON_EXACT_LIMIT:
        hits = 0
        for pattern in range(1 << n):
            w = 0.0
            for i in range(n):
                if pattern >> i & 1:
                    w += ranks[i]
            hits += w <= w_pos + 1e-12
        return hits / (1 << n)

    mean_w = n * (n + 1) / 4.0
    _, counts = np.unique(ranks, return_counts=True)
    sigma2 = n * (n + 1) * (2 * n + 1) / 24.0 - float((counts**3 - counts).sum()) / 48.0
    if sigma2 <= 0:
        return 1.0
    z = (w_pos - mean_w + 0.5) / math.sqrt(sigma2)
    return 1.0 - _normal_sf(z)


VERDICTS = ("real", "synthetic")


@dataclass
class Confusion:
    tr: int  # true reals: real images called real
    fr: int  # false reals: synthetic images called real
    ts: int  # true synthetics
    fs: int  # false synthetics: real images called synthetic

    @property
    def acc(self) -> float:
        total = self.tr + self.fr + self.ts + self.fs
        return (self.tr + self.ts) / total if total else 0.0

    def as_dict(self) -> dict:
        return {"TR": self.tr, "FR": self.fr, "TS": self.ts, "FS": self.fs, "acc": self.acc}


def confusion_and_accuracy(verdicts: dict[str, str], truth: dict[str, str]) -> Confusion:
    """Tally reader verdicts against ground truth: acc = (TR + TS) / total."""
    unknown = set(verdicts) - set(truth)
    if unknown:
        raise StatsError(f"verdicts for unknown items: {sorted(unknown)[:5]}")
    missing = set(truth) - set(verdicts)
    if missing:
        raise StatsError(f"missing verdicts for {len(missing)} items")
    tally = Confusion(0, 0, 0, 0)
    for item, verdict in verdicts.items():
        if verdict not in VERDICTS or truth[item] not in VERDICTS:
            raise StatsError(f"bad verdict or truth for item {item}")
        actual_real = truth[item] == "real"
        called_real = verdict == "real"
        if actual_real and called_real:
            tally.tr += 1
        elif actual_real:
            tally.fs += 1
        elif called_real:
            tally.fr += 1
        else:
            tally.ts += 1
    return tally
