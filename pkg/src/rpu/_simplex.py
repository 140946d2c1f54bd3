"""Deterministic simplex grids and local search, shared by solver and checks."""

from __future__ import annotations

from typing import Callable

import numpy as np


def compositions(levels: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``levels``."""
    if parts < 1:
        raise ValueError("parts must be >= 1")
    if parts == 1:
        return np.array([[levels]], dtype=np.int64)
    blocks = []
    for first in range(levels + 1):
        rest = compositions(levels - first, parts - 1)
        head = np.full((len(rest), 1), first, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def n_compositions(levels: int, parts: int) -> int:
    from math import comb

    return comb(levels + parts - 1, parts - 1)


def simplex_grid(parts: int, levels: int) -> np.ndarray:
    """Distributions on ``parts`` outcomes with coordinates at multiples of 1/levels."""
    if parts == 1:
        return np.ones((1, 1))
    return compositions(levels, parts) / float(levels)


def refine_extremum(
    f_rows: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    rounds: int = 20,
    step0: float | None = None,
    maximize: bool = True,
) -> tuple[np.ndarray, float]:
    """Local pairwise-transfer search on the simplex around ``start``.

    Each round proposes moving ``step`` mass between every ordered coordinate
    pair, keeps the best proposal, and halves the step when nothing improves.
    For concave objectives (maximize) or convex ones (minimize) this converges
    to the global extremum over the simplex face containing the iterate.
    """
    point = np.array(start, dtype=float)
    k = len(point)
    sign = 1.0 if maximize else -1.0
    best = sign * float(f_rows(point[None, :])[0])
    if k == 1:
        return point, sign * best
    step = step0 if step0 is not None else 0.25
    budget = max(rounds * 3, 40)
    halvings = 0
    while budget > 0 and halvings < rounds:
        budget -= 1
        cands = []
        for i in range(k):
            move = min(step, point[i])
            if move <= 0:
                continue
            for j in range(k):
                if i == j:
                    continue
                c = point.copy()
                c[i] -= move
                c[j] += move
                cands.append(c)
        if not cands:
            break
        cands = np.asarray(cands)
        vals = sign * f_rows(cands)
        top = int(np.argmax(vals))
        if vals[top] > best + 1e-16:
            best = float(vals[top])
            point = cands[top]
        else:
            step /= 2.0
            halvings += 1
    return point, sign * best
