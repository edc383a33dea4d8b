"""Probability that random pair abstractions make two states ASAP-equivalent.

Two states with ``n`` and ``l`` actions have every action assigned uniformly
to one of ``m`` abstract pair nodes.  They are equivalent exactly when both
action sets hit the same set of abstract nodes.  Counting by the size ``k`` of
that set gives ``sum_k C(m, k) f(n, k) f(l, k) / m^(n+l)`` where ``f`` counts
surjections.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from itertools import product
from math import comb

import numpy as np


class RangeExceeded(ValueError):
    pass


def surjection_count(n: int, k: int) -> int:
    """Number of surjections from an ``n``-set onto a ``k``-set (inclusion-exclusion)."""
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    if n > 20:
        raise RangeExceeded(f"n={n} exceeds the supported range n <= 20")
    if k > n or k == 0:
        return 0
    return sum((-1) ** j * comb(k, j) * (k - j) ** n for j in range(k + 1))


def p_abs_exact(n: int, l: int, m: int) -> Fraction:
    if min(n, l, m) < 1:
        raise ValueError("n, l, m must be positive")
    if n + l > 30 or m > 20:
        raise RangeExceeded("closed form supported for n + l <= 30 and m <= 20")
    c = min(n, l, m)
    num = sum(comb(m, k) * surjection_count(n, k) * surjection_count(l, k) for k in range(1, c + 1))
    return Fraction(num, m ** (n + l))


def p_abs_bound(n: int, l: int, m: int) -> Fraction:
    c = min(n, l, m)
    return Fraction(2 * c, m) ** (n + l)


def p_abs_closed_form(n: int, l: int, m: int) -> tuple[float, float]:
    """Return ``(p_abs, (2c/m)^(n+l))`` as floats, evaluated exactly before rounding."""
    return float(p_abs_exact(n, l, m)), float(p_abs_bound(n, l, m))


def _image_counts(size: int, m: int) -> Counter:
    """How many of the ``m**size`` assignments produce each image set (as a bitmask)."""
    counts: Counter = Counter()
    for assignment in product(range(m), repeat=size):
        mask = 0
        for x in assignment:
            mask |= 1 << x
        counts[mask] += 1
    return counts


def p_abs_enumerate(n: int, l: int, m: int) -> Fraction:
    """Exhaustive count over all ``m**(n+l)`` assignments.

    The two states' assignments are independent, so the joint enumeration
    factorises into the image-set histograms of each side.
    """
    a = _image_counts(n, m)
    b = a if l == n else _image_counts(l, m)
    hits = sum(cnt * b.get(mask, 0) for mask, cnt in a.items())
    return Fraction(hits, m ** (n + l))


def p_abs_brute_force(n: int, l: int, m: int) -> Fraction:
    """Literal joint enumeration; only for tiny cases."""
    hits = 0
    for assignment in product(range(m), repeat=n + l):
        hits += set(assignment[:n]) == set(assignment[n:])
    return Fraction(hits, m ** (n + l))


def p_abs_monte_carlo(
    n: int, l: int, m: int, trials: int, rng: np.random.Generator, chunk: int = 250_000
) -> tuple[float, float]:
    """Frequency estimate and its binomial standard error."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        a = np.bitwise_or.reduce(np.left_shift(1, rng.integers(0, m, size=(size, n))), axis=1)
        b = np.bitwise_or.reduce(np.left_shift(1, rng.integers(0, m, size=(size, l))), axis=1)
        hits += int(np.count_nonzero(a == b))
        done += size
    p = hits / trials
    return p, float(np.sqrt(p * (1.0 - p) / trials))
