"""Independent reference computations used by the tests.

Nothing here calls into the library's phase or product code: atoms are
built digit by digit with Fractions and transforms are summed directly.
"""

from __future__ import annotations

import cmath
import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np


def c0_mpmath(terms: int = 200, dps: int = 40) -> float:
    with mpmath.workdps(dps):
        s = mpmath.fsum(mpmath.log1p(-mpmath.pi**2 / (6 * mpmath.mpf(4) ** j)) for j in range(1, terms))
        return float(mpmath.exp(2 * s))


def phase(turns: Fraction) -> complex:
    t = turns - math.floor(turns)
    return cmath.exp(2j * math.pi * float(t))


def atoms(stages, n):
    """(digits, x) for every level-n atom x = sum b_j / P_j, digits (b_1, ..., b_n), b_1 fastest."""
    out = []
    for rev in itertools.product(*[s.B for s in reversed(stages[:n])]):
        digits = tuple(reversed(rev))
        x = Fraction(0)
        P = 1
        for st, b in zip(stages, digits):
            P *= st.N
            x += Fraction(b, P)
        out.append((digits, x))
    return out


def freqs(stages, n):
    out = []
    for rev in itertools.product(*[range(len(s.L)) for s in reversed(stages[:n])]):
        digits = tuple(reversed(rev))
        lam, P = 0, 1
        for st, d in zip(stages, digits):
            lam += st.L[d] * P
            P *= st.N
        out.append(lam)
    return out


def nu_hat_direct(stage, P_j: int, xi: Fraction) -> complex:
    return sum(phase(-Fraction(b, P_j) * xi) for b in stage.B) / len(stage.B)


def atomic_transform(stages, m, lam, weight=None):
    """Integral of weight(digits) e^{-2 pi i lam x} d mu_m(x), mu_m the level-m atomic measure."""
    pts = atoms(stages, m)
    total = 0j
    for digits, x in pts:
        w = 1.0 if weight is None else weight(digits)
        total += w * phase(-x * lam)
    return total / len(pts)


def brute_max_clique(adj_sets, n):
    best = 1 if n else 0
    for size in range(2, n + 1):
        found = any(all(b in adj_sets[a] for a, b in itertools.combinations(c, 2)) for c in itertools.combinations(range(n), size))
        if not found:
            break
        best = size
    return best


def dense_gram_extremes(E: np.ndarray):
    s = np.linalg.svd(E, compute_uv=False)
    return s[-1] ** 2, s[0] ** 2
