"""Fourier transforms of the Moran measure mu = nu_1 * nu_2 * ..., its truncations and tails.

nu_j puts mass 1/M_j on each point b / (N_1...N_j), b in B_j, so

    nu_hat_j(xi) = (1/M_j) sum_{b in B_j} exp(-2 pi i b xi / (N_1...N_j)).

Frequencies are exact rationals throughout; the "all phases are integers"
branch (nu_hat_j = 1) is decided in integer arithmetic, never by float
proximity.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exact import expi_ratio, to_fraction
from .tower import Tower

DEFAULT_TAIL_TOL = 1e-12
MAX_TAIL_DEPTH = 256
DELTA_BUDGET = 4096

# float rounding allowance per multiplied factor
_ROUNDING = 4e-16


class TailError(ValueError):
    """The certified tail bound did not reach the tolerance within the depth cap."""


class BudgetError(ValueError):
    """An enumeration would exceed its configured size budget."""


def nu_hat(tower: Tower, j: int, xi) -> complex:
    xi = to_fraction(xi)
    st = tower.stage(j)
    den = xi.denominator * tower.product(j)
    p = xi.numerator
    s = st.structured
    if s is not None:
        if (s.K * p) % den == 0:
            return 1.0 + 0.0j
    elif all((b * p) % den == 0 for b in st.B):
        return 1.0 + 0.0j
    return sum(expi_ratio(-b * p, den) for b in st.B) / st.M


def mu_n_hat(tower: Tower, n: int, xi) -> complex:
    """Transform of the finite convolution nu_1 * ... * nu_n."""
    out = 1.0 + 0.0j
    for j in range(1, n + 1):
        out *= nu_hat(tower, j, xi)
    return out


@dataclass(frozen=True)
class TailValue:
    """Truncated tail product with a certified bound on ``|value - true|``."""

    value: complex
    error: float
    depth: int

    @property
    def abs_sq(self) -> float:
        return abs(self.value) ** 2

    @property
    def abs_sq_lower(self) -> float:
        return max(abs(self.value) - self.error, 0.0) ** 2


def tail_bound(tower: Tower, level: int, lam: Fraction) -> float:
    """Certified bound on |prod_{j > level} nu_hat_j(lam) - 1|.

    |1 - nu_hat_j(lam)| <= 2 pi |lam| max(B_j) / P_j < 2 pi |lam| / P_{j-1}, and
    P_j >= 2 P_{j-1}, so the remaining factors deviate by at most
    S = 4 pi |lam| / P_level in total and the product by at most e^S - 1.
    """
    s = 4.0 * math.pi * float(abs(lam) / tower.product(level))
    return math.expm1(s) if s < 700.0 else math.inf


def mu_tail_hat(
    tower: Tower,
    n: int,
    lam,
    tail_tol: float = DEFAULT_TAIL_TOL,
    depth: Optional[int] = None,
    max_depth: int = MAX_TAIL_DEPTH,
) -> TailValue:
    """Transform of mu_{>n} = nu_{n+1} * nu_{n+2} * ... at ``lam``.

    Factors are multiplied until the certified bound on the omitted ones is
    at most ``tail_tol``; with ``depth`` given, exactly that many factors are
    used and the bound for that depth is returned instead.
    """
    if tail_tol <= 0:
        raise ValueError("tail_tol must be positive")
    lam = to_fraction(lam)
    if lam == 0:
        return TailValue(1.0 + 0.0j, 0.0, 0)
    value = 1.0 + 0.0j
    d = 0
    while True:
        d += 1
        value *= nu_hat(tower, n + d, lam)
        bound = tail_bound(tower, n + d, lam) + _ROUNDING * d
        if depth is not None:
            if d == depth:
                return TailValue(value, bound, d)
        elif bound <= tail_tol:
            return TailValue(value, bound, d)
        if d >= max_depth:
            raise TailError(
                f"tail bound {bound:.3e} still above {tail_tol:.1e} after {d} factors "
                f"(level {n}, lambda {lam}); lambda is too large for this level"
            )


@dataclass(frozen=True)
class ZeroMembership:
    member: bool
    witness: Optional[int]
    j_max: int


def zero_set_member(tower: Tower, xi, j_max: int) -> ZeroMembership:
    """Least j <= j_max with xi K_j M_j / (N_1...N_j) in Z \\ M_j Z.

    A negative verdict only covers levels up to ``j_max``.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    xi = to_fraction(xi)
    for j in range(1, j_max + 1):
        s = tower.stage(j).structured
        if s is None:
            raise ValueError(f"stage {j} is not structured; the zero set formula needs M, K")
        t = xi * (s.K * s.M) / tower.product(j)
        if t.denominator == 1 and t.numerator % s.M != 0:
            return ZeroMembership(True, j, j_max)
    return ZeroMembership(False, None, j_max)


def _c0_factor(j: int) -> float:
    return (1.0 - math.pi**2 / (6.0 * 4.0**j)) ** 2


@dataclass(frozen=True)
class C0Result:
    value: float
    error: float
    depth: int
    partial_products: tuple


def delta_lower_bound(tower: Optional[Tower] = None, tol: float = 1e-12) -> C0Result:
    """c_0 = prod_{j>=1} (1 - pi^2 / (6 * 4^j))^2, the universal floor for delta(Lambda).

    The product is truncated once the omitted factors are certified to change
    it by less than ``tol``:  prod_{j>J} (1 - x_j)^2 >= exp(-2 sum_{j>J} x_j/(1-x_j))
    and sum_{j>J} x_j/(1-x_j) <= (4/3) x_{J+1}/(1-x_{J+1}).
    """
    if tower is not None and tower.stage(1).N < 2:
        raise ValueError("all N_j must be >= 2")
    partials = []
    prod = 1.0
    j = 0
    while True:
        j += 1
        prod *= _c0_factor(j)
        partials.append(prod)
        x = math.pi**2 / (6.0 * 4.0 ** (j + 1))
        tau = 2.0 * (4.0 / 3.0) * x / (1.0 - x)
        err = -prod * math.expm1(-tau) + _ROUNDING * j
        if err <= tol:
            return C0Result(prod, err, j, tuple(partials))


@dataclass(frozen=True)
class DeltaResult:
    value: float
    argmin: Optional[tuple]
    error: float
    per_level: tuple


def level_tail_abs_sq(tower: Tower, n: int, freqs, tail_tol: float, workers: int = 1) -> list:
    """|mu_hat_{>n}(lam)|^2 for every lam in ``freqs`` (order preserved)."""
    fn = lambda lam: mu_tail_hat(tower, n, lam, tail_tol)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, freqs))
    return [fn(lam) for lam in freqs]


def delta_empirical(
    tower: Tower,
    k_max: int,
    tail_tol: float = DEFAULT_TAIL_TOL,
    budget: int = DELTA_BUDGET,
    workers: int = 1,
) -> DeltaResult:
    """min over k <= k_max and lam in L_k of |mu_hat_{>k}(lam)|^2, with its argmin."""
    from .frame import build_level, level_size

    total = sum(level_size(tower, k) for k in range(1, k_max + 1))
    if total > budget:
        raise BudgetError(f"{total} frequencies across levels 1..{k_max} exceed the budget of {budget}")
    best, where, err = 1.0, None, 0.0
    per_level = []
    for k in range(1, k_max + 1):
        level = build_level(tower, k, budget=budget)
        tails = level_tail_abs_sq(tower, k, level.freqs, tail_tol, workers)
        k_best, k_lam = min(
            ((t.abs_sq, lam) for t, lam in zip(tails, level.freqs)), key=lambda pair: pair[0]
        )
        k_err = max(2.0 * t.error for t in tails)
        per_level.append((k, k_best, k_lam))
        if k_best < best:
            best, where = k_best, (k, k_lam)
        err = max(err, k_err)
    return DeltaResult(best, where, err, tuple(per_level))
