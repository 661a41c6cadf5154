"""Level-n atoms and frequencies, the level analysis operator, and frame-bound certification.

Atoms of B_n are stored as integer numerators over P_n = N_1...N_n and both
atoms and frequencies are ordered with the newest digit varying slowest, so
the first M_1...M_{n-1} entries of level n are exactly level n-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .exact import TWO_PI, expi_ratio, to_fraction
from .linalg import eigvalsh
from .measure import (
    DEFAULT_TAIL_TOL,
    BudgetError,
    delta_lower_bound,
    level_tail_abs_sq,
    mu_tail_hat,
)
from .stage import build_stage_matrices
from .tower import Tower

LEVEL_BUDGET = 4096


def level_size(tower: Tower, n: int) -> int:
    return math.prod(st.M for st in tower.stages(n)) if n else 1


@dataclass(frozen=True)
class SpectrumLevel:
    n: int
    denominator: int  # P_n
    atom_nums: tuple  # atom = atom_nums[i] / P_n
    freqs: tuple
    atom_digits: tuple
    freq_digits: tuple

    @property
    def size(self) -> int:
        return len(self.freqs)

    @property
    def atoms(self) -> list:
        return [Fraction(a, self.denominator) for a in self.atom_nums]

    def atom_index(self, digits) -> int:
        return self.atom_digits.index(tuple(digits))

    def freq_index(self, digits) -> int:
        return self.freq_digits.index(tuple(digits))


def build_level(tower: Tower, n: int, budget: int = LEVEL_BUDGET) -> SpectrumLevel:
    """Exact B_n = sum_j B_j / P_j and L_n = sum_j P_{j-1} L_j with digit maps."""
    if n < 1:
        raise ValueError("level n must be >= 1")
    size = level_size(tower, n)
    if size > budget:
        raise BudgetError(f"level {n} has {size} atoms, above the budget of {budget}")
    P = tower.product(n)
    nums, freqs = [0], [0]
    adig, fdig = [()], [()]
    for j, st in enumerate(tower.stages(n), start=1):
        shift = P // tower.product(j)  # b / P_j = b * shift / P_n
        base = tower.product(j - 1)
        nums = [a + b * shift for b in st.B for a in nums]
        adig = [d + (b,) for b in st.B for d in adig]
        freqs = [lam + base * l for l in st.L for lam in freqs]
        fdig = [d + (l,) for l in st.L for d in fdig]
    if len(set(nums)) != size or len(set(freqs)) != size:
        raise ValueError(f"level {n}: digit expansions collide")
    return SpectrumLevel(n, P, tuple(nums), tuple(freqs), tuple(adig), tuple(fdig))


def analysis_matrix(level: SpectrumLevel) -> np.ndarray:
    """E[lam, b] = exp(-2 pi i b lam) / sqrt(M_n), phases reduced exactly mod 1."""
    P = level.denominator
    lam = np.array(level.freqs, dtype=object)
    num = np.array(level.atom_nums, dtype=object)
    residues = np.outer(lam, num) % P
    turns = (residues / P).astype(float)
    turns[turns >= 0.5] -= 1.0
    return np.exp(-1j * TWO_PI * turns) / math.sqrt(level.size)


@dataclass
class LevelOperator:
    level: SpectrumLevel
    E: np.ndarray
    D: Optional[np.ndarray] = None
    tail_errors: Optional[np.ndarray] = None

    @property
    def G(self) -> np.ndarray:
        return self.E if self.D is None else self.D[:, None] * self.E


def level_operator(
    tower: Tower,
    n: int,
    weighted: bool = True,
    tail_tol: float = DEFAULT_TAIL_TOL,
    budget: int = LEVEL_BUDGET,
    workers: int = 1,
) -> LevelOperator:
    level = build_level(tower, n, budget)
    E = analysis_matrix(level)
    if not weighted:
        return LevelOperator(level, E)
    tails = level_tail_abs_sq(tower, n, level.freqs, tail_tol, workers)
    D = np.array([t.value for t in tails])
    errs = np.array([t.error for t in tails])
    return LevelOperator(level, E, D, errs)


@dataclass
class LevelBounds:
    n: int
    weighted: bool
    A: float
    B: float
    window: tuple
    sigma_window: tuple
    eps_measured: list
    passed: bool


def _stage_data(tower: Tower, n: int):
    sms = [build_stage_matrices(st) for st in tower.stages(n)]
    return [sm.eps_measured for sm in sms], [sm.sigma_min for sm in sms], [sm.sigma_max for sm in sms]


def level_frame_bounds(
    tower: Tower,
    n: int,
    weighted: bool = False,
    tail_tol: float = DEFAULT_TAIL_TOL,
    tol: float = 1e-9,
    budget: int = LEVEL_BUDGET,
    workers: int = 1,
) -> LevelBounds:
    """Extreme eigenvalues (A_n, B_n) of G^H G (weighted) or E^H E (unweighted).

    In unweighted mode the result is checked against the product window
    [prod (1 - eps_hat_j)^2, prod (1 + eps_hat_j)^2] and the sharper
    [prod sigma_min(F_j)^2, prod sigma_max(F_j)^2].
    """
    op = level_operator(tower, n, weighted, tail_tol, budget, workers)
    G = op.G
    ev = eigvalsh(G.conj().T @ G)
    A, B = float(ev[0]), float(ev[-1])
    eps, smin, smax = _stage_data(tower, n)
    lo = math.prod((1.0 - e) ** 2 for e in eps)
    hi = math.prod((1.0 + e) ** 2 for e in eps)
    slo = math.prod(s * s for s in smin)
    shi = math.prod(s * s for s in smax)
    passed = True
    if not weighted:
        passed = lo - tol <= A and B <= hi + tol and slo - tol <= A and B <= shi + tol
    return LevelBounds(n, weighted, A, B, (lo, hi), (slo, shi), eps, passed)


@dataclass(frozen=True)
class StepFunction:
    """f = sum_b w_b 1_{K_b} over the level-n cylinders, indexed like ``build_level``."""

    n: int
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=complex))

    def lift(self, tower: Tower, m: int) -> "StepFunction":
        """The same function viewed as a level-m step function (m >= n)."""
        if m < self.n:
            raise ValueError("can only lift to a finer level")
        reps = level_size(tower, m) // level_size(tower, self.n)
        return StepFunction(m, np.tile(self.weights, reps))

    def norm_sq(self) -> float:
        """Integral of |f|^2 d mu = (1/M_n) sum |w_b|^2."""
        return float(np.sum(np.abs(self.weights) ** 2) / len(self.weights))


@dataclass(frozen=True)
class Coefficient:
    value: complex
    error: float


def step_coefficient(
    tower: Tower, f: StepFunction, lam, tail_tol: float = DEFAULT_TAIL_TOL, level: Optional[SpectrumLevel] = None
) -> Coefficient:
    """Integral of f(x) exp(-2 pi i lam x) d mu(x) for a level-n step function.

    Equals (1/M_n) mu_hat_{>n}(lam) sum_b w_b exp(-2 pi i b lam); ``error``
    bounds the effect of truncating the tail product.
    """
    lam = to_fraction(lam)
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    level = level or build_level(tower, f.n)
    if len(f.weights) != level.size:
        raise ValueError(f"expected {level.size} weights, got {len(f.weights)}")
    den = level.denominator * lam.denominator
    s = sum(
        w * expi_ratio(-a * lam.numerator, den) for w, a in zip(f.weights, level.atom_nums)
    )
    tail = mu_tail_hat(tower, f.n, lam, tail_tol)
    scale = abs(s) / level.size
    return Coefficient(tail.value * s / level.size, scale * tail.error)


@dataclass
class LevelCertificate:
    n: int
    A: float
    B: float
    A_unweighted: float
    B_unweighted: float
    window: tuple
    delta_emp: float
    delta_argmin: int
    eps_measured: list
    degenerate: bool
    passed: bool


@dataclass
class FrameCertificate:
    levels: list
    c0: float
    c0_applies: bool
    limit_window: tuple
    limit_note: str
    tolerances: dict
    failure: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return all(lv.passed for lv in self.levels)


def certify_level(
    tower: Tower,
    n: int,
    tail_tol: float = DEFAULT_TAIL_TOL,
    tol: float = 1e-8,
    budget: int = LEVEL_BUDGET,
    workers: int = 1,
) -> LevelCertificate:
    op = level_operator(tower, n, True, tail_tol, budget, workers)
    E, G = op.E, op.G
    ev_u = eigvalsh(E.conj().T @ E)
    ev_w = eigvalsh(G.conj().T @ G)
    eps, _, _ = _stage_data(tower, n)
    mags = np.abs(op.D) ** 2
    i_min = int(np.argmin(mags))
    delta = float(mags[i_min])
    lo = delta * math.prod((1.0 - e) ** 2 for e in eps)
    hi = math.prod((1.0 + e) ** 2 for e in eps)
    A, B = float(ev_w[0]), float(ev_w[-1])
    return LevelCertificate(
        n=n,
        A=A,
        B=B,
        A_unweighted=float(ev_u[0]),
        B_unweighted=float(ev_u[-1]),
        window=(lo, hi),
        delta_emp=delta,
        delta_argmin=op.level.freqs[i_min],
        eps_measured=eps,
        degenerate=lo <= 0.0,
        passed=lo - tol <= A and B <= hi + tol,
    )


def certify_frame(
    tower: Tower,
    n_max: int,
    tail_tol: float = DEFAULT_TAIL_TOL,
    tol: float = 1e-8,
    budget: int = LEVEL_BUDGET,
    workers: int = 1,
) -> FrameCertificate:
    """Certify the level-n frame windows for n = 1..n_max.

    Level n passes when delta_n prod (1 - eps_hat_j)^2 - tol <= A_n and
    B_n <= prod (1 + eps_hat_j)^2 + tol, where delta_n is the smallest
    |mu_hat_{>n}(lam)|^2 over L_n.
    """
    from .tower import summability_report

    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if level_size(tower, n_max) > budget:
        raise BudgetError(
            f"level {n_max} has {level_size(tower, n_max)} atoms, above the budget of {budget}"
        )
    levels = [certify_level(tower, n, tail_tol, tol, budget, workers) for n in range(1, n_max + 1)]
    c0 = delta_lower_bound(tower).value
    c0_applies = tower.is_structured(n_max)

    eps = levels[-1].eps_measured
    lo = math.prod((1.0 - e) ** 2 for e in eps)
    hi = math.prod((1.0 + e) ** 2 for e in eps)
    summ = summability_report(tower, n_max, "measured")
    if summ.tail_bound is not None and summ.tail_bound < 1.0:
        t = summ.tail_bound
        floor = c0 if c0_applies else min(lv.delta_emp for lv in levels)
        limit = (floor * lo * (1.0 - t) ** 2, hi * math.exp(2.0 * t))
        note = f"full products bounded via the measured tail: {summ.tail_note}"
    else:
        floor = c0 if c0_applies else min(lv.delta_emp for lv in levels)
        limit = (floor * lo, hi)
        note = f"products truncated at j = {n_max}; no closed-form tail bound for this family"

    failure = None
    for lv in levels:
        if not lv.passed:
            failure = {"level": lv.n, "lambda": lv.delta_argmin, "A": lv.A, "B": lv.B, "window": lv.window}
            break
    return FrameCertificate(
        levels=levels,
        c0=c0,
        c0_applies=c0_applies,
        limit_window=limit,
        limit_note=note,
        tolerances={"tail_tol": tail_tol, "tol": tol},
        failure=failure,
    )

