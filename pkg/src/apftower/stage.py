"""Stage matrices F_j, H_j and their measured deviations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exact import expi_ratio
from .linalg import extreme_singular_values, operator_norm
from .tower import TowerStage

STAGE_CAP = 256


class StageSizeError(ValueError):
    """Stage digit count exceeds the dense-eigensolve cap."""


@dataclass(frozen=True)
class StageMatrices:
    F: np.ndarray
    H: Optional[np.ndarray]
    sigma_min: float
    sigma_max: float
    dev_op: Optional[float]
    dev_frob: Optional[float]

    @property
    def eps_measured(self) -> float:
        return max(1.0 - self.sigma_min, self.sigma_max - 1.0)


def stage_matrix(N: int, B, L, den: Optional[int] = None) -> np.ndarray:
    """(1/sqrt M) [exp(2 pi i b lam / den)] with rows lam in L, columns b in B.

    ``den`` defaults to N; passing M*K gives the comparison matrix H.
    """
    den = N if den is None else den
    m = len(B)
    out = np.empty((len(L), m), dtype=complex)
    for r, lam in enumerate(L):
        for c, b in enumerate(B):
            out[r, c] = expi_ratio(b * lam, den)
    return out / math.sqrt(m)


def build_stage_matrices(stage: TowerStage, cap: int = STAGE_CAP) -> StageMatrices:
    if stage.M > cap:
        raise StageSizeError(f"stage has M={stage.M} digits, above the cap of {cap}")
    F = stage_matrix(stage.N, stage.B, stage.L)
    smin, smax = extreme_singular_values(F)
    s = stage.structured
    if s is None:
        return StageMatrices(F, None, smin, smax, None, None)
    H = stage_matrix(stage.N, stage.B, stage.L, den=s.M * s.K)
    diff = F - H
    return StageMatrices(
        F=F,
        H=H,
        sigma_min=smin,
        sigma_max=smax,
        dev_op=operator_norm(diff),
        dev_frob=float(np.linalg.norm(diff)),
    )


def measure_stage(stage: TowerStage) -> float:
    """Measured deviation eps_hat = max(1 - sigma_min, sigma_max - 1)."""
    F = stage_matrix(stage.N, stage.B, stage.L)
    smin, smax = extreme_singular_values(F)
    return max(1.0 - smin, smax - 1.0)


@dataclass(frozen=True)
class UnitaryCheck:
    passed: bool
    max_deviation: float


def verify_unitary(H, tol: float = 1e-12) -> UnitaryCheck:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H must be square")
    dev = float(np.max(np.abs(H.conj().T @ H - np.eye(H.shape[0]))))
    return UnitaryCheck(dev <= tol, dev)


@dataclass(frozen=True)
class DeviationCheck:
    passed: bool
    dev_op: float
    dev_frob: float
    frob_sq_bound: float
    op_bound: float
    checks: dict


def verify_deviation_bound(sm: StageMatrices, stage: TowerStage, tol: float = 1e-9) -> DeviationCheck:
    """Check ||F-H|| <= ||F-H||_F, ||F-H||_F^2 <= 4 pi^2 M^3 alpha^2 / N^2, ||F-H|| <= 2 pi alpha sqrt(M)/K."""
    s = stage.structured
    if s is None or sm.dev_op is None:
        raise ValueError("deviation bounds need a structured stage")
    frob_sq_bound = 4.0 * math.pi**2 * s.M**3 * s.alpha**2 / s.N**2
    op_bound = 2.0 * math.pi * s.alpha * math.sqrt(s.M) / s.K
    checks = {
        "op_le_frob": sm.dev_op <= sm.dev_frob + tol,
        "frob_sq_le_bound": sm.dev_frob**2 <= frob_sq_bound + tol,
        "op_le_eps": sm.dev_op <= op_bound + tol,
    }
    return DeviationCheck(all(checks.values()), sm.dev_op, sm.dev_frob, frob_sq_bound, op_bound, checks)
