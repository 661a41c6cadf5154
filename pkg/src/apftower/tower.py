"""Almost-Parseval-frame towers: stages, named families, and config loading."""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

from .exact import is_prime, parse_int


class TowerError(ValueError):
    """Invalid tower parameters or configuration."""


class Family(str, Enum):
    STRUCTURED_LIST = "structured-list"
    ODD_PRIME_POWER = "odd-prime-power"
    NONSPECTRAL_4K3 = "nonspectral-4k3"
    QUARTER_CANTOR = "quarter-cantor"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class StructuredParams:
    M: int
    K: int
    alpha: int

    def __post_init__(self):
        if self.M < 2:
            raise TowerError(f"M must be >= 2, got {self.M}")
        if self.K < 1:
            raise TowerError(f"K must be >= 1, got {self.K}")
        if not 0 <= self.alpha < self.M:
            raise TowerError(f"alpha must satisfy 0 <= alpha < M={self.M}, got {self.alpha}")

    @property
    def N(self) -> int:
        return self.M * self.K + self.alpha


@dataclass(frozen=True)
class TowerStage:
    """One level (N, B, L) of a tower; ``structured`` is set for M/K/alpha stages."""

    N: int
    B: tuple
    L: tuple
    structured: Optional[StructuredParams] = None

    def __post_init__(self):
        if self.N < 2:
            raise TowerError(f"N must be >= 2, got {self.N}")
        if list(self.B) != sorted(set(self.B)) or list(self.L) != sorted(set(self.L)):
            raise TowerError("B and L must be sorted and duplicate-free")
        if len(self.B) != len(self.L):
            raise TowerError(f"|B|={len(self.B)} differs from |L|={len(self.L)}")
        if len(self.B) < 2:
            raise TowerError("a stage needs at least two digits")
        if self.B[0] != 0 or self.L[0] != 0:
            raise TowerError("0 must belong to both B and L")
        if self.B[-1] >= self.N:
            raise TowerError(f"B must lie in [0, N={self.N})")
        if self.L[0] < 0:
            raise TowerError("L must be non-negative")
        s = self.structured
        if s is not None:
            if s.N != self.N:
                raise TowerError("structured parameters disagree with N")
            if self.B != tuple(k * s.K for k in range(s.M)) or self.L != tuple(range(s.M)):
                raise TowerError("structured stage must have B = K*{0..M-1}, L = {0..M-1}")

    @property
    def M(self) -> int:
        return len(self.B)

    @property
    def eps_analytic(self) -> Optional[float]:
        s = self.structured
        if s is None:
            return None
        return 2.0 * math.pi * s.alpha * math.sqrt(s.M) / s.K


def build_structured_stage(params: StructuredParams) -> TowerStage:
    return TowerStage(
        N=params.N,
        B=tuple(k * params.K for k in range(params.M)),
        L=tuple(range(params.M)),
        structured=params,
    )


class Tower:
    """Lazy, memoized, immutable sequence of stages indexed from j = 1.

    ``stage(j)`` is pure: the generator is only ever called once per index and
    the memo is guarded by a lock, so towers can be shared across threads.
    """

    def __init__(
        self,
        family: Family,
        generator: Callable[[int], TowerStage],
        description: str,
        config: Optional[dict] = None,
        p: Optional[int] = None,
    ):
        self.family = Family(family)
        self.description = description
        self.config = config
        self.p = p
        self._generator = generator
        self._stages: list[TowerStage] = []
        self._products: list[int] = [1]
        self._lock = threading.Lock()

    def __repr__(self):
        return f"Tower({self.family.value!r}, {self.description!r})"

    def _extend(self, j: int) -> None:
        with self._lock:
            while len(self._stages) < j:
                st = self._generator(len(self._stages) + 1)
                self._stages.append(st)
                self._products.append(self._products[-1] * st.N)

    def stage(self, j: int) -> TowerStage:
        if j < 1:
            raise IndexError("stages are indexed from j = 1")
        if len(self._stages) < j:
            self._extend(j)
        return self._stages[j - 1]

    def stages(self, j_max: int) -> list[TowerStage]:
        self.stage(j_max)
        return self._stages[:j_max]

    def product(self, j: int) -> int:
        """N_1 * ... * N_j (1 for j = 0)."""
        if j < 0:
            raise IndexError("negative level")
        if j and len(self._stages) < j:
            self._extend(j)
        return self._products[j]

    def is_structured(self, j_max: int) -> bool:
        return all(st.structured is not None for st in self.stages(j_max))


def _checked_prime(p, family: Family) -> int:
    p = parse_int(p, "p")
    if not is_prime(p):
        raise TowerError(f"p={p} is not prime")
    if p == 2:
        raise TowerError("p must be an odd prime")
    if family is Family.NONSPECTRAL_4K3 and p % 4 != 3:
        raise TowerError(f"p={p} is not congruent to 3 mod 4")
    return p


def _halved_stage(N: int) -> TowerStage:
    return build_structured_stage(StructuredParams(M=2, K=(N - 1) // 2, alpha=1))


def make_family_tower(family, p=None, stages=None, explicit_stages=None) -> Tower:
    """Build one of the named tower families.

    ``stages`` (structured-list) is a sequence of :class:`StructuredParams`;
    ``explicit_stages`` (explicit) is a sequence of :class:`TowerStage`.
    Finite lists are extended periodically, so stage j uses entry
    ``(j - 1) mod len``.
    """
    family = Family(family)
    if family in (Family.ODD_PRIME_POWER, Family.NONSPECTRAL_4K3):
        if p is None:
            raise TowerError(f"family {family.value} requires a prime p")
        p = _checked_prime(p, family)
        if family is Family.ODD_PRIME_POWER:
            gen = lambda j: _halved_stage(p**j)
            desc = f"odd-prime-power tower N_j = {p}^j, B_j = {{0, ({p}^j-1)/2}}"
        else:
            gen = lambda j: _halved_stage(p ** (2 * j - 1))
            desc = f"nonspectral tower N_j = {p}^(2j-1), B_j = {{0, ({p}^(2j-1)-1)/2}}"
        config = {"family": family.value, "p": str(p)}
        return Tower(family, gen, desc, config, p=p)

    if family is Family.QUARTER_CANTOR:
        st = build_structured_stage(StructuredParams(M=2, K=2, alpha=0))
        config = {"family": family.value}
        return Tower(family, lambda j: st, "quarter Cantor tower N_j = 4, B_j = {0, 2}", config)

    if family is Family.STRUCTURED_LIST:
        if not stages:
            raise TowerError("structured-list family requires a non-empty 'stages' list")
        built = [build_structured_stage(s) for s in stages]
        config = {
            "family": family.value,
            "stages": [{"M": str(s.M), "K": str(s.K), "alpha": str(s.alpha)} for s in stages],
        }
        desc = f"structured list of {len(built)} stage(s), periodically extended"
        return Tower(family, lambda j: built[(j - 1) % len(built)], desc, config)

    if not explicit_stages:
        raise TowerError("explicit family requires a non-empty 'explicit_stages' list")
    built = list(explicit_stages)
    config = {
        "family": family.value,
        "explicit_stages": [
            {"N": str(s.N), "B": [str(b) for b in s.B], "L": [str(x) for x in s.L]} for s in built
        ],
    }
    desc = f"explicit list of {len(built)} stage(s), periodically extended"
    return Tower(family, lambda j: built[(j - 1) % len(built)], desc, config)


_ALLOWED_KEYS = {"family", "p", "stages", "explicit_stages"}


def tower_from_config(cfg: dict) -> Tower:
    """Validate a decoded JSON tower configuration and build the tower."""
    if not isinstance(cfg, dict):
        raise TowerError("tower config must be a JSON object")
    unknown = sorted(set(cfg) - _ALLOWED_KEYS)
    if unknown:
        raise TowerError(f"unknown field(s) in tower config: {', '.join(unknown)}")
    if "family" not in cfg:
        raise TowerError("missing field: family")
    try:
        family = Family(cfg["family"])
    except ValueError:
        raise TowerError(f"field 'family': unknown family {cfg['family']!r}") from None

    needs = {
        Family.ODD_PRIME_POWER: {"p"},
        Family.NONSPECTRAL_4K3: {"p"},
        Family.QUARTER_CANTOR: set(),
        Family.STRUCTURED_LIST: {"stages"},
        Family.EXPLICIT: {"explicit_stages"},
    }[family]
    extra = sorted(set(cfg) - {"family"} - needs)
    if extra:
        raise TowerError(f"field(s) not valid for family {family.value}: {', '.join(extra)}")
    missing = sorted(needs - set(cfg))
    if missing:
        raise TowerError(f"missing field(s) for family {family.value}: {', '.join(missing)}")

    try:
        if family is Family.STRUCTURED_LIST:
            params = []
            for i, s in enumerate(_as_list(cfg["stages"], "stages")):
                _check_keys(s, {"M", "K", "alpha"}, f"stages[{i}]")
                params.append(
                    StructuredParams(
                        M=parse_int(s["M"], f"stages[{i}].M"),
                        K=parse_int(s["K"], f"stages[{i}].K"),
                        alpha=parse_int(s["alpha"], f"stages[{i}].alpha"),
                    )
                )
            return make_family_tower(family, stages=params)
        if family is Family.EXPLICIT:
            built = []
            for i, s in enumerate(_as_list(cfg["explicit_stages"], "explicit_stages")):
                where = f"explicit_stages[{i}]"
                _check_keys(s, {"N", "B", "L"}, where)
                built.append(
                    TowerStage(
                        N=parse_int(s["N"], f"{where}.N"),
                        B=tuple(parse_int(b, f"{where}.B") for b in _as_list(s["B"], f"{where}.B")),
                        L=tuple(parse_int(x, f"{where}.L") for x in _as_list(s["L"], f"{where}.L")),
                    )
                )
            return make_family_tower(family, explicit_stages=built)
        return make_family_tower(family, p=cfg.get("p"))
    except TowerError:
        raise
    except ValueError as exc:
        raise TowerError(str(exc)) from None


def _as_list(value, name):
    if not isinstance(value, list) or not value:
        raise TowerError(f"field '{name}' must be a non-empty list")
    return value


def _check_keys(obj, keys, where):
    if not isinstance(obj, dict):
        raise TowerError(f"field '{where}' must be an object")
    unknown = sorted(set(obj) - keys)
    if unknown:
        raise TowerError(f"unknown field(s) in {where}: {', '.join(unknown)}")
    missing = sorted(keys - set(obj))
    if missing:
        raise TowerError(f"missing field(s) in {where}: {', '.join(missing)}")


def load_tower_config(path) -> Tower:
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TowerError(f"{path}: invalid JSON ({exc})") from None
    return tower_from_config(cfg)


@dataclass
class SummabilityReport:
    mode: str
    terms: list
    partial_sums: list
    flagged: list
    tail_bound: Optional[float] = None
    tail_note: str = ""
    missing: list = field(default_factory=list)


def _tail_ratio(tower: Tower) -> Optional[int]:
    # N_{j+1} - 1 >= r (N_j - 1) along the prime-power families
    if tower.family is Family.ODD_PRIME_POWER:
        return tower.p
    if tower.family is Family.NONSPECTRAL_4K3:
        return tower.p**2
    return None


def summability_report(tower: Tower, j_max: int, mode: str = "analytic") -> SummabilityReport:
    """Partial sums of the per-stage deviations, flagging every stage with eps >= 1.

    ``mode="analytic"`` uses 2*pi*alpha*sqrt(M)/K; ``mode="measured"`` uses the
    singular-value deviation of the stage matrix. For the prime-power families a
    closed-form geometric bound on the remaining tail is attached.
    """
    if j_max < 1:
        raise TowerError("j_max must be >= 1")
    if mode not in ("analytic", "measured"):
        raise TowerError(f"unknown mode {mode!r}")

    terms: list = []
    missing = []
    for j, st in enumerate(tower.stages(j_max), start=1):
        if mode == "analytic":
            eps = st.eps_analytic
            if eps is None:
                missing.append(j)
        else:
            from .stage import measure_stage

            eps = measure_stage(st)
        terms.append(eps)

    partial, acc = [], 0.0
    for eps in terms:
        acc += eps or 0.0
        partial.append(acc)
    flagged = [j for j, eps in enumerate(terms, start=1) if eps is not None and eps >= 1.0]

    report = SummabilityReport(mode, terms, partial, flagged, missing=missing)
    if tower.family is Family.QUARTER_CANTOR:
        report.tail_bound = 0.0
        report.tail_note = "alpha_j = 0 for every stage; all deviations vanish"
    r = _tail_ratio(tower)
    if r is not None:
        n_next = tower.stage(j_max + 1).N
        geo = r / (r - 1)
        if mode == "analytic":
            # eps_j = 4*pi*sqrt(2)/(N_j - 1), terms shrink by at least 1/r
            report.tail_bound = 4.0 * math.pi * math.sqrt(2.0) / (n_next - 1) * geo
            report.tail_note = "sum_{j>J} eps_j <= 4*pi*sqrt(2)/(N_{J+1}-1) * r/(r-1)"
        else:
            # M = 2 stage: eps_hat_j <= |cos(pi K_j/N_j)| = sin(pi/(2 N_j)) <= pi/(2 N_j)
            report.tail_bound = math.pi / (2.0 * n_next) * geo
            report.tail_note = "sum_{j>J} eps_hat_j <= pi/(2 N_{J+1}) * r/(r-1)"
        report.tail_note += f" with r = {r}"
    return report
