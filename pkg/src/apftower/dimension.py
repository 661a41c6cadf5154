"""Hausdorff-dimension quotients log(M_1...M_j) / log(N_1...N_j) of the support."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

from .tower import Family, Tower


@dataclass(frozen=True)
class DimensionTrace:
    log_m: tuple  # cumulative log(M_1...M_j)
    log_n: tuple  # cumulative log(N_1...N_j)
    quotients: tuple
    window: int
    liminf_estimate: float
    closed_form_limit: Optional[float] = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "logM_cum", "logN_cum", "q_j"])
        for j, (lm, ln, q) in enumerate(zip(self.log_m, self.log_n, self.quotients), start=1):
            w.writerow([j, f"{lm:.17g}", f"{ln:.17g}", f"{q:.17g}"])
        return buf.getvalue()


def dimension_trace(tower: Tower, j_max: int, window: int = 1) -> DimensionTrace:
    """Quotients q_j for j = 1..j_max; the liminf estimate is the minimum of the last ``window``.

    Logs are summed stage by stage, so the products never have to be formed.
    """
    if not 1 <= window <= j_max:
        raise ValueError("need j_max >= window >= 1")
    log_m, log_n, qs = [], [], []
    am = an = 0.0
    for st in tower.stages(j_max):
        am += math.log(st.M)
        an += math.log(st.N)
        log_m.append(am)
        log_n.append(an)
        qs.append(am / an)
    limit = None
    if tower.family in (Family.ODD_PRIME_POWER, Family.NONSPECTRAL_4K3):
        limit = 0.0
    elif tower.family is Family.QUARTER_CANTOR:
        limit = 0.5
    return DimensionTrace(tuple(log_m), tuple(log_n), tuple(qs), window, min(qs[-window:]), limit)
