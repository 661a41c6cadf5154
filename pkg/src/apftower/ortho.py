"""Zero sets of mu_hat, mutually orthogonal exponentials, and the parity obstruction.

For structured towers the zero set is

    Z(mu_hat) = union_j  P_j / (K_j M_j) * (Z \\ M_j Z),      P_j = N_1...N_j,

and {e_lam : lam in S} is mutually orthogonal iff S - S lies in Z u {0}.
All arithmetic is on exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .exact import to_fraction
from .measure import zero_set_member
from .tower import Tower

POOL_CAP = 2000
MAX_REPORTED_CLIQUES = 1000


@dataclass(frozen=True, order=True)
class ZeroSetElement:
    """xi = P_j / (K_j M_j) * (r + M_j q) with 0 < r < M_j."""

    xi: Fraction
    j: int
    r: int
    q: int

    def check(self, tower: Tower) -> None:
        s = tower.stage(self.j).structured
        if s is None:
            raise ValueError(f"stage {self.j} is not structured")
        if not 0 < self.r < s.M:
            raise ValueError(f"residue r={self.r} outside (0, {s.M})")
        expected = Fraction(tower.product(self.j), s.K * s.M) * (self.r + s.M * self.q)
        if expected != self.xi:
            raise ValueError(f"witness (j={self.j}, r={self.r}, q={self.q}) does not reconstruct {self.xi}")


def zero_element(tower: Tower, j: int, m: int) -> ZeroSetElement:
    """The level-j zero P_j m / (K_j M_j), m not divisible by M_j."""
    s = tower.stage(j).structured
    if s is None:
        raise ValueError(f"stage {j} is not structured")
    if m % s.M == 0:
        raise ValueError(f"m={m} is divisible by M_{j}={s.M}")
    xi = Fraction(tower.product(j) * m, s.K * s.M)
    return ZeroSetElement(xi, j, m % s.M, m // s.M)


def witness(tower: Tower, xi, j_max: int) -> Optional[ZeroSetElement]:
    """Canonical (least-level) witness of xi in Z(mu_hat), or None up to j_max."""
    xi = to_fraction(xi)
    hit = zero_set_member(tower, xi, j_max)
    if not hit.member:
        return None
    s = tower.stage(hit.witness).structured
    m = xi * s.K * s.M / tower.product(hit.witness)
    return zero_element(tower, hit.witness, m.numerator)


def enumerate_zero_set(tower: Tower, j_max: int, q_bound: int) -> list:
    """Zeros +-(r + M_j q) P_j / (K_j M_j) for j <= j_max, 0 < r < M_j, 0 <= q <= q_bound.

    Duplicates across levels keep the least level as witness; output is
    sorted by value.
    """
    if j_max < 1 or q_bound < 0:
        raise ValueError("need j_max >= 1 and q_bound >= 0")
    found: dict = {}
    for j in range(1, j_max + 1):
        s = tower.stage(j).structured
        if s is None:
            raise ValueError(f"stage {j} is not structured")
        for q in range(q_bound + 1):
            for r in range(1, s.M):
                for m in (r + s.M * q, -(r + s.M * q)):
                    el = zero_element(tower, j, m)
                    if el.xi not in found:
                        found[el.xi] = el
    return [found[x] for x in sorted(found)]


def zero_pool(tower: Tower, j_max: int, q_bound: int) -> list:
    """Candidate frequencies for the orthogonality search: 0 plus the enumerated zeros."""
    return sorted({Fraction(0)} | {el.xi for el in enumerate_zero_set(tower, j_max, q_bound)})


# -- exact branch and bound ---------------------------------------------------


def _max_clique_size(adj: list, cap: int) -> int:
    best = 0

    class _Done(Exception):
        pass

    def expand(size: int, cand: int) -> None:
        nonlocal best
        if size > best:
            best = size
            if best >= cap:
                raise _Done
        while cand:
            if size + cand.bit_count() <= best:
                return
            v = cand.bit_length() - 1
            cand &= ~(1 << v)
            expand(size + 1, cand & adj[v])

    try:
        expand(0, (1 << len(adj)) - 1)
    except _Done:
        pass
    return best


def _cliques_of_size(adj: list, t: int, limit: int) -> tuple:
    out: list = []

    class _Full(Exception):
        pass

    def rec(chosen: list, cand: int) -> None:
        if len(chosen) == t:
            out.append(tuple(chosen))
            if len(out) >= limit:
                raise _Full
            return
        while cand:
            if len(chosen) + cand.bit_count() < t:
                return
            v = (cand & -cand).bit_length() - 1
            cand &= cand - 1
            rec(chosen + [v], cand & adj[v])

    try:
        rec([], (1 << len(adj)) - 1)
    except _Full:
        return out, True
    return out, False


def max_cliques(adj: list, max_size: int, limit: int = MAX_REPORTED_CLIQUES) -> tuple:
    """All cliques of the largest size found (capped at ``max_size``).

    ``adj[v]`` is a bitmask of neighbours. Returns (size, cliques, truncated),
    cliques as lexicographically ordered index tuples.
    """
    if not adj:
        return 0, [], False
    size = _max_clique_size(adj, max_size)
    cliques, truncated = _cliques_of_size(adj, size, limit)
    return size, cliques, truncated


# -- parity obstruction ---------------------------------------------------------


@dataclass(frozen=True)
class ParityCertificate:
    """Exact evaluation of both sides of the three-difference relation.

    ``verdict`` is "contradiction" when the reduced left side is odd and the
    right side even (so the three witnesses cannot describe one triple, for
    any choice of the q's), or "inapplicable" when some stage involved has
    M != 2, alpha != 1, or an even K.
    """

    verdict: str
    levels: tuple
    lhs: Optional[int] = None
    rhs: Optional[int] = None
    identity_holds: Optional[bool] = None
    reason: str = ""


def parity_hypotheses(tower: Tower, upto: int) -> Optional[str]:
    """None when stages 1..upto all have M = 2, alpha = 1 and odd K, else the first violation."""
    for j, st in enumerate(tower.stages(upto), start=1):
        s = st.structured
        if s is None:
            return f"stage {j} is not structured"
        if s.M != 2:
            return f"M_{j} = {s.M} != 2"
        if s.alpha != 1:
            return f"alpha_{j} = {s.alpha} != 1"
        if s.K % 2 == 0:
            return f"K_{j} = {s.K} is even"
    return None


def parity_certificate(
    tower: Tower, e1: ZeroSetElement, e2: ZeroSetElement, e3: ZeroSetElement
) -> ParityCertificate:
    """Witnesses e1, e2, e3 for lam1-lam2, lam3-lam2, lam1-lam3.

    Multiplying (e1 - e2 = e3) through by K_j K_k K_l M_j M_k M_l gives

        P_j K_k K_l M_k M_l r_j - P_k K_j K_l M_j M_l r_k - P_l K_j K_k M_j M_k r_l
          = M_j M_k M_l (P_l K_j K_k q_l - P_k K_j K_l q_k - P_j K_k K_l q_j),

    which holds iff the difference identity does. With every M = 2 both
    sides are divided by 4 before the parities are compared.
    """
    for e in (e1, e2, e3):
        e.check(tower)
    levels = (e1.j, e2.j, e3.j)
    why = parity_hypotheses(tower, max(levels))
    if why is not None:
        return ParityCertificate("inapplicable", levels, reason=why)

    (j, rj, qj), (k, rk, qk), (l, rl, ql) = ((e.j, e.r, e.q) for e in (e1, e2, e3))
    sj, sk, sl = (tower.stage(x).structured for x in levels)
    Pj, Pk, Pl = (tower.product(x) for x in levels)
    Kj, Kk, Kl = sj.K, sk.K, sl.K
    Mj, Mk, Ml = sj.M, sk.M, sl.M
    lhs = Pj * Kk * Kl * Mk * Ml * rj - Pk * Kj * Kl * Mj * Ml * rk - Pl * Kj * Kk * Mj * Mk * rl
    rhs = Mj * Mk * Ml * (Pl * Kj * Kk * ql - Pk * Kj * Kl * qk - Pj * Kk * Kl * qj)
    identity = e1.xi - e2.xi == e3.xi
    if (lhs == rhs) != identity:
        raise AssertionError("relation and difference identity disagree")
    lhs4, rhs4 = lhs // 4, rhs // 4
    if lhs4 % 2 == 1 and rhs4 % 2 == 0:
        return ParityCertificate(
            "contradiction", levels, lhs4, rhs4, identity, "reduced left side odd, right side even"
        )
    return ParityCertificate("undecided", levels, lhs4, rhs4, identity, "parities agree")


# -- search -------------------------------------------------------------------


@dataclass
class OrthoSearchResult:
    pool_size: int
    j_max: int
    max_size: int
    edges: int
    clique_size: int
    cliques: list
    truncated: bool
    open_triples: int = 0
    certified_triples: int = 0
    certificates: list = field(default_factory=list)


def _nearest_zero(tower: Tower, level: int, target: Fraction) -> ZeroSetElement:
    s = tower.stage(level).structured
    scale = Fraction(tower.product(level), s.K * s.M)
    m = round(target / scale)
    if m % s.M == 0:
        m += 1 if target / scale >= m else -1
    return zero_element(tower, level, m)


def search_orthogonal_sets(
    tower: Tower,
    pool,
    max_size: int,
    j_max: int,
    cap: int = POOL_CAP,
    certify: bool = True,
    keep_certificates: int = 10,
) -> OrthoSearchResult:
    """Exhaustive search for the largest mutually orthogonal subsets of ``pool``.

    Two frequencies are joined when their difference lies in Z(mu_hat) at some
    level <= j_max, so an absent edge is only absent up to that horizon.
    When ``certify`` is set and the tower meets the parity hypotheses, every
    open triple (lam1 - lam2 and lam3 - lam2 in Z, lam1 - lam3 not found) gets a
    parity certificate against each level l <= j_max.
    """
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    verts = sorted({to_fraction(x) for x in pool})
    if len(verts) > cap:
        raise ValueError(f"pool of {len(verts)} vertices exceeds the cap of {cap}")
    n = len(verts)
    adj = [0] * n
    wit: dict = {}
    for a in range(n):
        for b in range(a + 1, n):
            w = witness(tower, verts[b] - verts[a], j_max)
            if w is not None:
                adj[a] |= 1 << b
                adj[b] |= 1 << a
                wit[(a, b)] = w
    edges = len(wit)
    size, idx, truncated = max_cliques(adj, max_size)
    result = OrthoSearchResult(
        pool_size=n,
        j_max=j_max,
        max_size=max_size,
        edges=edges,
        clique_size=size,
        cliques=[tuple(verts[i] for i in c) for c in idx],
        truncated=truncated,
    )
    if certify and parity_hypotheses(tower, j_max) is None:
        _certify_open_triples(tower, verts, adj, wit, j_max, result, keep_certificates)
    return result


def _edge_witness(tower, verts, wit, hi, lo, j_max):
    """Witness for verts[hi] - verts[lo]."""
    if hi > lo:
        return wit[(lo, hi)]
    return witness(tower, verts[hi] - verts[lo], j_max)


def _certify_open_triples(tower, verts, adj, wit, j_max, result, keep):
    n = len(verts)
    for c in range(n):
        nbrs = [v for v in range(n) if adj[c] >> v & 1]
        for x in range(len(nbrs)):
            for y in range(x + 1, len(nbrs)):
                a, b = nbrs[x], nbrs[y]
                if adj[a] >> b & 1:
                    continue
                result.open_triples += 1
                e1 = _edge_witness(tower, verts, wit, a, c, j_max)
                e2 = _edge_witness(tower, verts, wit, b, c, j_max)
                target = verts[a] - verts[b]
                certs = [
                    parity_certificate(tower, e1, e2, _nearest_zero(tower, lvl, target))
                    for lvl in range(1, j_max + 1)
                ]
                if all(cert.verdict == "contradiction" for cert in certs):
                    result.certified_triples += 1
                if len(result.certificates) < keep:
                    result.certificates.append(
                        {"triple": (verts[a], verts[c], verts[b]), "certificates": certs}
                    )
