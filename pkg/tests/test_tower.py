from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor

import pytest
from hypothesis import given, strategies as st

from apftower import (
    StructuredParams,
    TowerError,
    build_structured_stage,
    make_family_tower,
    summability_report,
    tower_from_config,
)
from apftower.exact import is_prime, parse_int
from apftower.stage import measure_stage
from apftower.tower import TowerStage, load_tower_config


def test_structured_stage_example():
    st_ = build_structured_stage(StructuredParams(M=2, K=3, alpha=1))
    assert (st_.N, st_.B, st_.L) == (7, (0, 3), (0, 1))
    assert st_.eps_analytic == pytest.approx(2 * math.pi * math.sqrt(2) / 3)
    assert st_.eps_analytic == pytest.approx(2.9619, abs=1e-4)


def test_hadamard_stage_has_zero_eps():
    st_ = build_structured_stage(StructuredParams(M=2, K=2, alpha=0))
    assert (st_.N, st_.B, st_.L, st_.eps_analytic) == (4, (0, 2), (0, 1), 0.0)


@pytest.mark.parametrize("M,K,alpha", [(1, 3, 0), (2, 0, 1), (2, 3, 2), (3, 3, -1)])
def test_structured_params_rejected(M, K, alpha):
    with pytest.raises(TowerError):
        StructuredParams(M=M, K=K, alpha=alpha)


@given(st.integers(2, 40), st.integers(1, 10**30), st.data())
def test_structured_invariants(M, K, data):
    alpha = data.draw(st.integers(0, M - 1))
    s = build_structured_stage(StructuredParams(M, K, alpha))
    assert s.N == M * K + alpha
    assert 0 in s.B and 0 in s.L and len(s.B) == len(s.L) == M
    assert all(0 <= b < s.N for b in s.B)


def test_nonspectral_family_stages(p7):
    s1, s2 = p7.stage(1), p7.stage(2)
    assert (s1.N, s1.structured.K) == (7, 3)
    assert (s2.N, s2.structured.K) == (343, 171)
    for j in range(1, 30):
        s = p7.stage(j).structured
        assert p7.stage(j).N == 7 ** (2 * j - 1)
        assert (s.M, s.alpha) == (2, 1)
        assert s.K == (7 ** (2 * j - 1) - 1) // 2
        assert s.K % 2 == 1


def test_odd_prime_power_family(p7_powers):
    for j in range(1, 12):
        s = p7_powers.stage(j)
        assert s.N == 7**j and s.structured.K == (7**j - 1) // 2 and s.structured.alpha == 1


def test_quarter_cantor_family(qc):
    for j in range(1, 6):
        s = qc.stage(j).structured
        assert (qc.stage(j).N, s.M, s.K, s.alpha) == (4, 2, 2, 0)


@pytest.mark.parametrize("family,p", [("nonspectral-4k3", 5), ("nonspectral-4k3", 13), ("odd-prime-power", 9),
                                      ("odd-prime-power", 2), ("nonspectral-4k3", 15)])
def test_family_preconditions(family, p):
    with pytest.raises(TowerError):
        make_family_tower(family, p=p)


def test_products_are_big_integers(p7):
    assert p7.product(5) == 7 ** (1 + 3 + 5 + 7 + 9)
    assert p7.product(5) > 2**64
    assert p7.product(0) == 1


def test_determinism_and_threaded_memo():
    a = make_family_tower("nonspectral-4k3", p=11)
    b = make_family_tower("nonspectral-4k3", p=11)
    with ThreadPoolExecutor(8) as pool:
        got = list(pool.map(lambda j: a.stage(j), [5, 3, 8, 1, 8, 2] * 4))
    assert got[0] is a.stage(5)
    assert [a.stage(j) for j in range(1, 9)] == [b.stage(j) for j in range(1, 9)]
    assert a.stages(8) is not None and len(a.stages(8)) == 8


def test_is_prime_against_sieve():
    sieve = [True] * 2000
    sieve[0] = sieve[1] = False
    for i in range(2, 45):
        for k in range(i * i, 2000, i):
            sieve[k] = False
    assert [n for n in range(2000) if is_prime(n)] == [n for n in range(2000) if sieve[n]]
    assert is_prime(2**61 - 1) and not is_prime(2**61 + 1)


def test_parse_int_accepts_decimal_strings():
    assert parse_int("123456789012345678901234567890") == 123456789012345678901234567890
    for bad in ("1.5", "0x10", 3.0, True, ""):
        with pytest.raises(ValueError):
            parse_int(bad)


def test_config_round_trip(tmp_path):
    cfg = {"family": "structured-list", "stages": [{"M": "3", "K": "5", "alpha": "2"}, {"M": 2, "K": 9, "alpha": 1}]}
    path = tmp_path / "t.json"
    path.write_text(json.dumps(cfg))
    t = load_tower_config(path)
    assert [t.stage(j).N for j in range(1, 5)] == [17, 19, 17, 19]
    again = tower_from_config(t.config)
    assert [again.stage(j) for j in range(1, 5)] == [t.stage(j) for j in range(1, 5)]


def test_explicit_config():
    t = tower_from_config({"family": "explicit", "explicit_stages": [{"N": "4", "B": ["0", "2"], "L": [0, 2]}]})
    assert t.stage(3) == TowerStage(4, (0, 2), (0, 2))
    assert t.stage(1).eps_analytic is None


@pytest.mark.parametrize(
    "cfg,needle",
    [
        ({"family": "quarter-cantor", "colour": 1}, "colour"),
        ({"family": "nonspectral-4k3"}, "p"),
        ({"family": "odd-prime-power", "p": "7.0"}, "p"),
        ({"family": "quarter-cantor", "p": "7"}, "p"),
        ({"family": "mystery"}, "family"),
        ({"family": "structured-list", "stages": [{"M": 2, "K": 3}]}, "stages[0]"),
        ({"family": "structured-list", "stages": [{"M": 2, "K": 3, "alpha": 1, "z": 0}]}, "z"),
        ({"family": "explicit", "explicit_stages": [{"N": 4, "B": [0, 5], "L": [0, 1]}]}, "B"),
    ],
)
def test_malformed_config_names_field(cfg, needle):
    with pytest.raises(TowerError, match=None) as err:
        tower_from_config(cfg)
    assert needle in str(err.value)


def test_summability_odd_prime_power_p3():
    t = make_family_tower("odd-prime-power", p=3)
    rep = summability_report(t, 30, "analytic")
    for j, eps in enumerate(rep.terms, start=1):
        # 2*pi * alpha sqrt(M)/K with K = (3^j - 1)/2
        assert eps == pytest.approx(2 * math.pi * 2 * math.sqrt(2) / (3**j - 1), rel=1e-14)
    # tail bound dominates a long explicit continuation
    rest = sum(2 * math.pi * 2 * math.sqrt(2) / (3**j - 1) for j in range(31, 200))
    assert rest <= rep.tail_bound
    assert rep.partial_sums[-1] + rep.tail_bound - rep.partial_sums[-1] < 1e-12


def test_summability_quarter_cantor(qc):
    for mode in ("analytic", "measured"):
        rep = summability_report(qc, 6, mode)
        assert rep.partial_sums[-1] == pytest.approx(0.0, abs=1e-14)
        assert rep.flagged == []


def test_summability_flags_analytic_but_not_measured(p7):
    an = summability_report(p7, 3, "analytic")
    me = summability_report(p7, 3, "measured")
    assert an.terms[0] == pytest.approx(2.96, abs=5e-3) and an.flagged == [1]
    assert me.terms[0] == pytest.approx(0.1182, abs=1e-4) and me.flagged == []


@pytest.mark.parametrize("family,p", [("nonspectral-4k3", 7), ("odd-prime-power", 7), ("odd-prime-power", 3)])
def test_measured_tail_bound_holds(family, p):
    t = make_family_tower(family, p=p)
    J = 2
    rep = summability_report(t, J, "measured")
    rest = sum(measure_stage(t.stage(j)) for j in range(J + 1, J + 8))
    assert rest <= rep.tail_bound
    for j in range(1, 8):
        assert measure_stage(t.stage(j)) <= math.pi / (2 * t.stage(j).N) + 1e-15
