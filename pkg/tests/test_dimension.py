from __future__ import annotations

import math

import pytest

from apftower import dimension_trace, make_family_tower, tower_from_config


def test_p7_powers_closed_form(p7_powers):
    tr = dimension_trace(p7_powers, 50)
    for j, q in enumerate(tr.quotients, start=1):
        assert q == pytest.approx(2 * j * math.log(2) / (j * (j + 1) * math.log(7)), abs=1e-10)
    assert tr.quotients[19] == pytest.approx(0.03393, abs=1e-5)
    assert tr.closed_form_limit == 0.0


def test_nonspectral_closed_form(p7):
    # N_1...N_j = 7^(1 + 3 + ... + (2j - 1)) = 7^(j^2)
    tr = dimension_trace(p7, 50)
    for j, q in enumerate(tr.quotients, start=1):
        assert q == pytest.approx(math.log(2) / (j * math.log(7)), abs=1e-12)


def test_quarter_cantor_is_half(qc):
    tr = dimension_trace(qc, 30, window=5)
    assert all(abs(q - 0.5) <= 1e-12 for q in tr.quotients)
    assert tr.liminf_estimate == pytest.approx(0.5, abs=1e-12)


def test_window_and_csv(p7):
    tr = dimension_trace(p7, 4, window=2)
    assert tr.liminf_estimate == min(tr.quotients[-2:])
    lines = tr.to_csv().splitlines()
    assert lines[0] == "j,logM_cum,logN_cum,q_j" and len(lines) == 5
    assert float(lines[1].split(",")[3]) == tr.quotients[0]
    with pytest.raises(ValueError):
        dimension_trace(p7, 3, window=4)


def test_structured_list_has_no_closed_form():
    t = tower_from_config({"family": "structured-list", "stages": [{"M": 3, "K": 4, "alpha": 2}]})
    tr = dimension_trace(t, 6)
    assert tr.closed_form_limit is None
    assert tr.quotients[-1] == pytest.approx(math.log(3) / math.log(14), rel=1e-14)
