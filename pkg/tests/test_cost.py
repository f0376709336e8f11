import math

import pytest

from liouvsim import cost


def test_hamsim_cost_regression():
    # [PAPER] ceil(6*2*5 + 9 ln(12e6)) = 207
    assert cost.hamsim_cost(2, 5, 1e-6) == 207
    assert cost.hamsim_cost(1, 0, 0.5) == math.ceil(9 * math.log(24))


def test_angleless_cost_regression():
    # [PAPER] ceil(48 + 72 ln(48(1+sqrt2)/0.01) - 6) = 716
    assert cost.angleless_hamsim_cost(1, 1, 0.01) == 716


def test_cost_validation():
    with pytest.raises(ValueError):
        cost.hamsim_cost(-1, 1, 0.1)
    with pytest.raises(ValueError):
        cost.angleless_hamsim_cost(1, 1, 0)
    with pytest.raises(ValueError):
        cost.gsp_cost(1, 1.5, 0.1, 1e-3)


def test_gsp_cost_flags_scaling():
    g = cost.gsp_cost(10, 0.5, 0.2, 1e-4)
    assert g["U_H"].scaling_only and g["U_I"].value == 2.0
    assert g["U_H"].value == pytest.approx(10 / 0.1 * math.log(1 / 5e-5))


def test_table1_rows():
    rows = cost.table1_compare(cost.Table1Params(N=2, N_el=2, t=1, delta=0.5, gamma=0.5, eps=1e-3))
    assert set(rows) == {"ours_liouvillian", "prior_liouvillian", "ours_free_energy", "prior_free_energy"}
    assert all(f.scaling_only for f in rows.values())
    # for many nuclei the leading-order advantage appears
    big = cost.table1_compare(cost.Table1Params(N=100, N_el=100, t=1, delta=0.5, gamma=0.5, eps=1e-3))
    assert big["ours_liouvillian"].value < big["prior_liouvillian"].value


def test_liouvillian_cost_report():
    rep = cost.liouvillian_cost(2.0, 5.0, 1e-6, 10, 0.6, 0.5, 1e-4, n_registers=4, grid=8)
    assert rep.U_L == 207 and rep.U_force == 207
    assert rep.qubits.value == 12
    rows = rep.rows()
    assert {r["name"] for r in rows} >= {"U_L", "U_L_angleless", "U_H", "U_I", "qubits"}
    table = cost.markdown_table(rows)
    assert table.startswith("| name |") and "207" in table
