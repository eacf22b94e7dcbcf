"""End-to-end checks of every stated guarantee, at the stated tolerances.

The long decay run backing criteria 3 and 4 is executed once per session
through a module-scoped fixture.
"""

import pytest

from kbstrip import acceptance


@pytest.fixture(scope="module")
def decay_criteria():
    return acceptance.criteria_3_4()


def test_criterion_01_sharp_energy_drift():
    res = acceptance.criterion_1()
    assert res["drift"] < 1e-6
    assert res["passed"]


def test_criterion_02_identity_residuals_refine():
    res = acceptance.criterion_2()
    for ident, val in res["base"].items():
        assert val < 1e-8, (ident, val)
    for ident, drop in res["drops"].items():
        assert drop >= 10.0, (ident, drop)
    assert res["passed"]


def test_criterion_03_weighted_envelope(decay_criteria):
    c3, _ = decay_criteria
    assert not c3["buffer_flagged"]
    assert c3["violations"] == 0
    assert c3["passed"]


def test_criterion_04_gradient_constant_stable(decay_criteria):
    _, c4 = decay_criteria
    assert c4["relative_change"] < 0.05
    assert c4["passed"]


def test_criterion_05_inequality_suite():
    res = acceptance.criterion_5(seed=0)
    assert res["steklov_equality_rel_margin"] < 1e-12
    assert res["steklov_strict_ok"]
    assert res["worst_l4_margin"] >= 0.0
    assert res["worst_sup_margin"] >= 0.0
    assert res["passed"]


def test_criterion_06_closed_form_parameters():
    res = acceptance.criterion_6()
    for name, err in res["errors"].items():
        assert err < 1e-14, (name, err)
    for name, err in res["root_branch_form_errors"].items():
        assert err < 1e-14, (name, err)
    assert res["passed"]


def test_criterion_07_temporal_order_four():
    res = acceptance.criterion_7()
    assert abs(res["order"] - 4.0) <= 0.3
    assert res["passed"]


def test_criterion_08_transverse_truncation():
    res = acceptance.criterion_8()
    assert res["relative_change"] < 1e-9
    assert res["bitwise_identical"]
    assert res["passed"]


def test_criterion_09_continuous_dependence():
    res = acceptance.criterion_9()
    assert res["nonlinear"]["passed"]
    assert res["linear_spread"] < 1e-9
    assert res["passed"]


def test_criterion_10_weak_form_residual():
    res = acceptance.criterion_10()
    assert res["residual"] < 1e-4
    assert res["residual"] < res["residual_coarse"]
    assert res["passed"]


def test_criterion_11_deterministic_artifacts():
    res = acceptance.criterion_11()
    assert all(res["identical"].values())
    assert res["passed"]
