"""通信代价报告与码率随 n 的变化"""
from fractions import Fraction

import pytest

from app.core.exceptions import FieldArithmeticException, ValidationException
from app.services.comm_cost import ceil_sqrt, comm_report, resolve_m


def test_ceil_sqrt():
    assert [ceil_sqrt(n) for n in (1, 2, 4, 5, 64, 65, 1024)] == [1, 2, 2, 3, 8, 9, 32]


def test_resolve_m_rules():
    assert resolve_m("sqrt", [64, 100, 101]) == [8, 10, 11]
    assert resolve_m("fixed", [10, 20], m_value=4) == [4, 4]
    assert resolve_m("equal-n", [3, 5]) == [3, 5]
    assert resolve_m("custom", [3, 5], m_values=[1, 2]) == [1, 2]
    assert resolve_m("sqrt", []) == []
    with pytest.raises(ValidationException):
        resolve_m("fixed", [10])
    with pytest.raises(ValidationException):
        resolve_m("custom", [10, 20], m_values=[1])
    with pytest.raises(ValidationException):
        resolve_m("log", [10])


def test_poly_l_example(hamming):
    (row,) = comm_report("poly-l", hamming, [1024], m_rule="fixed", m_value=32, modulus=211)
    assert row.index_bits == 320
    assert row.extra_bits == 2064
    assert row.k == 2384
    assert row.R_exact == str(Fraction(2384, 1024))


def test_modulus_override_too_small(hamming):
    with pytest.raises(FieldArithmeticException):
        comm_report("poly-l", hamming, [1024], m_rule="fixed", m_value=32, modulus=61)


def test_sqrt_rule_rate_vanishes(hamming):
    n_list = [2 ** k for k in range(6, 17)]
    rows = comm_report("poly-l", hamming, n_list, m_rule="sqrt")
    rates = [Fraction(row.R_exact) for row in rows]
    assert all(later < earlier for earlier, later in zip(rates, rates[1:]))
    assert rates[-1] / rates[0] < Fraction(1, 10)


def test_doubling_n_at_fixed_m(hamming):
    rows = comm_report("otp", hamming, [64, 128, 256], m_rule="fixed", m_value=8, modulus=17)
    assert [row.k - rows[0].k for row in rows] == [0, 8, 16]
    assert rows[0].R > rows[1].R > rows[2].R


def test_m_rule_bounds_checked(hamming):
    with pytest.raises(ValidationException):
        comm_report("otp", hamming, [4], m_rule="fixed", m_value=5)


def test_live_mode_matches_closed_form(hamming, product_table):
    for protocol in ("otp", "poly-l"):
        for row in comm_report(protocol, hamming, [16, 64, 100], m_rule="sqrt", live=True, seed=2):
            assert row.metered == row.k
    for row in comm_report("poly-direct", product_table, [16, 64], m_rule="sqrt", live=True, rerandomize=True):
        assert row.metered == row.k
        assert row.rerandomize


def test_all_protocols(hamming):
    rows = comm_report("all", hamming, [64, 256], m_rule="sqrt", rerandomize=True)
    assert [(row.protocol, row.n) for row in rows] == [
        ("otp", 64), ("otp", 256), ("poly-l", 64), ("poly-l", 256), ("poly-direct", 64), ("poly-direct", 256),
    ]
    # otp 没有再随机化选项
    assert [row.rerandomize for row in rows] == [False, False, True, True, True, True]
