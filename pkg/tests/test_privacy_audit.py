"""随机纸带穷举下的视图分布审计（n=2, m=1, 二元字母表）"""
from collections import Counter
from fractions import Fraction

import pytest

from app.core.exceptions import BudgetExceededException, ValidationException
from app.services.funcspec import builtin_table
from app.services.privacy_audit import (
    PrivacyAuditor,
    audit_privacy_alice,
    audit_privacy_bob,
    audit_privacy_charlie,
    total_variation,
)
from app.services.sampling import IndexSet
from app.services.sequences import all_sequences
from tests.broken_protocols import BROKEN_REGISTRY

DEFINITIONS = ["against_alice", "against_bob", "against_charlie"]


def _all_pairs(f1, n):
    return [(x, y) for x in all_sequences(f1.x_alphabet, n) for y in all_sequences(f1.y_alphabet, n)]


def test_total_variation():
    left = Counter({"a": 1, "b": 1})
    assert total_variation(left, Counter({"a": 2, "b": 2})) == 0
    assert total_variation(left, Counter({"a": 1})) == Fraction(1, 2)
    assert total_variation(Counter({"a": 1}), Counter({"b": 3})) == 1
    with pytest.raises(ValidationException):
        total_variation(left, Counter())


@pytest.mark.parametrize(
    "protocol_id, tapes",
    [("otp", 1944), ("poly-l", 1250), ("poly-direct", 1250)],
)
def test_enumeration_size(protocol_id, tapes, hamming):
    assert PrivacyAuditor(protocol_id, hamming, 2, 1).enumeration_size == tapes


def test_enumeration_size_rerandomized(product_table):
    assert PrivacyAuditor("poly-direct", product_table, 2, 1).enumeration_size == 50
    assert PrivacyAuditor("poly-direct", product_table, 2, 1, rerandomize=True).enumeration_size == 250
    assert PrivacyAuditor("poly-l", product_table, 2, 1, rerandomize=True).enumeration_size == 6250


@pytest.mark.parametrize("f1_name", ["hamming", "product"])
def test_one_time_pad_passes_all_definitions(f1_name):
    f1 = builtin_table(f1_name)
    reports = PrivacyAuditor("otp", f1, 2, 1).audit_all()
    assert [r.definition for r in reports] == DEFINITIONS
    for report in reports:
        assert report.verdict == "pass"
        assert report.worst_distance == 0
        assert report.modulus == 3
    assert reports[0].inputs_compared == 16


@pytest.mark.parametrize(
    "protocol_id, f1_name",
    [("poly-l", "hamming"), ("poly-direct", "hamming"), ("poly-direct", "product")],
)
def test_rerandomized_polynomial_protocols_pass(protocol_id, f1_name):
    f1 = builtin_table(f1_name)
    reports = PrivacyAuditor(protocol_id, f1, 2, 1, rerandomize=True).audit_all()
    assert [r.verdict for r in reports] == ["pass", "pass", "pass"]
    assert all(r.rerandomize for r in reports)


def test_literal_polynomial_protocol_leaks_to_charlie(product_table):
    auditor = PrivacyAuditor("poly-l", product_table, 2, 1)
    alice, bob, charlie = auditor.audit_all()
    assert alice.verdict == "pass"
    assert bob.verdict == "pass"
    assert charlie.verdict == "fail"
    assert charlie.worst_distance > 0
    assert charlie.witness is not None and len(charlie.witness) == 3


@pytest.mark.parametrize("protocol_id", ["poly-l", "poly-direct"])
def test_literal_polynomial_protocols_leak_hamming_to_charlie(protocol_id, hamming):
    alice, bob, charlie = PrivacyAuditor(protocol_id, hamming, 2, 1).audit_all()
    assert (alice.verdict, bob.verdict, charlie.verdict) == ("pass", "pass", "fail")
    assert charlie.worst_distance == Fraction(4, 5)
    assert charlie.modulus == 5
    left, right, estimate = charlie.witness
    assert left.startswith("x=") and " y=" in left
    assert len(left.split()) == len(right.split()) == 4
    assert estimate.startswith("estimate=")


def test_saltless_control_fails_charlie_audit(product_table):
    report = audit_privacy_charlie(
        "otp-saltless", product_table, _all_pairs(product_table, 2), 1, registry=BROKEN_REGISTRY
    )
    assert report.verdict == "fail"
    assert report.worst_distance > 0
    intact = audit_privacy_charlie("otp", product_table, _all_pairs(product_table, 2), 1)
    assert intact.verdict == "pass"


def test_single_party_helpers(hamming):
    ys = all_sequences(hamming.y_alphabet, 2)
    xs = all_sequences(hamming.x_alphabet, 2)
    assert audit_privacy_alice("otp", hamming, ("0", "1"), ys, 1).verdict == "pass"
    assert audit_privacy_bob("poly-l", hamming, ("1", "1"), xs, 1).verdict == "pass"


def test_fixed_index_mode(hamming):
    auditor = PrivacyAuditor("otp", hamming, 2, 1, index_set=IndexSet((2,), 2))
    assert auditor.mode == "fixed-index"
    assert auditor.enumeration_size == 972
    report = auditor.audit_charlie(_all_pairs(hamming, 2))
    assert report.mode == "fixed-index"
    assert report.verdict == "pass"


def test_budget_exceeded(hamming):
    auditor = PrivacyAuditor("poly-l", hamming, 2, 1, budget=1000)
    with pytest.raises(BudgetExceededException) as info:
        auditor.audit_all()
    assert info.value.exit_code == 2


def test_single_symbol_alphabet_is_trivial():
    f1 = builtin_table("hamming", 2, 1)
    report = audit_privacy_alice("otp", f1, ("0", "1"), [("0", "0")], 1)
    assert report.verdict == "pass"
    assert report.comparisons == 0


def test_disjoint_estimates_are_not_compared(hamming):
    report = audit_privacy_charlie("otp", hamming, [(("0",), ("0",)), (("0",), ("1",))], 1)
    assert report.comparisons == 0
    assert report.verdict == "pass"
