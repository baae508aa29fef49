"""最坏情况失真与失真实验"""
import math
from fractions import Fraction

import pytest

from app.core.exceptions import BudgetExceededException, ValidationException
from app.services.distortion import distortion_experiment
from app.services.sampling import (
    adversarial_candidates,
    monte_carlo_expected_abs_error,
    two_valued_expected_abs_error,
    worst_case_distortion,
)
from app.services.sequences import generate_pair


def test_exhaustive_small_instance(hamming):
    result = worst_case_distortion(hamming, 4, 2)
    assert result.method == "exhaustive"
    assert result.pairs_examined == 4 ** 4
    # k 处失配时 E|F̂−f| 依次为 0, 1/4, 1/6, 1/4, 0
    assert result.e_n == Fraction(1, 4)
    x, y = result.argmax
    assert len(x) == len(y) == 4
    assert sum(a != b for a, b in zip(x, y)) in (1, 3)


def test_full_sample_has_no_distortion(hamming):
    result = worst_case_distortion(hamming, 3, 3)
    assert result.e_n == 0


@pytest.mark.parametrize("name", ["hamming", "equality"])
def test_bound_holds_exhaustively(name, request):
    f1 = request.getfixturevalue(name)
    norm_sq = f1.squared_l2_norm
    for n in range(1, 7):
        for m in range(1, n + 1):
            result = worst_case_distortion(f1, n, m)
            assert isinstance(result.e_n, Fraction)
            assert result.e_n ** 2 * m <= norm_sq


def test_exhaustive_pair_budget(hamming):
    with pytest.raises(BudgetExceededException):
        worst_case_distortion(hamming, 8, 2, pair_budget=1000)


def test_unknown_mode(hamming):
    with pytest.raises(ValidationException):
        worst_case_distortion(hamming, 4, 2, mode="annealing")


def test_adversarial_candidates_are_distinct(hamming):
    candidates = adversarial_candidates(hamming, 8, seed=3, random_pairs=4)
    labels = [label for label, _ in candidates]
    pairs = [pair for _, pair in candidates]
    assert labels[0] == "extreme-high"
    assert len(set(pairs)) == len(pairs)
    assert all(len(x) == 8 for x, _ in pairs)


def test_monte_carlo_mode_reports_label(hamming):
    result = worst_case_distortion(hamming, 20, 4, mode="monte_carlo", trials=2000, seed=1)
    assert result.method == "monte_carlo"
    assert result.argmax_label in result.candidates
    assert float(result.e_n) <= result.bound
    # C(20,4) 在预算内，内层精确枚举
    assert result.trials is None


def test_monte_carlo_half_mismatch_large_n(hamming):
    n, m = 10 ** 4, 100
    x, y = generate_pair("half-mismatch", hamming.x_alphabet, hamming.y_alphabet, n)
    empirical = monte_carlo_expected_abs_error(hamming, x, y, m, trials=10 ** 4, seed=0)
    oracle = float(two_valued_expected_abs_error(n, n // 2, m, Fraction(0), Fraction(1)))
    assert oracle == pytest.approx(0.0397, abs=1e-3)
    assert empirical <= math.sqrt(2) / 10
    assert empirical <= 3 * oracle


def test_distortion_experiment_rows(hamming):
    reports = distortion_experiment(hamming, [2, 3], [1, 2, 3], seed=5)
    assert [(r.n, r.m) for r in reports] == [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3)]
    for report in reports:
        assert report.e_n <= report.bound + 1e-12
        assert report.e_n_exact is not None
        assert report.protocol == "poly-l"
        assert report.R is not None and report.R > 0
    assert reports[1].e_n == 0


def test_distortion_experiment_without_protocol(equality):
    reports = distortion_experiment(equality, [4], [2], protocol=None)
    assert reports[0].R is None
    assert reports[0].argmax_x is not None
