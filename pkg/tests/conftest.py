"""共享测试夹具"""
from fractions import Fraction

import pytest

from app.services.field import PrimeField
from app.services.funcspec import Alphabet, FunctionTable, builtin_table


@pytest.fixture
def hamming() -> FunctionTable:
    return builtin_table("hamming")


@pytest.fixture
def equality() -> FunctionTable:
    return builtin_table("equality")


@pytest.fixture
def product_table() -> FunctionTable:
    return builtin_table("product")


@pytest.fixture
def half_table() -> FunctionTable:
    """取值 {0, 1/2, 1} 的表，公分母为 2"""
    return FunctionTable(
        Alphabet(("a", "b")),
        Alphabet(("0", "1")),
        {
            ("a", "0"): Fraction(0),
            ("a", "1"): Fraction(1, 2),
            ("b", "0"): Fraction(1),
            ("b", "1"): Fraction(1),
        },
        name="half",
    )


@pytest.fixture
def f97() -> PrimeField:
    return PrimeField(97)


@pytest.fixture
def mismatch_pair():
    """x=(0,0,1,1), y=(0,1,1,0)：第 2、4 位失配"""
    return ("0", "0", "1", "1"), ("0", "1", "1", "0")


@pytest.fixture
def signed_table() -> FunctionTable:
    """含负值的表 {−1/2, 1, 0, −3/2}，公分母为 2"""
    return FunctionTable(
        Alphabet(("a", "b")),
        Alphabet(("0", "1")),
        {
            ("a", "0"): Fraction(-1, 2),
            ("a", "1"): Fraction(1),
            ("b", "0"): Fraction(0),
            ("b", "1"): Fraction(-3, 2),
        },
        name="signed",
    )
