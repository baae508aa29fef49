"""素域运算与插值"""
import random

import pytest

from app.core.exceptions import FieldArithmeticException, FieldMismatchException, ValidationException
from app.services.field import (
    PrimeField,
    ceil_log2,
    field_arith,
    interpolate_at_zero,
    is_prime,
    lagrange_weights_at_zero,
    smallest_prime_above,
)


def test_add_wraps(f97):
    assert field_arith(f97.element(95), f97.element(5), "add").value == 3


def test_mul_mod_5():
    f5 = PrimeField(5)
    assert field_arith(f5.element(2), f5.element(4), "mul").value == 3


def test_inv_mul_mod_5():
    f5 = PrimeField(5)
    assert field_arith(f5.element(1), f5.element(2), "inv_mul").value == 3


def test_sub_underflow(f97):
    assert field_arith(f97.zero, f97.one, "sub").value == 96


def test_division_by_zero(f97):
    with pytest.raises(FieldArithmeticException):
        field_arith(f97.one, f97.zero, "inv_mul")


def test_mismatched_fields_rejected(f97):
    with pytest.raises(FieldMismatchException):
        field_arith(f97.one, PrimeField(5).one, "add")
    with pytest.raises(FieldMismatchException):
        f97.one + PrimeField(5).one


def test_unknown_operation(f97):
    with pytest.raises(ValidationException):
        field_arith(f97.one, f97.one, "pow")


def test_element_range_enforced(f97):
    from app.services.field import FieldElement

    with pytest.raises(ValidationException):
        FieldElement(97, f97)


def test_non_prime_modulus_rejected():
    with pytest.raises(ValidationException):
        PrimeField(4)
    with pytest.raises(ValidationException):
        PrimeField(2)


def test_bits_per_element():
    assert PrimeField(3).bits_per_element == 2
    assert PrimeField(101).bits_per_element == 7
    assert PrimeField(211).bits_per_element == 8
    assert PrimeField(257).bits_per_element == 9


def test_ceil_log2():
    assert [ceil_log2(k) for k in (1, 2, 3, 4, 5, 16, 17, 1000)] == [0, 1, 2, 2, 3, 4, 5, 10]


def test_primality_helpers():
    assert [p for p in range(30) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert smallest_prime_above(12) == 13
    assert smallest_prime_above(13) == 17
    assert smallest_prime_above(0) == 3
    assert smallest_prime_above(2, floor=5) == 5


def test_inverse_round_trip(f97):
    for value in range(1, 97):
        element = f97.element(value)
        assert (element * element.inverse()).value == 1


def test_lagrange_weights_at_123(f97):
    weights = lagrange_weights_at_zero([f97.element(q) for q in (1, 2, 3)])
    assert [w.value for w in weights] == [3, 97 - 3, 1]


def test_interpolate_square_plus_one(f97):
    points = [(f97.element(q), f97.element(q * q + 1)) for q in (1, 2, 3)]
    assert interpolate_at_zero(points).value == 1


def test_interpolate_constant(f97):
    points = [(f97.element(q), f97.element(7)) for q in (1, 2, 3)]
    assert interpolate_at_zero(points).value == 7


def test_interpolate_mod_13():
    f13 = PrimeField(13)
    # F(q) = 3q² + 2q + 4: F(1)=9, F(2)=20≡7, F(3)=37≡11
    points = [(f13.element(1), f13.element(9)), (f13.element(2), f13.element(7)), (f13.element(3), f13.element(11))]
    assert interpolate_at_zero(points).value == 4


@pytest.mark.parametrize("modulus", [5, 13, 97, 1009])
def test_interpolation_reproduces_constant_term(modulus):
    field = PrimeField(modulus)
    rng = random.Random(modulus)
    for _ in range(1000):
        c0, c1, c2 = (rng.randrange(modulus) for _ in range(3))
        points = [(field.element(q), field.element(c0 + c1 * q + c2 * q * q)) for q in (1, 2, 3)]
        assert interpolate_at_zero(points).value == c0


def test_duplicate_abscissas_rejected(f97):
    points = [(f97.element(1), f97.one), (f97.element(1), f97.one), (f97.element(3), f97.one)]
    with pytest.raises(ValidationException):
        interpolate_at_zero(points)


def test_zero_abscissa_rejected(f97):
    with pytest.raises(ValidationException):
        lagrange_weights_at_zero([f97.element(0), f97.element(1)])
