"""函数表、乘积形式与文本格式"""
import math
import random
from fractions import Fraction

import pytest

from app.core.exceptions import FieldArithmeticException, ParseException, ValidationException
from app.services.field import PrimeField
from app.services.funcspec import (
    Alphabet,
    FunctionTable,
    ProductForm,
    builtin_table,
    eval_sum_type,
    eval_via_joint_type,
    l2_norm,
    load_function_table,
    parse_function_table,
    to_field,
)


def test_builtin_values(hamming, equality, product_table):
    assert hamming("0", "1") == 1 and hamming("1", "1") == 0
    assert equality("0", "0") == 1 and equality("0", "1") == 0
    assert product_table("1", "1") == 1 and product_table("1", "0") == 0
    assert builtin_table("squared-difference", 3)("0", "2") == 4


def test_unknown_builtin():
    with pytest.raises(ValidationException):
        builtin_table("cosine")


def test_l2_norms(hamming, half_table):
    assert hamming.squared_l2_norm == 2
    assert l2_norm(hamming) == pytest.approx(math.sqrt(2))
    assert half_table.squared_l2_norm == Fraction(9, 4)
    assert half_table.common_denominator == 2
    assert half_table.max_abs == 1


def test_to_field_integer_values(hamming):
    encoded = to_field(hamming, PrimeField(13))
    assert [encoded[cell].value for cell in hamming.cells()] == [0, 1, 1, 0]


def test_to_field_scales_by_common_denominator(half_table):
    encoded = to_field(half_table, PrimeField(13))
    assert sorted({e.value for e in encoded.values()}) == [0, 1, 2]
    assert encoded[("a", "1")].value == 1


def test_to_field_negative_values(signed_table):
    encoded = to_field(signed_table, PrimeField(13))
    assert encoded[("a", "0")].value == 12
    assert encoded[("b", "1")].value == 10
    assert encoded[("a", "1")].value == 2


def test_to_field_needs_signed_headroom(signed_table):
    with pytest.raises(FieldArithmeticException):
        to_field(signed_table, PrimeField(5))


def test_incomplete_table_rejected():
    alphabet = Alphabet.of_size(2)
    with pytest.raises(ValidationException):
        FunctionTable(alphabet, alphabet, {("0", "0"): Fraction(1)})


def test_sum_type_examples(hamming, mismatch_pair):
    x, y = mismatch_pair
    assert eval_sum_type(hamming, x, y) == Fraction(1, 2)
    assert eval_sum_type(hamming, ("0", "1"), ("0", "1")) == 0


def test_sequence_validation(hamming):
    with pytest.raises(ValidationException):
        eval_sum_type(hamming, ("0", "1"), ("0",))
    with pytest.raises(ValidationException):
        eval_sum_type(hamming, (), ())
    with pytest.raises(ValidationException):
        eval_sum_type(hamming, ("0", "2"), ("0", "1"))


def test_expansions_agree():
    rng = random.Random(11)
    tables = [builtin_table(name, 3) for name in ("hamming", "equality", "squared-difference", "product")]
    for _ in range(1000):
        table = rng.choice(tables)
        n = rng.randint(1, 12)
        x = [rng.choice(table.x_alphabet.symbols) for _ in range(n)]
        y = [rng.choice(table.y_alphabet.symbols) for _ in range(n)]
        assert eval_sum_type(table, x, y) == eval_via_joint_type(table, x, y)


def test_permutation_invariance(half_table):
    rng = random.Random(3)
    pairs = [(rng.choice("ab"), rng.choice("01")) for _ in range(9)]
    x, y = zip(*pairs)
    expected = eval_sum_type(half_table, x, y)
    for _ in range(20):
        rng.shuffle(pairs)
        x, y = zip(*pairs)
        assert eval_sum_type(half_table, x, y) == expected


def test_indicator_form_reconstructs(half_table):
    form = half_table.effective_product_form()
    assert form.label == "indicator"
    assert form.left_rank == 2 and form.right_rank == 2
    for x, y in half_table.cells():
        assert form.evaluate(x, y) == half_table(x, y)
    assert form.denominators == (1, 1, 2)


def test_explicit_product_form(product_table):
    form = product_table.effective_product_form()
    assert form is product_table.product_form
    assert form.left_rank == 1
    assert product_table.indicator_product_form().left_rank == 2


def test_wrong_product_form_rejected():
    alphabet = Alphabet.of_size(2)
    values = {(x, y): Fraction(int(x) * int(y)) for x in alphabet for y in alphabet}
    wrong = ProductForm.from_pairs([({"0": 1, "1": 1}, {"0": 0, "1": 1})])
    with pytest.raises(ValidationException):
        FunctionTable(alphabet, alphabet, values, product_form=wrong)


TABLE_TEXT = """\
# 半值表
X: a b
Y: 0 1
a 0 0
a 1 1/2
b 0 1
b 1 1
"""

PRODUCT_TEXT = """\
X: 0 1 2
Y: 0 1
0 0 0
0 1 0
1 0 0
1 1 1
2 0 0
2 1 2
product_form:
a 1 0 0
a 1 1 1
a 1 2 2
b 1 0 0
b 1 1 1
"""


def test_parse_table(half_table):
    table = parse_function_table(TABLE_TEXT, source="half.txt")
    assert table.values == half_table.values
    assert table.product_form is None
    assert table.name == "half.txt"


def test_parse_product_form():
    table = parse_function_table(PRODUCT_TEXT, name="scaled")
    assert table.product_form is not None
    assert table.product_form.left_rank == 1
    assert table("2", "1") == 2


@pytest.mark.parametrize(
    "text, line",
    [
        ("X: a b\nY: 0 1\na 0\n", 3),
        ("X: a b\nY: 0 1\na 0 1\nc 0 1\n", 4),
        ("X: a b\nY: 0 1\na 0 1\na 0 2\n", 4),
        ("X: a b\nY: 0 1\na 0 x/y\n", 3),
        ("X: a\nY: 0\na 0 1\nproduct_form:\nc 1 a 1\n", 5),
        ("a 0 1\n", 1),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseException) as info:
        parse_function_table(text, source="bad.txt")
    assert info.value.details["line"] == line


def test_parse_missing_cell_is_validation_error():
    with pytest.raises(ValidationException):
        parse_function_table("X: a b\nY: 0\na 0 1\n")


def test_load_function_table(tmp_path):
    path = tmp_path / "half.txt"
    path.write_text(TABLE_TEXT, encoding="utf-8")
    table = load_function_table(str(path))
    assert table.name == "half"
    assert load_function_table("hamming", 3).x_alphabet == Alphabet.of_size(3)
    with pytest.raises(ValidationException):
        load_function_table(str(tmp_path / "missing.txt"))
