"""素域运算

提供 F_p 上的精确运算、域大小选择，以及有理数与域元素之间的双向编码。
所有协议中的份额、掩码值与盐值都是本模块的 FieldElement。
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, List, Optional, Sequence, Tuple, Union

from app.core.exceptions import (
    FieldArithmeticException,
    FieldMismatchException,
    ValidationException,
)

if TYPE_CHECKING:
    from app.services.funcspec import FunctionTable

# 秘密分享横坐标：Alice=1, Bob=2, Charlie=3
SHAMIR_ABSCISSAE: Tuple[int, int, int] = (1, 2, 3)

Rational = Union[int, Fraction]


def ceil_log2(k: int) -> int:
    """⌈log2 k⌉，k ≥ 1"""
    if k < 1:
        raise ValidationException("k", f"ceil_log2 needs k >= 1, got {k}")
    return (k - 1).bit_length()


def is_prime(candidate: int) -> bool:
    """确定性素性检验（试除法，规模为 O(m·D·max|f1|)）"""
    if candidate < 2:
        return False
    if candidate < 4:
        return True
    if candidate % 2 == 0:
        return False
    for divisor in range(3, math.isqrt(candidate) + 1, 2):
        if candidate % divisor == 0:
            return False
    return True


def smallest_prime_above(bound: int, floor: int = 3) -> int:
    """大于 bound 且不小于 floor 的最小素数"""
    candidate = max(bound + 1, floor)
    while not is_prime(candidate):
        candidate += 1
    return candidate


@dataclass(frozen=True)
class PrimeField:
    """素域 F_p

    Attributes:
        modulus: 素数 p ≥ 3
    """

    modulus: int

    def __post_init__(self):
        if self.modulus < 3 or not is_prime(self.modulus):
            raise ValidationException("modulus", f"{self.modulus} is not a prime >= 3")

    @property
    def bits_per_element(self) -> int:
        """每个域元素的传输位数 ⌈log2 p⌉"""
        return ceil_log2(self.modulus)

    def element(self, value: int) -> "FieldElement":
        """将整数归约为域元素"""
        return FieldElement(value % self.modulus, self)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(0, self)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(1, self)

    def __repr__(self) -> str:
        return f"F_{self.modulus}"


@dataclass(frozen=True)
class FieldElement:
    """域元素，值恒在 [0, p) 内"""

    value: int
    field: PrimeField

    def __post_init__(self):
        if not 0 <= self.value < self.field.modulus:
            raise ValidationException(
                "value", f"{self.value} outside [0, {self.field.modulus})"
            )

    def _coerce(self, other: Union["FieldElement", int]) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field.modulus != self.field.modulus:
                raise FieldMismatchException(self.field.modulus, other.field.modulus)
            return other
        if isinstance(other, int):
            return self.field.element(other)
        raise TypeError(f"cannot combine FieldElement with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        return self.field.element(self.value + other.value)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return self.field.element(self.value - other.value)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return self.field.element(self.value * other.value)

    __rmul__ = __mul__

    def __neg__(self):
        return self.field.element(-self.value)

    def inverse(self) -> "FieldElement":
        """乘法逆元（扩展欧几里得）"""
        if self.value == 0:
            raise FieldArithmeticException("inverse", "division by zero")
        return FieldElement(pow(self.value, -1, self.field.modulus), self.field)

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.inverse()

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.modulus})"


def field_arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """域运算：add / sub / mul / inv_mul（a·b⁻¹）"""
    if a.field.modulus != b.field.modulus:
        raise FieldMismatchException(a.field.modulus, b.field.modulus)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv_mul":
        return a / b
    raise ValidationException("op", f"unknown field operation '{op}'")


def min_field_size(
    f1: "FunctionTable",
    m: int,
    min_modulus: int = 3,
    denominator: Optional[int] = None,
) -> PrimeField:
    """选择足以容纳 m 个 f1 值之和的最小素域

    返回满足 p > 2·m·D·max|f1| 的最小素数（不低于 min_modulus），
    其中 D 为编码使用的公分母（默认取 f1 的公分母）。
    因子 2 为中心化解码预留有符号余量。
    """
    if m < 1:
        raise ValidationException("m", f"sample count must be >= 1, got {m}")
    scale = f1.common_denominator if denominator is None else denominator
    magnitude = f1.max_abs * scale
    if magnitude.denominator != 1:
        raise ValidationException("denominator", f"{scale} does not clear the table denominators")
    bound = 2 * m * magnitude.numerator
    return PrimeField(smallest_prime_above(bound, floor=max(3, min_modulus)))


def scale_rational(q: Rational, denominator: int) -> int:
    """q·D，要求结果为整数"""
    scaled = Fraction(q) * denominator
    if scaled.denominator != 1:
        raise ValidationException("q", f"{q} * {denominator} is not an integer")
    return scaled.numerator


def encode_rational(
    q: Rational,
    denominator: int,
    field: PrimeField,
    strict: bool = True,
) -> FieldElement:
    """有理数编码为域元素 (q·D) mod p

    strict 时要求 |q·D| < p/2，保证中心化解码无歧义；
    份额内部的中间量只需模约化，可关闭 strict。
    """
    scaled = scale_rational(q, denominator)
    if strict and 2 * abs(scaled) >= field.modulus:
        raise FieldArithmeticException(
            "encode",
            f"|{q} * {denominator}| exceeds signed headroom of F_{field.modulus}",
            details={"scaled": scaled, "modulus": field.modulus},
        )
    return field.element(scaled)


def decode_centered(e: FieldElement, denominator: int, scale: int = 1) -> Fraction:
    """中心化解码：取 v ≡ e (mod p)，v ∈ (−p/2, p/2)，返回 v/(D·scale)"""
    value = e.value
    if value > e.field.modulus // 2:
        value -= e.field.modulus
    return Fraction(value, denominator * scale)


def lagrange_weights_at_zero(abscissae: Sequence[FieldElement]) -> List[FieldElement]:
    """在 0 处求值的拉格朗日权重 w_j = Π_{k≠j} x_k / (x_k − x_j)"""
    if not abscissae:
        raise ValidationException("points", "at least one point is required")
    field = abscissae[0].field
    values = [a.value for a in abscissae]
    if len(set(values)) != len(values):
        raise ValidationException("points", f"duplicate abscissas {values}")
    if 0 in values:
        raise ValidationException("points", "abscissas must be nonzero")
    weights = []
    for j, x_j in enumerate(abscissae):
        weight = field.one
        for k, x_k in enumerate(abscissae):
            if k != j:
                weight = weight * x_k / (x_k - x_j)
        weights.append(weight)
    return weights


def interpolate_at_zero(points: Iterable[Tuple[FieldElement, FieldElement]]) -> FieldElement:
    """插值多项式在 0 处的值（常数项）"""
    points = list(points)
    weights = lagrange_weights_at_zero([abscissa for abscissa, _ in points])
    total = points[0][1].field.zero
    for weight, (_, value) in zip(weights, points):
        total = total + weight * value
    return total
