"""密码学原语

- 有序字母表上的循环移位一次一密
- 加法秘密分享
- 横坐标 1, 2, 3 处的一次多项式分享

ShareTriple 在发牌方处保存全部三个求值点；每个参与方只拿到自己的坐标，
这一边界由协议引擎保证。
"""
from dataclasses import dataclass
from typing import Tuple, Union

from app.core.exceptions import FieldMismatchException, ValidationException
from app.services.field import SHAMIR_ABSCISSAE, FieldElement, PrimeField, interpolate_at_zero
from app.services.funcspec import Alphabet
from app.services.randomness import RandomSource

ENCRYPT = "encrypt"
DECRYPT = "decrypt"


@dataclass(frozen=True)
class PadSymbol:
    """循环移位密钥 α_i / β_i"""

    shift: int
    alphabet: Alphabet

    def __post_init__(self):
        if not 0 <= self.shift < len(self.alphabet):
            raise ValidationException("shift", f"shift {self.shift} outside [0, {len(self.alphabet)})")


def draw_pad(alphabet: Alphabet, rng: RandomSource) -> PadSymbol:
    """均匀抽取移位量"""
    return PadSymbol(rng.randbelow(len(alphabet)), alphabet)


def pad_shift(symbol: str, pad: PadSymbol, direction: str = ENCRYPT) -> str:
    """按字母表顺序循环移位：encrypt 前移 shift 位，decrypt 后移"""
    position = pad.alphabet.index(symbol)
    if direction == ENCRYPT:
        return pad.alphabet.symbol_at(position + pad.shift)
    if direction == DECRYPT:
        return pad.alphabet.symbol_at(position - pad.shift)
    raise ValidationException("direction", f"unknown direction '{direction}'")


def additive_split(secret: FieldElement, rng: RandomSource) -> Tuple[FieldElement, FieldElement]:
    """secret = share_a + share_b，share_a 在域上均匀"""
    share_a = secret.field.element(rng.randbelow(secret.field.modulus))
    return share_a, secret - share_a


@dataclass(frozen=True)
class ShareTriple:
    """多项式在横坐标 1, 2, 3 处的取值"""

    at_1: FieldElement
    at_2: FieldElement
    at_3: FieldElement

    def __post_init__(self):
        moduli = {self.at_1.field.modulus, self.at_2.field.modulus, self.at_3.field.modulus}
        if len(moduli) != 1:
            left, right = sorted(moduli)[:2]
            raise FieldMismatchException(left, right)

    @property
    def field(self) -> PrimeField:
        return self.at_1.field

    def at(self, abscissa: int) -> FieldElement:
        if abscissa not in SHAMIR_ABSCISSAE:
            raise ValidationException("abscissa", f"no share at {abscissa}")
        return (self.at_1, self.at_2, self.at_3)[abscissa - 1]

    def as_tuple(self) -> Tuple[FieldElement, FieldElement, FieldElement]:
        return self.at_1, self.at_2, self.at_3


def degree1_share(secret: FieldElement, rng: RandomSource) -> ShareTriple:
    """g(q) = slope·q + secret，slope 均匀"""
    slope = rng.randbelow(secret.field.modulus)
    return ShareTriple(*(secret + slope * q for q in SHAMIR_ABSCISSAE))


def triple_pointwise(
    a: ShareTriple,
    b: Union[ShareTriple, FieldElement, int],
    op: str,
) -> ShareTriple:
    """逐坐标运算：add / mul 作用于两个三元组，scale 以常数 b 缩放 a

    mul 的结果是二次多项式的求值，常数项为两个秘密之积。
    """
    if op == "scale":
        if isinstance(b, ShareTriple):
            raise ValidationException("op", "scale takes a constant, not a share triple")
        return ShareTriple(*(value * b for value in a.as_tuple()))
    if not isinstance(b, ShareTriple):
        raise ValidationException("op", f"'{op}' needs two share triples")
    if a.field.modulus != b.field.modulus:
        raise FieldMismatchException(a.field.modulus, b.field.modulus)
    if op == "add":
        return ShareTriple(*(u + v for u, v in zip(a.as_tuple(), b.as_tuple())))
    if op == "mul":
        return ShareTriple(*(u * v for u, v in zip(a.as_tuple(), b.as_tuple())))
    raise ValidationException("op", f"unknown pointwise operation '{op}'")


def reconstruct_linear(at_1: FieldElement, at_2: FieldElement) -> FieldElement:
    """一次多项式的常数项：2·g(1) − g(2)"""
    return 2 * at_1 - at_2


def reconstruct_triple(triple: ShareTriple) -> FieldElement:
    """二次及以下多项式的常数项（三点插值）"""
    field = triple.field
    return interpolate_at_zero(
        (field.element(q), value) for q, value in zip(SHAMIR_ABSCISSAE, triple.as_tuple())
    )
