"""求和型函数规格

f1 以精确有理数表的形式定义在有限字母表 X×Y 上：
- 真实的归一化求和型函数 f_n 的计算（失真实验的真值）
- 失真上界中使用的 ||f1||_2
- 多项式直接协议使用的双线性乘积形式 f1(x,y) = Σ c_jk·a_j(x)·b_k(y)
- 纯文本表格格式的解析与内置函数表
"""
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, Mapping, Optional, Sequence, Tuple

from loguru import logger

from app.core.exceptions import ParseException, ValidationException
from app.services.field import FieldElement, PrimeField, encode_rational

Cell = Tuple[str, str]


@dataclass(frozen=True)
class Alphabet:
    """有序有限字母表，顺序即一次一密循环移位使用的排列"""

    symbols: Tuple[str, ...]

    def __post_init__(self):
        if not self.symbols:
            raise ValidationException("alphabet", "alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValidationException("alphabet", f"duplicate symbols in {self.symbols}")

    @classmethod
    def of_size(cls, size: int) -> "Alphabet":
        """整数字母表 0..size-1"""
        return cls(tuple(str(i) for i in range(size)))

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __contains__(self, symbol: object) -> bool:
        return symbol in self.symbols

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise ValidationException("symbol", f"'{symbol}' not in alphabet {self.symbols}")

    def symbol_at(self, position: int) -> str:
        return self.symbols[position % len(self.symbols)]


@dataclass(frozen=True)
class ProductForm:
    """深度为一的双线性表示 f1(x,y) = Σ_jk c_jk·a_j(x)·b_k(y)

    显式给出的 (a_k, b_k) 列表对应单位系数矩阵；
    指示函数回退 a_x = 1{·=x}, b_y = 1{·=y}, c = f1。
    """

    left: Tuple[Dict[str, Fraction], ...]
    right: Tuple[Dict[str, Fraction], ...]
    coefficients: Tuple[Tuple[Fraction, ...], ...]
    label: str = "explicit"

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[Mapping[str, Fraction], Mapping[str, Fraction]]]) -> "ProductForm":
        rank = len(pairs)
        coefficients = tuple(
            tuple(Fraction(1) if j == k else Fraction(0) for k in range(rank))
            for j in range(rank)
        )
        return cls(
            left=tuple({s: Fraction(v) for s, v in a.items()} for a, _ in pairs),
            right=tuple({s: Fraction(v) for s, v in b.items()} for _, b in pairs),
            coefficients=coefficients,
        )

    @property
    def left_rank(self) -> int:
        return len(self.left)

    @property
    def right_rank(self) -> int:
        return len(self.right)

    def evaluate(self, x: str, y: str) -> Fraction:
        total = Fraction(0)
        for j, a in enumerate(self.left):
            for k, b in enumerate(self.right):
                coefficient = self.coefficients[j][k]
                if coefficient:
                    total += coefficient * a[x] * b[y]
        return total

    @property
    def denominators(self) -> Tuple[int, int, int]:
        """(左函数公分母, 右函数公分母, 系数公分母)"""
        return (
            _lcm_of(v for a in self.left for v in a.values()),
            _lcm_of(v for b in self.right for v in b.values()),
            _lcm_of(c for row in self.coefficients for c in row),
        )


def _lcm_of(values) -> int:
    denominator = 1
    for value in values:
        denominator = math.lcm(denominator, Fraction(value).denominator)
    return denominator


@dataclass(frozen=True)
class FunctionTable:
    """f1: X×Y → Q 的精确有理数表"""

    x_alphabet: Alphabet
    y_alphabet: Alphabet
    values: Dict[Cell, Fraction]
    product_form: Optional[ProductForm] = None
    name: str = "custom"

    def __post_init__(self):
        for x in self.x_alphabet:
            for y in self.y_alphabet:
                if (x, y) not in self.values:
                    raise ValidationException("values", f"f1({x},{y}) is undefined")
        extra = set(self.values) - {(x, y) for x in self.x_alphabet for y in self.y_alphabet}
        if extra:
            raise ValidationException("values", f"cells outside X×Y: {sorted(extra)}")
        normalized = {cell: Fraction(v) for cell, v in self.values.items()}
        object.__setattr__(self, "values", normalized)
        if self.product_form is not None:
            self._validate_product_form(self.product_form)

    def _validate_product_form(self, form: ProductForm) -> None:
        """乘积形式必须在每个格点上精确重建 f1"""
        if len(form.coefficients) != form.left_rank or any(
            len(row) != form.right_rank for row in form.coefficients
        ):
            raise ValidationException("product_form", "coefficient matrix shape mismatch")
        for a in form.left:
            missing = [x for x in self.x_alphabet if x not in a]
            if missing:
                raise ValidationException("product_form", f"left factor undefined at {missing}")
        for b in form.right:
            missing = [y for y in self.y_alphabet if y not in b]
            if missing:
                raise ValidationException("product_form", f"right factor undefined at {missing}")
        for (x, y), expected in self.values.items():
            reconstructed = form.evaluate(x, y)
            if reconstructed != expected:
                raise ValidationException(
                    "product_form",
                    f"reconstruction at ({x},{y}) gives {reconstructed}, table has {expected}",
                )

    def __call__(self, x: str, y: str) -> Fraction:
        try:
            return self.values[(x, y)]
        except KeyError:
            raise ValidationException("symbol", f"({x},{y}) is outside X×Y")

    def cells(self) -> Iterator[Cell]:
        for x in self.x_alphabet:
            for y in self.y_alphabet:
                yield x, y

    @property
    def common_denominator(self) -> int:
        """f1 值的最小公分母 D"""
        return _lcm_of(self.values.values())

    @property
    def max_abs(self) -> Fraction:
        return max(abs(v) for v in self.values.values())

    @property
    def squared_l2_norm(self) -> Fraction:
        return sum((v * v for v in self.values.values()), Fraction(0))

    def effective_product_form(self) -> ProductForm:
        """显式乘积形式，缺省时回退到指示函数分解（总是深度为一）"""
        if self.product_form is not None:
            return self.product_form
        return self.indicator_product_form()

    def indicator_product_form(self) -> ProductForm:
        """f1(x,y) = Σ_{a,b} f1(a,b)·1{x=a}·1{y=b}"""
        return ProductForm(
            left=tuple(
                {s: Fraction(int(s == a)) for s in self.x_alphabet} for a in self.x_alphabet
            ),
            right=tuple(
                {s: Fraction(int(s == b)) for s in self.y_alphabet} for b in self.y_alphabet
            ),
            coefficients=tuple(
                tuple(self.values[(a, b)] for b in self.y_alphabet) for a in self.x_alphabet
            ),
            label="indicator",
        )

    def validate_sequences(self, x_seq: Sequence[str], y_seq: Sequence[str]) -> None:
        if len(x_seq) != len(y_seq):
            raise ValidationException("sequences", f"length mismatch {len(x_seq)} != {len(y_seq)}")
        if len(x_seq) < 1:
            raise ValidationException("sequences", "sequences must be nonempty")
        for position, symbol in enumerate(x_seq, start=1):
            if symbol not in self.x_alphabet:
                raise ValidationException("x_seq", f"position {position}: '{symbol}' not in X")
        for position, symbol in enumerate(y_seq, start=1):
            if symbol not in self.y_alphabet:
                raise ValidationException("y_seq", f"position {position}: '{symbol}' not in Y")


def l2_norm(f1: FunctionTable) -> float:
    """||f1||_2，平方范数精确计算，开方用浮点"""
    return math.sqrt(f1.squared_l2_norm)


def eval_sum_type(f1: FunctionTable, x_seq: Sequence[str], y_seq: Sequence[str]) -> Fraction:
    """f_n = (1/n)·Σ f1(x_i, y_i)，所有失真实验的真值"""
    f1.validate_sequences(x_seq, y_seq)
    total = sum((f1(x, y) for x, y in zip(x_seq, y_seq)), Fraction(0))
    return total / len(x_seq)


def eval_via_joint_type(f1: FunctionTable, x_seq: Sequence[str], y_seq: Sequence[str]) -> Fraction:
    """f_n = Σ f1(x,y)·P_{x^n,y^n}(x,y)，按联合类型展开"""
    f1.validate_sequences(x_seq, y_seq)
    counts = Counter(zip(x_seq, y_seq))
    n = len(x_seq)
    return sum((f1(x, y) * Fraction(count, n) for (x, y), count in counts.items()), Fraction(0))


def to_field(f1: FunctionTable, field: PrimeField) -> Dict[Cell, FieldElement]:
    """逐项编码 f1(x,y)·D 到域中"""
    denominator = f1.common_denominator
    return {cell: encode_rational(value, denominator, field) for cell, value in f1.values.items()}


# ---------------------------------------------------------------- 内置函数表

BUILTIN_TABLES = ("hamming", "equality", "squared-difference", "product")


def builtin_table(name: str, alphabet_size: int = 2, y_alphabet_size: Optional[int] = None) -> FunctionTable:
    """内置函数表：Hamming 失配指示、相等指示、平方差、乘积（秩一）"""
    x_alphabet = Alphabet.of_size(alphabet_size)
    y_alphabet = Alphabet.of_size(y_alphabet_size or alphabet_size)
    if name == "hamming":
        rule = lambda a, b: int(a != b)  # noqa: E731
    elif name == "equality":
        rule = lambda a, b: int(a == b)  # noqa: E731
    elif name == "squared-difference":
        rule = lambda a, b: (a - b) ** 2  # noqa: E731
    elif name == "product":
        rule = lambda a, b: a * b  # noqa: E731
    else:
        raise ValidationException("f1", f"unknown builtin '{name}', choose from {BUILTIN_TABLES}")

    values = {
        (x, y): Fraction(rule(int(x), int(y)))
        for x in x_alphabet for y in y_alphabet
    }
    product_form = None
    if name == "product":
        product_form = ProductForm.from_pairs([
            ({x: Fraction(int(x)) for x in x_alphabet}, {y: Fraction(int(y)) for y in y_alphabet})
        ])
    return FunctionTable(x_alphabet, y_alphabet, values, product_form=product_form, name=name)


# ---------------------------------------------------------------- 文本格式

def _parse_rational(token: str, source: str, line: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseException(source, line, f"invalid rational '{token}'")


def parse_function_table(text: str, source: str = "<string>", name: Optional[str] = None) -> FunctionTable:
    """解析纯文本函数表

    格式::

        X: a b
        Y: 0 1
        a 0 1/2
        ...
        product_form:
        a 1 a 1/1      # 第 1 项左因子 a_1(a) = 1
        b 1 0 1        # 第 1 项右因子 b_1(0) = 1

    '#' 之后为注释。
    """
    x_symbols: Optional[Tuple[str, ...]] = None
    y_symbols: Optional[Tuple[str, ...]] = None
    values: Dict[Cell, Fraction] = {}
    left_terms: Dict[str, Dict[str, Fraction]] = {}
    right_terms: Dict[str, Dict[str, Fraction]] = {}
    in_product_form = False

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("X:"):
            x_symbols = tuple(line[2:].split())
            continue
        if line.startswith("Y:"):
            y_symbols = tuple(line[2:].split())
            continue
        if line.rstrip(":") == "product_form":
            in_product_form = True
            continue

        tokens = line.split()
        if in_product_form:
            if len(tokens) != 4 or tokens[0] not in ("a", "b"):
                raise ParseException(
                    source, line_number,
                    "product_form lines are 'a <term> <x> <value>' or 'b <term> <y> <value>'; "
                    "only depth-one products a_k(x)·b_k(y) are supported",
                )
            side, term, symbol, token = tokens
            target = left_terms if side == "a" else right_terms
            target.setdefault(term, {})[symbol] = _parse_rational(token, source, line_number)
            continue

        if len(tokens) != 3:
            raise ParseException(source, line_number, f"expected 'x y value', got '{line}'")
        if x_symbols is None or y_symbols is None:
            raise ParseException(source, line_number, "X: and Y: headers must precede the values")
        x, y, token = tokens
        if x not in x_symbols or y not in y_symbols:
            raise ParseException(source, line_number, f"cell ({x},{y}) is outside the declared alphabets")
        if (x, y) in values:
            raise ParseException(source, line_number, f"cell ({x},{y}) defined twice")
        values[(x, y)] = _parse_rational(token, source, line_number)

    if x_symbols is None or y_symbols is None:
        raise ParseException(source, 0, "missing X: or Y: header")

    product_form = None
    if left_terms or right_terms:
        if set(left_terms) != set(right_terms):
            raise ParseException(source, 0, "every product term needs both an 'a' and a 'b' factor")
        terms = sorted(left_terms)
        product_form = ProductForm.from_pairs([(left_terms[t], right_terms[t]) for t in terms])

    table = FunctionTable(
        Alphabet(x_symbols),
        Alphabet(y_symbols),
        values,
        product_form=product_form,
        name=name or source,
    )
    logger.debug(f"函数表已解析: source={source}, |X|={len(table.x_alphabet)}, |Y|={len(table.y_alphabet)}")
    return table


def load_function_table(spec: str, alphabet_size: int = 2, y_alphabet_size: Optional[int] = None) -> FunctionTable:
    """按内置名称或文件路径加载函数表"""
    if spec in BUILTIN_TABLES:
        return builtin_table(spec, alphabet_size, y_alphabet_size)
    path = Path(spec)
    if not path.exists():
        raise ValidationException("f1", f"'{spec}' is neither a builtin nor an existing file")
    return parse_function_table(path.read_text(encoding="utf-8"), source=str(path), name=path.stem)

