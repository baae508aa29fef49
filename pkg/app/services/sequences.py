"""内置序列生成器与序列文件读取

生成器带版本号，失真扫描无需附带数据文件即可复现。
"""
import random
from itertools import product
from pathlib import Path
from typing import List, Sequence, Tuple

from app.core.exceptions import ParseException, ValidationException
from app.services.funcspec import Alphabet

GENERATORS_VERSION = "v1"
GENERATORS = ("all-match", "all-mismatch", "half-mismatch", "periodic", "seeded-random")

SequencePair = Tuple[Tuple[str, ...], Tuple[str, ...]]


def _common_symbols(x_alphabet: Alphabet, y_alphabet: Alphabet) -> List[str]:
    common = [s for s in x_alphabet if s in y_alphabet]
    if not common:
        raise ValidationException("alphabets", "X and Y share no symbol, cannot build matching positions")
    return common


def _mismatch_for(x: str, offset: int, y_alphabet: Alphabet) -> str:
    for step in range(len(y_alphabet)):
        candidate = y_alphabet.symbol_at(offset + step)
        if candidate != x:
            return candidate
    raise ValidationException("alphabets", f"Y has no symbol different from '{x}'")


def generate_pair(
    name: str,
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    n: int,
    seed: int = 0,
    period: int = 2,
) -> SequencePair:
    """按名称生成长度为 n 的序列对"""
    if n < 1:
        raise ValidationException("n", f"sequence length must be >= 1, got {n}")

    if name == "all-match":
        common = _common_symbols(x_alphabet, y_alphabet)
        x_seq = tuple(common[i % len(common)] for i in range(n))
        return x_seq, x_seq

    if name == "all-mismatch":
        x_seq = tuple(x_alphabet.symbol_at(i) for i in range(n))
        y_seq = tuple(_mismatch_for(x, i + 1, y_alphabet) for i, x in enumerate(x_seq))
        return x_seq, y_seq

    if name == "half-mismatch":
        # 前一半失配，后一半匹配
        common = _common_symbols(x_alphabet, y_alphabet)
        half = n // 2
        x_seq = tuple(common[i % len(common)] for i in range(n))
        y_seq = tuple(
            _mismatch_for(x, i + 1, y_alphabet) if i < half else x
            for i, x in enumerate(x_seq)
        )
        return x_seq, y_seq

    if name == "periodic":
        if period < 1:
            raise ValidationException("period", f"period must be >= 1, got {period}")
        x_seq = tuple(x_alphabet.symbol_at(i) for i in range(n))
        y_seq = tuple(y_alphabet.symbol_at(i // period) for i in range(n))
        return x_seq, y_seq

    if name == "seeded-random":
        rng = random.Random(f"{GENERATORS_VERSION}:{seed}")
        x_seq = tuple(rng.choice(x_alphabet.symbols) for _ in range(n))
        y_seq = tuple(rng.choice(y_alphabet.symbols) for _ in range(n))
        return x_seq, y_seq

    raise ValidationException("sequences", f"unknown generator '{name}', choose from {GENERATORS}")


def parse_sequence(text: str, alphabet: Alphabet, source: str = "<string>") -> Tuple[str, ...]:
    """解析以空白分隔的符号序列，报告出错的行号"""
    symbols = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        for token in line.split("#", 1)[0].split():
            if token not in alphabet:
                raise ParseException(source, line_number, f"symbol '{token}' not in alphabet {alphabet.symbols}")
            symbols.append(token)
    if not symbols:
        raise ParseException(source, 0, "sequence is empty")
    return tuple(symbols)


def read_sequence(path: str, alphabet: Alphabet) -> Tuple[str, ...]:
    """读取序列文件（每个符号一个 token）"""
    file_path = Path(path)
    if not file_path.exists():
        raise ValidationException("sequence", f"file '{path}' does not exist")
    return parse_sequence(file_path.read_text(encoding="utf-8"), alphabet, source=str(file_path))


def all_sequences(alphabet: Alphabet, n: int) -> List[Tuple[str, ...]]:
    """X^n 的全部序列（字典序）"""
    return [tuple(seq) for seq in product(alphabet.symbols, repeat=n)]


def format_sequence(sequence: Sequence[str]) -> str:
    return " ".join(sequence)
