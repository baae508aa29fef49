"""随机源

协议的所有随机性都经由 RandomSource.randbelow 抽取：
- SeededProvider: 由运行种子为每个参与方确定性派生独立的随机源
- TapeProvider: 从预先给定的纸带依次取值，供隐私审计穷举整个随机空间
- RecordingProvider: 始终返回 0 并记录每次抽取的取值范围，用于计算随机空间大小
"""
import random
from typing import List, Protocol, Sequence

from app.core.exceptions import ProtocolException, ValidationException


class RandomSource(Protocol):
    """均匀整数源"""

    def randbelow(self, bound: int) -> int:
        """返回 [0, bound) 上的均匀整数"""
        ...


class RandomnessProvider(Protocol):
    """为每个参与方提供随机源"""

    def source_for(self, party: str) -> RandomSource:
        ...


class SeededSource:
    """基于 random.Random 的确定性随机源"""

    def __init__(self, seed: str):
        self._rng = random.Random(seed)

    def randbelow(self, bound: int) -> int:
        if bound < 1:
            raise ValidationException("bound", f"randbelow needs bound >= 1, got {bound}")
        return self._rng.randrange(bound)


class SeededProvider:
    """由运行种子派生各参与方的随机源"""

    def __init__(self, seed: int):
        self.seed = seed

    def source_for(self, party: str) -> RandomSource:
        return SeededSource(f"{self.seed}:{party}")


class TapeSource:
    """按顺序读取纸带的随机源，所有参与方共享同一条纸带"""

    def __init__(self, tape: Sequence[int]):
        self._tape = tape
        self._position = 0

    def randbelow(self, bound: int) -> int:
        if self._position >= len(self._tape):
            raise ProtocolException("tape", "randomness tape exhausted", {"position": self._position})
        value = self._tape[self._position]
        if not 0 <= value < bound:
            raise ProtocolException(
                "tape", f"tape value {value} outside [0, {bound})", {"position": self._position}
            )
        self._position += 1
        return value

    @property
    def consumed(self) -> int:
        return self._position


class TapeProvider:
    """共享纸带的随机提供者"""

    def __init__(self, tape: Sequence[int]):
        self._source = TapeSource(tape)

    def source_for(self, party: str) -> RandomSource:
        return self._source


class RecordingSource:
    """记录每次抽取取值范围的随机源（总是返回 0）"""

    def __init__(self):
        self.bounds: List[int] = []

    def randbelow(self, bound: int) -> int:
        self.bounds.append(bound)
        return 0


class RecordingProvider:
    """共享记录源的随机提供者"""

    def __init__(self):
        self._source = RecordingSource()

    def source_for(self, party: str) -> RandomSource:
        return self._source

    @property
    def bounds(self) -> List[int]:
        return self._source.bounds
