"""精确隐私审计

对小规模实例，把协议的每一次随机抽取替换为穷举：每条随机纸带对应一次
完整运行。各次抽取的取值范围与输入无关，所以所有纸带等概率，视图分布
就是规范序列化视图的计数表。

- against_alice: 固定 x，Alice 视图的分布不随 y 变化
- against_bob: 固定 y，Bob 视图的分布不随 x 变化
- against_charlie: 给定估计值 F̂ 时，Charlie 视图的条件分布不随输入变化

比较使用精确有理数的全变差距离，判定为距离恰好为 0。
"""
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence, Tuple, Type

from loguru import logger

from app.core.config import settings
from app.core.exceptions import BudgetExceededException, ValidationException
from app.schemas.reports import PrivacyReport
from app.services.engine import PROTOCOLS, Protocol, build_protocol, get_protocol
from app.services.field import PrimeField
from app.services.funcspec import FunctionTable
from app.services.randomness import RecordingProvider, TapeProvider
from app.services.sampling import IndexSet
from app.services.sequences import SequencePair, all_sequences, format_sequence
from app.services.sweep import run_cells
from app.services.transport import PartyId

Distribution = Counter


@dataclass
class ViewDistribution:
    """单个输入对下三方视图的计数表"""

    tapes: int
    by_party: Dict[PartyId, Distribution] = field(default_factory=dict)
    charlie_by_estimate: Dict[Fraction, Distribution] = field(default_factory=dict)


@dataclass(frozen=True)
class _EnumerationTask:
    protocol_cls: Type[Protocol]
    f1: FunctionTable
    pair: SequencePair
    m: int
    modulus: int
    rerandomize: bool
    index_set: Optional[IndexSet]
    bounds: Tuple[int, ...]


def _build(task_cls, f1, pair, m, modulus, rerandomize, index_set, provider):
    return build_protocol(
        task_cls,
        f1,
        pair[0],
        pair[1],
        m,
        rerandomize=rerandomize,
        randomness=provider,
        field=PrimeField(modulus),
        index_set=index_set,
    )


def _enumerate_views(task: _EnumerationTask) -> ViewDistribution:
    """运行每一条随机纸带并统计视图"""
    by_party = {party: Counter() for party in PartyId}
    charlie_by_estimate: Dict[Fraction, Counter] = defaultdict(Counter)
    tapes = 0
    for tape in product(*(range(bound) for bound in task.bounds)):
        result = _build(
            task.protocol_cls, task.f1, task.pair, task.m, task.modulus,
            task.rerandomize, task.index_set, TapeProvider(tape),
        ).run()
        serialized = {party: view.serialize() for party, view in result.views.items()}
        for party, key in serialized.items():
            by_party[party][key] += 1
        charlie_by_estimate[result.estimate][serialized[PartyId.CHARLIE]] += 1
        tapes += 1
    return ViewDistribution(tapes, by_party, dict(charlie_by_estimate))


def total_variation(left: Distribution, right: Distribution) -> Fraction:
    """两个计数表归一化后的全变差距离"""
    left_total = sum(left.values())
    right_total = sum(right.values())
    if left_total == 0 or right_total == 0:
        raise ValidationException("distribution", "cannot compare an empty distribution")
    keys = set(left) | set(right)
    return sum(
        (abs(Fraction(left.get(k, 0), left_total) - Fraction(right.get(k, 0), right_total)) for k in keys),
        Fraction(0),
    ) / 2


def _label(pair: SequencePair) -> str:
    return f"x={format_sequence(pair[0])} y={format_sequence(pair[1])}"


class PrivacyAuditor:
    """单个协议、单组参数的审计器，缓存每个输入对的视图分布"""

    def __init__(
        self,
        protocol_id: str,
        f1: FunctionTable,
        n: int,
        m: int,
        *,
        field: Optional[PrimeField] = None,
        rerandomize: bool = False,
        index_set: Optional[IndexSet] = None,
        budget: Optional[int] = None,
        workers: Optional[int] = None,
        registry: Optional[Dict[str, Type[Protocol]]] = None,
    ):
        if not 1 <= m <= n:
            raise ValidationException("m", f"sample size must satisfy 1 <= m <= n, got m={m}, n={n}")
        self.protocol_id = protocol_id
        self.protocol_cls = get_protocol(protocol_id, registry if registry is not None else PROTOCOLS)
        self.f1 = f1
        self.n = n
        self.m = m
        self.rerandomize = rerandomize
        self.index_set = index_set
        self.budget = settings.AUDIT_BUDGET if budget is None else budget
        self.workers = workers
        self.field = field or self.protocol_cls.field_for(f1, m)
        self.mode = "fixed-index" if index_set is not None else "full"
        self._cache: Dict[SequencePair, ViewDistribution] = {}
        self.bounds = self._randomness_bounds()
        self.enumeration_size = math.prod(self.bounds)

    def _randomness_bounds(self) -> Tuple[int, ...]:
        """用记录源空跑一次，得到每次抽取的取值范围"""
        symbol_x = self.f1.x_alphabet.symbols[0]
        symbol_y = self.f1.y_alphabet.symbols[0]
        provider = RecordingProvider()
        protocol = build_protocol(
            self.protocol_cls,
            self.f1,
            (symbol_x,) * self.n,
            (symbol_y,) * self.n,
            self.m,
            rerandomize=self.rerandomize,
            randomness=provider,
            field=self.field,
            index_set=self.index_set,
            verify=False,
        )
        protocol.run()
        return tuple(provider.bounds)

    def _prefetch(self, pairs: Sequence[SequencePair]) -> None:
        missing = [pair for pair in dict.fromkeys(pairs) if pair not in self._cache]
        if not missing:
            return
        required = self.enumeration_size * len(missing)
        if required > self.budget:
            raise BudgetExceededException("privacy_audit", required, self.budget)
        if required > self.budget // 2:
            logger.warning(f"审计规模 {required} 接近预算 {self.budget}")
        logger.info(
            f"审计 {self.protocol_id}: {len(missing)} 个输入 × {self.enumeration_size} 条纸带 (F_{self.field.modulus})"
        )
        tasks = [
            _EnumerationTask(
                self.protocol_cls, self.f1, pair, self.m, self.field.modulus,
                self.rerandomize, self.index_set, self.bounds,
            )
            for pair in missing
        ]
        for pair, distribution in zip(missing, run_cells(_enumerate_views, tasks, self.workers)):
            self._cache[pair] = distribution

    def distribution(self, pair: SequencePair) -> ViewDistribution:
        self._prefetch([pair])
        return self._cache[pair]

    def _report(self, definition: str, inputs: int, comparisons: int, worst: Fraction, witness, note=None) -> PrivacyReport:
        verdict = "pass" if worst == 0 else "fail"
        if verdict == "fail":
            logger.warning(f"审计 {self.protocol_id}/{definition} 未通过: 距离 {worst}, 输入 {witness}")
        return PrivacyReport(
            protocol=self.protocol_id,
            definition=definition,
            mode=self.mode,
            rerandomize=self.rerandomize,
            n=self.n,
            m=self.m,
            x_alphabet=list(self.f1.x_alphabet.symbols),
            y_alphabet=list(self.f1.y_alphabet.symbols),
            modulus=self.field.modulus,
            inputs_compared=inputs,
            comparisons=comparisons,
            verdict=verdict,
            worst_distance=worst,
            enumeration_size=self.enumeration_size,
            witness=witness,
            note=note,
        )

    def _audit_single_party(self, party: PartyId, definition: str, pairs: List[SequencePair]) -> PrivacyReport:
        self._prefetch(pairs)
        worst, witness, comparisons = Fraction(0), None, 0
        for left, right in combinations(pairs, 2):
            distance = total_variation(
                self._cache[left].by_party[party], self._cache[right].by_party[party]
            )
            comparisons += 1
            if distance > worst:
                worst, witness = distance, [_label(left), _label(right)]
        return self._report(definition, len(pairs), comparisons, worst, witness)

    def audit_alice(self, x_fixed: Sequence[str], y_variants: Sequence[Sequence[str]]) -> PrivacyReport:
        pairs = [(tuple(x_fixed), tuple(y)) for y in y_variants]
        return self._audit_single_party(PartyId.ALICE, "against_alice", pairs)

    def audit_bob(self, y_fixed: Sequence[str], x_variants: Sequence[Sequence[str]]) -> PrivacyReport:
        pairs = [(tuple(x), tuple(y_fixed)) for x in x_variants]
        return self._audit_single_party(PartyId.BOB, "against_bob", pairs)

    def audit_charlie(self, input_pairs: Sequence[SequencePair]) -> PrivacyReport:
        pairs = [(tuple(x), tuple(y)) for x, y in input_pairs]
        self._prefetch(pairs)
        worst, witness, comparisons = Fraction(0), None, 0
        for left, right in combinations(pairs, 2):
            left_dist = self._cache[left].charlie_by_estimate
            right_dist = self._cache[right].charlie_by_estimate
            # 支撑集不相交的估计值不构成约束
            for estimate in set(left_dist) & set(right_dist):
                distance = total_variation(left_dist[estimate], right_dist[estimate])
                comparisons += 1
                if distance > worst:
                    worst, witness = distance, [_label(left), _label(right), f"estimate={estimate}"]
        return self._report("against_charlie", len(pairs), comparisons, worst, witness)

    def audit_all(self) -> List[PrivacyReport]:
        """三个定义，覆盖 X^n × Y^n 的全部输入对，每个定义取最坏的一组"""
        xs = all_sequences(self.f1.x_alphabet, self.n)
        ys = all_sequences(self.f1.y_alphabet, self.n)
        self._prefetch([(x, y) for x in xs for y in ys])
        alice = [self.audit_alice(x, ys) for x in xs]
        bob = [self.audit_bob(y, xs) for y in ys]
        charlie = self.audit_charlie([(x, y) for x in xs for y in ys])
        return [_merge(alice), _merge(bob), charlie]


def _merge(reports: List[PrivacyReport]) -> PrivacyReport:
    """同一定义下多次比较的汇总：取最坏距离，累加输入与比较数"""
    worst = max(reports, key=lambda report: report.worst_distance)
    return worst.model_copy(
        update={
            "inputs_compared": sum(r.inputs_compared for r in reports),
            "comparisons": sum(r.comparisons for r in reports),
        }
    )


def audit_privacy_alice(
    protocol_id: str,
    f1: FunctionTable,
    x_fixed: Sequence[str],
    y_variants: Sequence[Sequence[str]],
    m: int,
    **kwargs,
) -> PrivacyReport:
    return PrivacyAuditor(protocol_id, f1, len(x_fixed), m, **kwargs).audit_alice(x_fixed, y_variants)


def audit_privacy_bob(
    protocol_id: str,
    f1: FunctionTable,
    y_fixed: Sequence[str],
    x_variants: Sequence[Sequence[str]],
    m: int,
    **kwargs,
) -> PrivacyReport:
    return PrivacyAuditor(protocol_id, f1, len(y_fixed), m, **kwargs).audit_bob(y_fixed, x_variants)


def audit_privacy_charlie(
    protocol_id: str,
    f1: FunctionTable,
    input_pairs: Sequence[SequencePair],
    m: int,
    **kwargs,
) -> PrivacyReport:
    if not input_pairs:
        raise ValidationException("input_pairs", "at least one input pair is required")
    n = len(input_pairs[0][0])
    return PrivacyAuditor(protocol_id, f1, n, m, **kwargs).audit_charlie(input_pairs)
