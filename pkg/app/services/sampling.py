"""随机子采样估计

- 无放回均匀抽取下标集 I（部分 Fisher–Yates）
- 部分频率 L(x,y) 与联合类型估计 P̂
- 函数估计 F̂_n 的两种展开及交叉校验
- 超几何统计量、Σ_MSE 与误差界链的精确计算
- 最坏情况失真搜索（穷举 / Monte Carlo）
"""
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from app.core.config import settings
from app.core.exceptions import (
    BudgetExceededException,
    ConsistencyException,
    ValidationException,
)
from app.services.field import scale_rational
from app.services.funcspec import Cell, FunctionTable, eval_sum_type, l2_norm
from app.services.randomness import RandomSource
from app.services.sequences import GENERATORS, SequencePair, generate_pair

# Monte Carlo 单批下标矩阵的元素上限
MONTE_CARLO_BATCH_CELLS = 1 << 20


@dataclass(frozen=True)
class IndexSet:
    """采样位置集合 I（1 起始，升序）"""

    indices: Tuple[int, ...]
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationException("n", f"population size must be >= 1, got {self.n}")
        if not 1 <= len(self.indices) <= self.n:
            raise ValidationException("m", f"sample size must be in [1, {self.n}], got {len(self.indices)}")
        if len(set(self.indices)) != len(self.indices):
            raise ValidationException("indices", f"duplicate indices in {self.indices}")
        for index in self.indices:
            if not 1 <= index <= self.n:
                raise ValidationException("indices", f"index {index} outside [1, {self.n}]")
        object.__setattr__(self, "indices", tuple(sorted(self.indices)))

    @property
    def m(self) -> int:
        return len(self.indices)

    @classmethod
    def full(cls, n: int) -> "IndexSet":
        return cls(tuple(range(1, n + 1)), n)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)


@dataclass(frozen=True)
class JointTypeEstimate:
    """部分频率 L 及其归一化 P̂ = L/m"""

    counts: Dict[Cell, int]
    m: int

    def __post_init__(self):
        if any(count < 0 for count in self.counts.values()):
            raise ValidationException("counts", "partial frequencies must be nonnegative")
        if sum(self.counts.values()) != self.m:
            raise ValidationException("counts", f"partial frequencies sum to {sum(self.counts.values())}, expected {self.m}")

    def probability(self, cell: Cell) -> Fraction:
        return Fraction(self.counts.get(cell, 0), self.m)

    @property
    def probabilities(self) -> Dict[Cell, Fraction]:
        return {cell: Fraction(count, self.m) for cell, count in self.counts.items()}


# ---------------------------------------------------------------- 采样与估计

def sample_indices(n: int, m: int, rng: RandomSource) -> IndexSet:
    """无放回均匀抽取 m 个位置

    部分 Fisher–Yates：第 j 步从剩余 n−j 个位置中均匀选一个，
    依次使用 randbelow(n), randbelow(n−1), ..., randbelow(n−m+1)。
    """
    if n < 1:
        raise ValidationException("n", f"population size must be >= 1, got {n}")
    if not 1 <= m <= n:
        raise ValidationException("m", f"sample size must satisfy 1 <= m <= n, got m={m}, n={n}")
    pool = list(range(1, n + 1))
    for j in range(m):
        k = j + rng.randbelow(n - j)
        pool[j], pool[k] = pool[k], pool[j]
    return IndexSet(tuple(pool[:m]), n)


def _check_lengths(x_seq: Sequence[str], y_seq: Sequence[str], index_set: IndexSet) -> None:
    if len(x_seq) != len(y_seq):
        raise ValidationException("sequences", f"length mismatch {len(x_seq)} != {len(y_seq)}")
    if len(x_seq) != index_set.n:
        raise ValidationException(
            "indices", f"index set drawn for n={index_set.n}, sequences have length {len(x_seq)}"
        )


def full_frequency(x_seq: Sequence[str], y_seq: Sequence[str]) -> Dict[Cell, int]:
    """N(x,y)：整条序列上每个符号对的出现次数"""
    if len(x_seq) != len(y_seq):
        raise ValidationException("sequences", f"length mismatch {len(x_seq)} != {len(y_seq)}")
    return dict(Counter(zip(x_seq, y_seq)))


def partial_frequency(x_seq: Sequence[str], y_seq: Sequence[str], index_set: IndexSet) -> JointTypeEstimate:
    """L(x,y) = |{i ∈ I : (x_i, y_i) = (x, y)}|"""
    _check_lengths(x_seq, y_seq, index_set)
    counts = Counter((x_seq[i - 1], y_seq[i - 1]) for i in index_set)
    return JointTypeEstimate(dict(counts), index_set.m)


def estimate_function(
    f1: FunctionTable,
    x_seq: Sequence[str],
    y_seq: Sequence[str],
    index_set: IndexSet,
    check: Optional[bool] = None,
) -> Fraction:
    """子采样估计 F̂_n = (1/m)·Σ_{i∈I} f1(x_i, y_i)

    check 打开时（默认取 settings.CHECK_EXPANSIONS）同时计算按部分频率
    加权的展开 (1/m)·Σ f1(x,y)·L(x,y)，两者必须精确相等。
    """
    f1.validate_sequences(x_seq, y_seq)
    _check_lengths(x_seq, y_seq, index_set)
    direct = sum((f1(x_seq[i - 1], y_seq[i - 1]) for i in index_set), Fraction(0)) / index_set.m

    if settings.CHECK_EXPANSIONS if check is None else check:
        joint = partial_frequency(x_seq, y_seq, index_set)
        weighted = sum(
            (f1(*cell) * count for cell, count in joint.counts.items()), Fraction(0)
        ) / index_set.m
        if weighted != direct:
            logger.error(f"估计式展开不一致: direct={direct}, weighted={weighted}")
            raise ConsistencyException(
                "estimate_expansions",
                "direct and type-weighted estimates disagree",
                {"direct": str(direct), "weighted": str(weighted)},
            )
    return direct


# ---------------------------------------------------------------- 超几何统计

def hypergeometric_stats(n: int, m: int, n_xy: int) -> Tuple[Fraction, Fraction]:
    """P̂(x,y) 的精确均值与方差

    均值 N/n；方差 N(n−N)(n−m) / (m·n²·(n−1))，n=1 时为 0。
    """
    if not 1 <= m <= n:
        raise ValidationException("m", f"sample size must satisfy 1 <= m <= n, got m={m}, n={n}")
    if not 0 <= n_xy <= n:
        raise ValidationException("n_xy", f"full frequency must be in [0, {n}], got {n_xy}")
    mean = Fraction(n_xy, n)
    if n == 1:
        return mean, Fraction(0)
    variance = Fraction(n_xy * (n - n_xy) * (n - m), m * n * n * (n - 1))
    return mean, variance


def variance_upper_bound(n: int, m: int, n_xy: int) -> Fraction:
    """逐格方差的宽松上界 N/(m·n)"""
    if not 1 <= m <= n:
        raise ValidationException("m", f"sample size must satisfy 1 <= m <= n, got m={m}, n={n}")
    return Fraction(n_xy, m * n)


def mse_and_l2_bounds(n: int, m: int, frequencies: Mapping[Cell, int]) -> Tuple[Fraction, float]:
    """Σ_MSE = Σ_{x,y} Var(P̂(x,y))，并给出 E‖P̂ − P‖₂ 的上界 √Σ_MSE"""
    total = sum(frequencies.values())
    if total != n:
        raise ValidationException("frequencies", f"full frequencies sum to {total}, expected n={n}")
    sigma_mse = sum((hypergeometric_stats(n, m, count)[1] for count in frequencies.values()), Fraction(0))
    if sigma_mse > Fraction(1, m):
        raise ConsistencyException(
            "sigma_mse", f"Σ_MSE={sigma_mse} exceeds 1/m", {"sigma_mse": str(sigma_mse), "m": m}
        )
    return sigma_mse, math.sqrt(sigma_mse)


# ---------------------------------------------------------------- 精确枚举

def iter_index_sets(n: int, m: int, budget: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    """按字典序枚举 {1..n} 的全部 m 子集"""
    if not 1 <= m <= n:
        raise ValidationException("m", f"sample size must satisfy 1 <= m <= n, got m={m}, n={n}")
    budget = settings.ENUMERATION_BUDGET if budget is None else budget
    required = math.comb(n, m)
    if required > budget:
        raise BudgetExceededException("subset_enumeration", required, budget)
    logger.debug(f"枚举 C({n},{m}) = {required} 个子集")
    return combinations(range(1, n + 1), m)


@lru_cache(maxsize=4096)
def _scaled_abs_error_total(values: Tuple[int, ...], m: int) -> int:
    """Σ_S |n·ΣS − m·T|，values 为放大后的 f1 值（排序后作缓存键）"""
    n = len(values)
    target = m * sum(values)
    return sum(abs(n * sum(subset) - target) for subset in combinations(values, m))


def exact_expected_abs_error(
    f1: FunctionTable,
    x_seq: Sequence[str],
    y_seq: Sequence[str],
    m: int,
    budget: Optional[int] = None,
) -> Fraction:
    """E|F̂_n − f_n|，对全部 C(n,m) 个子集等权平均"""
    f1.validate_sequences(x_seq, y_seq)
    n = len(x_seq)
    if not 1 <= m <= n:
        raise ValidationException("m", f"sample size must satisfy 1 <= m <= n, got m={m}, n={n}")
    if m == n:
        return Fraction(0)
    budget = settings.ENUMERATION_BUDGET if budget is None else budget
    required = math.comb(n, m)
    if required > budget:
        raise BudgetExceededException("subset_enumeration", required, budget)

    denominator = f1.common_denominator
    scaled = tuple(sorted(scale_rational(f1(x, y), denominator) for x, y in zip(x_seq, y_seq)))
    total = _scaled_abs_error_total(scaled, m)
    return Fraction(total, required * m * n * denominator)


def two_valued_expected_abs_error(n: int, k: int, m: int, low: Fraction, high: Fraction) -> Fraction:
    """f1 沿序列只取两个值时 E|F̂ − f_n| 的超几何闭式

    k 个位置取 high，其余 n−k 个取 low。
    """
    if not 1 <= m <= n:
        raise ValidationException("m", f"sample size must satisfy 1 <= m <= n, got m={m}, n={n}")
    if not 0 <= k <= n:
        raise ValidationException("k", f"count of high positions must be in [0, {n}], got {k}")
    low, high = Fraction(low), Fraction(high)
    truth = (k * high + (n - k) * low) / n
    total = math.comb(n, m)
    expectation = Fraction(0)
    for j in range(max(0, m - (n - k)), min(k, m) + 1):
        weight = math.comb(k, j) * math.comb(n - k, m - j)
        estimate = (j * high + (m - j) * low) / m
        expectation += weight * abs(estimate - truth)
    return expectation / total


@dataclass
class BoundChain:
    """E|F̂−f_n| ≤ ||f1||·E‖P̂−P‖₂ ≤ ||f1||·√Σ_MSE ≤ ||f1||/√m 的各项"""

    expected_abs_error: Fraction
    expected_type_l2: float
    mean_squared_type_error: Fraction
    sigma_mse: Fraction
    norm: float
    m: int
    pointwise_ok: bool

    @property
    def bound(self) -> float:
        return self.norm / math.sqrt(self.m)

    def verify(self, slack: float = 1e-12) -> None:
        """逐环校验；有理数环节精确比较，含开方的环节留浮点余量"""
        failures = []
        if not self.pointwise_ok:
            failures.append("cauchy_schwarz")
        if self.mean_squared_type_error != self.sigma_mse:
            failures.append("mean_squared_type_error")
        if self.sigma_mse > Fraction(1, self.m):
            failures.append("sigma_mse")
        if self.expected_type_l2 > math.sqrt(self.sigma_mse) + slack:
            failures.append("jensen")
        if float(self.expected_abs_error) > self.norm * self.expected_type_l2 + slack:
            failures.append("expected_abs_error")
        if failures:
            raise ConsistencyException("bound_chain", f"broken links: {failures}", {"links": failures})


def _type_error_enumeration(
    f1: Optional[FunctionTable],
    x_seq: Sequence[str],
    y_seq: Sequence[str],
    m: int,
    budget: Optional[int],
) -> Tuple[int, Fraction, float, Fraction, bool]:
    """一次枚举同时得到 Σ|误差|、Σ‖P̂−P‖²、Σ‖P̂−P‖₂ 与逐点 Cauchy–Schwarz 结果"""
    n = len(x_seq)
    pairs = list(zip(x_seq, y_seq))
    frequencies = Counter(pairs)
    truth = eval_sum_type(f1, x_seq, y_seq) if f1 is not None else Fraction(0)
    norm_sq = f1.squared_l2_norm if f1 is not None else Fraction(0)

    count = 0
    abs_total = Fraction(0)
    sq_total = Fraction(0)
    l2_total = 0.0
    pointwise_ok = True
    for subset in iter_index_sets(n, m, budget):
        partial = Counter(pairs[i - 1] for i in subset)
        diff_sq = sum(
            ((Fraction(partial.get(cell, 0), m) - Fraction(total, n)) ** 2 for cell, total in frequencies.items()),
            Fraction(0),
        )
        count += 1
        sq_total += diff_sq
        l2_total += math.sqrt(diff_sq)
        if f1 is not None:
            error = abs(sum((f1(*pairs[i - 1]) for i in subset), Fraction(0)) / m - truth)
            abs_total += error
            if error * error > norm_sq * diff_sq:
                pointwise_ok = False
    return count, abs_total, l2_total, sq_total, pointwise_ok


def expected_type_l2_error(
    x_seq: Sequence[str],
    y_seq: Sequence[str],
    m: int,
    budget: Optional[int] = None,
) -> float:
    """E‖P̂ − P‖₂，平方范数精确、开方后取浮点平均"""
    count, _, l2_total, _, _ = _type_error_enumeration(None, x_seq, y_seq, m, budget)
    return l2_total / count


def bound_chain(
    f1: FunctionTable,
    x_seq: Sequence[str],
    y_seq: Sequence[str],
    m: int,
    budget: Optional[int] = None,
) -> BoundChain:
    """对单个序列对计算误差界链的全部环节"""
    f1.validate_sequences(x_seq, y_seq)
    n = len(x_seq)
    count, abs_total, l2_total, sq_total, pointwise_ok = _type_error_enumeration(f1, x_seq, y_seq, m, budget)
    sigma_mse, _ = mse_and_l2_bounds(n, m, full_frequency(x_seq, y_seq))
    return BoundChain(
        expected_abs_error=abs_total / count,
        expected_type_l2=l2_total / count,
        mean_squared_type_error=sq_total / count,
        sigma_mse=sigma_mse,
        norm=l2_norm(f1),
        m=m,
        pointwise_ok=pointwise_ok,
    )


# ---------------------------------------------------------------- Monte Carlo

def monte_carlo_expected_abs_error(
    f1: FunctionTable,
    x_seq: Sequence[str],
    y_seq: Sequence[str],
    m: int,
    trials: Optional[int] = None,
    seed: int = 0,
) -> float:
    """抽样估计 E|F̂_n − f_n|，每次试验独立无放回抽取 m 个位置"""
    f1.validate_sequences(x_seq, y_seq)
    n = len(x_seq)
    if not 1 <= m <= n:
        raise ValidationException("m", f"sample size must satisfy 1 <= m <= n, got m={m}, n={n}")
    trials = settings.MONTE_CARLO_TRIALS if trials is None else trials
    if trials < 1:
        raise ValidationException("trials", f"trials must be >= 1, got {trials}")

    values = np.array([float(f1(x, y)) for x, y in zip(x_seq, y_seq)])
    truth = float(eval_sum_type(f1, x_seq, y_seq))
    rng = np.random.default_rng(seed)
    # 每批 (batch, n) 的下标矩阵逐行独立打乱，取前 m 列即无放回样本
    batch = max(1, MONTE_CARLO_BATCH_CELLS // n)
    total_error = 0.0
    done = 0
    while done < trials:
        size = min(batch, trials - done)
        order = rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)
        estimates = values[order[:, :m]].mean(axis=1)
        total_error += float(np.abs(estimates - truth).sum())
        done += size
    return total_error / trials


# ---------------------------------------------------------------- 最坏情况失真

@dataclass
class WorstCaseResult:
    """最坏情况失真搜索结果"""

    e_n: Union[Fraction, float]
    argmax: Optional[SequencePair]
    method: str
    bound: float
    pairs_examined: int
    trials: Optional[int] = None
    argmax_label: Optional[str] = None
    candidates: List[str] = field(default_factory=list)


def _extreme_cells(f1: FunctionTable) -> Tuple[Cell, Cell]:
    cells = list(f1.cells())
    high = max(cells, key=lambda cell: f1(*cell))
    low = min(cells, key=lambda cell: f1(*cell))
    return high, low


def _pattern_pair(pattern: Sequence[bool], high: Cell, low: Cell) -> SequencePair:
    chosen = [high if flag else low for flag in pattern]
    return tuple(c[0] for c in chosen), tuple(c[1] for c in chosen)


def adversarial_candidates(
    f1: FunctionTable,
    n: int,
    seed: int = 0,
    random_pairs: int = 8,
) -> List[Tuple[str, SequencePair]]:
    """结构化的对抗候选序列对

    在 f1 取最大/最小值的两个格点之间构造整块、半块、交替与四分之一模式，
    再加上具名生成器与若干随机序列对。随机序列对会集中在典型行为附近，
    所以结构化模式排在前面。
    """
    high, low = _extreme_cells(f1)
    patterns = {
        "extreme-high": [True] * n,
        "extreme-low": [False] * n,
        "extreme-half": [i < n // 2 for i in range(n)],
        "extreme-alternating": [i % 2 == 0 for i in range(n)],
        "extreme-quarter": [i < n // 4 for i in range(n)],
    }
    candidates: List[Tuple[str, SequencePair]] = []
    seen = set()

    def _add(label: str, pair: SequencePair) -> None:
        if pair not in seen:
            seen.add(pair)
            candidates.append((label, pair))

    for label, pattern in patterns.items():
        _add(label, _pattern_pair(pattern, high, low))
    for name in GENERATORS:
        if name == "seeded-random":
            continue
        try:
            _add(name, generate_pair(name, f1.x_alphabet, f1.y_alphabet, n, seed=seed))
        except ValidationException as exc:
            logger.debug(f"跳过生成器 {name}: {exc.message}")
    for offset in range(random_pairs):
        _add(
            f"seeded-random:{seed + offset}",
            generate_pair("seeded-random", f1.x_alphabet, f1.y_alphabet, n, seed=seed + offset),
        )
    return candidates


def _check_against_bound(f1: FunctionTable, e_n: Union[Fraction, float], m: int, exact: bool) -> None:
    if exact:
        holds = Fraction(e_n) ** 2 * m <= f1.squared_l2_norm
    else:
        holds = float(e_n) <= l2_norm(f1) / math.sqrt(m)
    if not holds:
        logger.error(f"失真 {e_n} 超出界 ||f1||/√m (m={m})")
        raise ConsistencyException(
            "distortion_bound",
            f"e_n={e_n} exceeds ||f1||_2/sqrt(m) for m={m}",
            {"e_n": str(e_n), "m": m},
        )


def worst_case_distortion(
    f1: FunctionTable,
    n: int,
    m: int,
    mode: str = "exhaustive",
    trials: Optional[int] = None,
    seed: int = 0,
    budget: Optional[int] = None,
    pair_budget: Optional[int] = None,
    random_pairs: int = 8,
) -> WorstCaseResult:
    """e_n = max_{x^n,y^n} E|F̂_n − f_n|

    exhaustive 模式遍历全部 (|X||Y|)^n 个序列对并精确计算；
    monte_carlo 模式只在对抗候选集上搜索，内层期望在子集可枚举时精确计算，
    否则用 trials 次抽样估计，结果只是下界。
    """
    if not 1 <= m <= n:
        raise ValidationException("m", f"sample size must satisfy 1 <= m <= n, got m={m}, n={n}")
    bound = l2_norm(f1) / math.sqrt(m)

    if mode == "exhaustive":
        pair_budget = settings.EXHAUSTIVE_PAIR_BUDGET if pair_budget is None else pair_budget
        cells = list(f1.cells())
        required = len(cells) ** n
        if required > pair_budget:
            raise BudgetExceededException("exhaustive_pairs", required, pair_budget)
        logger.info(f"穷举失真: f1={f1.name}, n={n}, m={m}, 序列对 {required} 个")

        best: Fraction = Fraction(-1)
        argmax: Optional[SequencePair] = None
        for chosen in product(cells, repeat=n):
            x_seq = tuple(c[0] for c in chosen)
            y_seq = tuple(c[1] for c in chosen)
            value = exact_expected_abs_error(f1, x_seq, y_seq, m, budget)
            if value > best:
                best, argmax = value, (x_seq, y_seq)
        _check_against_bound(f1, best, m, exact=True)
        return WorstCaseResult(best, argmax, "exhaustive", bound, required)

    if mode == "monte_carlo":
        trials = settings.MONTE_CARLO_TRIALS if trials is None else trials
        enumeration_budget = settings.ENUMERATION_BUDGET if budget is None else budget
        exact_inner = math.comb(n, m) <= enumeration_budget
        candidates = adversarial_candidates(f1, n, seed=seed, random_pairs=random_pairs)
        logger.info(
            f"Monte Carlo 失真: f1={f1.name}, n={n}, m={m}, 候选 {len(candidates)} 个, "
            f"内层{'精确枚举' if exact_inner else f'抽样 {trials} 次'}"
        )

        best_value: Union[Fraction, float] = -1.0
        best_pair: Optional[SequencePair] = None
        best_label: Optional[str] = None
        for label, (x_seq, y_seq) in candidates:
            if exact_inner:
                value = exact_expected_abs_error(f1, x_seq, y_seq, m, enumeration_budget)
            else:
                value = monte_carlo_expected_abs_error(f1, x_seq, y_seq, m, trials=trials, seed=seed)
            logger.debug(f"候选 {label}: {float(value):.6f}")
            if value > best_value:
                best_value, best_pair, best_label = value, (x_seq, y_seq), label
        _check_against_bound(f1, best_value, m, exact=False)
        return WorstCaseResult(
            best_value,
            best_pair,
            "monte_carlo",
            bound,
            len(candidates),
            trials=None if exact_inner else trials,
            argmax_label=best_label,
            candidates=[label for label, _ in candidates],
        )

    raise ValidationException("mode", f"unknown distortion mode '{mode}', choose exhaustive or monte_carlo")
