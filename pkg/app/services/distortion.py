"""失真实验

对 (n, m) 网格计算最坏情况失真 e_n，与界 ||f1||_2/√m 配对，并在同一参数下
实际运行一次协议记录码率 R。
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

from loguru import logger

from app.schemas.reports import DistortionReport
from app.services.engine import build_protocol, get_protocol
from app.services.funcspec import FunctionTable
from app.services.sampling import worst_case_distortion
from app.services.sequences import generate_pair
from app.services.sweep import run_cells


@dataclass(frozen=True)
class DistortionCell:
    f1: FunctionTable
    n: int
    m: int
    mode: str
    trials: Optional[int]
    seed: int
    protocol: Optional[str]
    budget: Optional[int] = None
    pair_budget: Optional[int] = None


def _run_cell(cell: DistortionCell) -> DistortionReport:
    result = worst_case_distortion(
        cell.f1, cell.n, cell.m, mode=cell.mode, trials=cell.trials, seed=cell.seed,
        budget=cell.budget, pair_budget=cell.pair_budget,
    )

    rate = None
    if cell.protocol:
        x_seq, y_seq = result.argmax or generate_pair(
            "seeded-random", cell.f1.x_alphabet, cell.f1.y_alphabet, cell.n, seed=cell.seed
        )
        protocol_cls = get_protocol(cell.protocol)
        run = build_protocol(protocol_cls, cell.f1, x_seq, y_seq, cell.m, seed=cell.seed).run()
        rate = float(run.rate)

    exact = str(result.e_n) if isinstance(result.e_n, Fraction) else None
    argmax_x, argmax_y = (" ".join(s) for s in result.argmax) if result.argmax else (None, None)
    return DistortionReport(
        f1=cell.f1.name,
        n=cell.n,
        m=cell.m,
        method=result.method,
        e_n=float(result.e_n),
        e_n_exact=exact,
        bound=result.bound,
        R=rate,
        protocol=cell.protocol,
        seed=cell.seed,
        trials=result.trials,
        pairs_examined=result.pairs_examined,
        argmax_label=result.argmax_label,
        argmax_x=argmax_x,
        argmax_y=argmax_y,
    )


def distortion_experiment(
    f1: FunctionTable,
    n_list: Sequence[int],
    m_list: Sequence[int],
    mode: str = "exhaustive",
    trials: Optional[int] = None,
    seed: int = 0,
    protocol: Optional[str] = "poly-l",
    workers: Optional[int] = None,
    budget: Optional[int] = None,
    pair_budget: Optional[int] = None,
) -> List[DistortionReport]:
    """按 (n, m) 的字典序返回报告；m > n 的格点跳过"""
    cells = []
    for n in n_list:
        for m in m_list:
            if m > n:
                logger.debug(f"跳过格点 n={n}, m={m}（m > n）")
                continue
            cells.append(DistortionCell(f1, n, m, mode, trials, seed, protocol, budget, pair_budget))
    logger.info(f"失真实验: f1={f1.name}, mode={mode}, {len(cells)} 个格点")
    return run_cells(_run_cell, cells, workers)
