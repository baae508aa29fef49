"""实验网格的并发分发

每个格点是独立的纯计算任务，交给进程池执行；输出顺序与格点顺序一致，
与完成顺序无关。workers <= 1 时在当前进程内顺序执行。
"""
import asyncio
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from loguru import logger

from app.core.config import settings

Cell = TypeVar("Cell")
Result = TypeVar("Result")


async def fan_out(func: Callable[[Cell], Result], cells: Iterable[Cell], workers: Optional[int] = None) -> List[Result]:
    """并发执行 func(cell)，按输入顺序返回结果"""
    cells = list(cells)
    workers = settings.WORKERS if workers is None else workers
    if workers <= 1 or len(cells) <= 1:
        return [func(cell) for cell in cells]

    logger.info(f"分发 {len(cells)} 个格点到 {workers} 个进程")
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [loop.run_in_executor(pool, func, cell) for cell in cells]
        return list(await asyncio.gather(*futures))


def run_cells(func: Callable[[Cell], Result], cells: Iterable[Cell], workers: Optional[int] = None) -> List[Result]:
    """fan_out 的同步入口"""
    cells = list(cells)
    workers = settings.WORKERS if workers is None else workers
    if workers <= 1:
        return [func(cell) for cell in cells]
    return asyncio.run(fan_out(func, cells, workers))
