"""格点分发的顺序与进程池执行"""
import pytest

from app.services.sweep import fan_out, run_cells


def _square(value: int) -> int:
    return value * value


@pytest.mark.asyncio
async def test_fan_out_inline_keeps_order():
    assert await fan_out(_square, [3, 1, 2], workers=1) == [9, 1, 4]


@pytest.mark.asyncio
async def test_fan_out_process_pool_keeps_order():
    cells = list(range(12, 0, -1))
    assert await fan_out(_square, cells, workers=2) == [c * c for c in cells]


def test_run_cells_matches_inline():
    cells = [5, 0, 7]
    assert run_cells(_square, cells, workers=2) == run_cells(_square, cells, workers=1) == [25, 0, 49]


def test_run_cells_empty():
    assert run_cells(_square, [], workers=3) == []
