"""distortion 子命令"""
from typing import Dict, Optional, TextIO, Type

from loguru import logger

from app.cli import load_f1, resolved, write_output
from app.core.exceptions import EXIT_OK
from app.schemas.run_config import RunConfig
from app.services.distortion import distortion_experiment
from app.services.engine import Protocol
from app.services.reporting import DISTORTION_COLUMNS, distortion_rows, render_config, render_csv, render_json, render_table


def cmd_distortion(config: RunConfig, out: TextIO, registry: Optional[Dict[str, Type[Protocol]]] = None) -> int:
    f1 = load_f1(config)
    reports = distortion_experiment(
        f1,
        config.n_list,
        config.m_list,
        mode=config.mode,
        trials=config.trials,
        seed=config.seed or 0,
        protocol=config.protocol,
        workers=config.workers,
        budget=config.enumeration_budget,
        pair_budget=config.pair_budget,
    )

    output_format = config.format or "csv"
    if output_format == "json":
        text = render_json(reports, config=resolved(config))
    elif output_format == "text":
        text = render_config(resolved(config)) + render_table(DISTORTION_COLUMNS, distortion_rows(reports))
    else:
        logger.info(f"配置: {resolved(config)}")
        text = render_csv(DISTORTION_COLUMNS, distortion_rows(reports))
    write_output(text, config, out)
    return EXIT_OK
