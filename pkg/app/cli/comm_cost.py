"""comm-cost 子命令"""
from typing import Dict, Optional, TextIO, Type

from loguru import logger

from app.cli import load_f1, resolved, write_output
from app.core.exceptions import EXIT_OK
from app.schemas.run_config import RunConfig
from app.services.comm_cost import comm_report
from app.services.engine import Protocol
from app.services.reporting import COMM_COST_COLUMNS, comm_cost_rows, render_config, render_csv, render_json, render_table


def cmd_comm_cost(config: RunConfig, out: TextIO, registry: Optional[Dict[str, Type[Protocol]]] = None) -> int:
    f1 = load_f1(config)
    rows = comm_report(
        config.protocol,
        f1,
        config.n_list,
        m_rule=config.m_rule,
        m_value=config.m if isinstance(config.m, int) else None,
        m_values=config.m_list or None,
        modulus=config.modulus,
        rerandomize=config.rerandomize,
        live=config.live,
        seed=config.seed or 0,
    )

    output_format = config.format or "csv"
    if output_format == "json":
        text = render_json(rows, config=resolved(config))
    elif output_format == "text":
        text = render_config(resolved(config)) + render_table(COMM_COST_COLUMNS, comm_cost_rows(rows))
    else:
        logger.info(f"配置: {resolved(config)}")
        text = render_csv(COMM_COST_COLUMNS, comm_cost_rows(rows))
    write_output(text, config, out)
    return EXIT_OK
