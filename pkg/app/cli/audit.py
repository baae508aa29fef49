"""audit 子命令：对选定协议跑三个隐私定义"""
from typing import Dict, Optional, TextIO, Type

from app.cli import load_f1, resolved, write_output
from app.core.exceptions import EXIT_OK, EXIT_VERIFICATION_FAILED, ConfigurationException
from app.schemas.run_config import RunConfig
from app.services.engine import Protocol
from app.services.field import PrimeField
from app.services.privacy_audit import PrivacyAuditor
from app.services.reporting import PRIVACY_COLUMNS, privacy_rows, render_config, render_csv, render_json, render_table
from app.services.sampling import IndexSet


def cmd_audit(config: RunConfig, out: TextIO, registry: Optional[Dict[str, Type[Protocol]]] = None) -> int:
    """任一定义未通过时返回 1"""
    if config.n is None:
        raise ConfigurationException("n", "audit needs --n")
    n = config.n
    m = n if config.m == "equal-n" else config.m
    if m is None:
        raise ConfigurationException("m", "audit needs --m")

    f1 = load_f1(config)
    index_set = IndexSet(tuple(config.fixed_index), n) if config.fixed_index else None
    auditor = PrivacyAuditor(
        config.protocol,
        f1,
        n,
        m,
        field=PrimeField(config.modulus) if config.modulus else None,
        rerandomize=config.rerandomize,
        index_set=index_set,
        budget=config.audit_budget,
        workers=config.workers,
        registry=registry,
    )
    reports = auditor.audit_all()

    output_format = config.format or "text"
    if output_format == "json":
        text = render_json(reports, config=resolved(config))
    elif output_format == "csv":
        text = render_csv(PRIVACY_COLUMNS, privacy_rows(reports))
    else:
        text = render_config(resolved(config)) + render_table(PRIVACY_COLUMNS, privacy_rows(reports))
    write_output(text, config, out)

    return EXIT_OK if all(report.verdict == "pass" for report in reports) else EXIT_VERIFICATION_FAILED
