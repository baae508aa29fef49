"""run 子命令：执行一次协议并输出结果"""
from pathlib import Path
from typing import Dict, Optional, TextIO, Type

from loguru import logger

from app.cli import load_f1, resolved, write_output
from app.core.exceptions import EXIT_OK, ConfigurationException, ValidationException
from app.schemas.reports import ProtocolSummary
from app.schemas.run_config import RunConfig
from app.services.engine import Protocol, build_protocol, get_protocol
from app.services.field import PrimeField
from app.services.funcspec import FunctionTable, eval_sum_type
from app.services.reporting import render_config, render_json, render_summary
from app.services.sequences import SequencePair, generate_pair, read_sequence


def resolve_sequences(config: RunConfig, f1: FunctionTable) -> SequencePair:
    """序列来自文件（--x/--y）或内置生成器（--generator 与 --n）"""
    if config.x or config.y:
        if not (config.x and config.y):
            raise ConfigurationException("x/y", "both --x and --y are required when reading sequences from files")
        return read_sequence(config.x, f1.x_alphabet), read_sequence(config.y, f1.y_alphabet)
    if config.generator:
        if config.n is None:
            raise ConfigurationException("n", f"generator '{config.generator}' needs --n")
        return generate_pair(
            config.generator, f1.x_alphabet, f1.y_alphabet, config.n, seed=config.seed or 0, period=config.period
        )
    raise ConfigurationException("x/y", "supply --x and --y, or --generator with --n")


def resolve_m(config: RunConfig, n: int) -> int:
    if config.m is None:
        raise ConfigurationException("m", "--m is required (an integer or equal-n)")
    m = n if config.m == "equal-n" else config.m
    if not 1 <= m <= n:
        raise ValidationException("m", f"sample size must satisfy 1 <= m <= n, got m={m}, n={n}")
    return m


def cmd_run(config: RunConfig, out: TextIO, registry: Optional[Dict[str, Type[Protocol]]] = None) -> int:
    f1 = load_f1(config)
    x_seq, y_seq = resolve_sequences(config, f1)
    n = len(x_seq)
    m = resolve_m(config, n)
    field = PrimeField(config.modulus) if config.modulus else None

    protocol_cls = get_protocol(config.protocol, registry)
    logger.info(f"运行协议 {config.protocol}: n={n}, m={m}, seed={config.seed}")
    result = build_protocol(
        protocol_cls, f1, x_seq, y_seq, m, rerandomize=config.rerandomize, seed=config.seed, field=field
    ).run()

    truth = eval_sum_type(f1, x_seq, y_seq)
    summary = ProtocolSummary(
        protocol=result.protocol_id,
        n=n,
        m=m,
        modulus=result.modulus,
        seed=config.seed,
        index_set=list(result.index_set.indices),
        estimate=str(result.estimate),
        truth=str(truth),
        abs_error=str(abs(result.estimate - truth)),
        total_bits=result.total_bits,
        index_bits=result.index_bits,
        extra_bits=result.extra_bits,
        R=str(result.rate),
        bits_by_channel={
            f"{sender.value}→{receiver.value}": bits
            for (sender, receiver), bits in sorted(result.bits_by_channel.items())
        },
        config=resolved(config),
    )

    if config.transcript:
        Path(config.transcript).write_text(result.dump_transcript(), encoding="utf-8")
        logger.info(f"消息转储已写入 {config.transcript}")

    output_format = config.format or "text"
    if output_format == "json":
        text = render_json([summary])
    elif output_format == "text":
        text = render_config(resolved(config)) + render_summary(summary)
    else:
        raise ConfigurationException("format", "run supports text and json output")
    write_output(text, config, out)
    return EXIT_OK
