"""命令行：参数解析、配置文件合并与公共辅助函数

配置优先级：命令行参数 > --config 指定的 YAML 文件（扁平的 key: value）> 默认值。
"""
import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO

import yaml
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import ConfigurationException, ParseException
from app.schemas.run_config import RunConfig
from app.services.funcspec import FunctionTable, load_function_table

LIST_COMMANDS = ("distortion", "comm-cost")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML 配置文件（扁平 key: value）")
    parser.add_argument("--protocol", help="otp / poly-l / poly-direct")
    parser.add_argument("--f1", help="内置函数表名称或函数表文件")
    parser.add_argument("--alphabet-size", type=int, help="内置函数表的 |X|")
    parser.add_argument("--y-alphabet-size", type=int, help="内置函数表的 |Y|")
    parser.add_argument("--alphabets", help="|X|,|Y|，例如 2,2")
    parser.add_argument("--seed", type=int, help="随机种子")
    parser.add_argument("--format", choices=("text", "json", "csv"), help="输出格式")
    parser.add_argument("--output", help="输出文件")
    parser.add_argument("--workers", type=int, help="并发进程数")
    parser.add_argument("--enumeration-budget", type=int, help="子集枚举预算")
    parser.add_argument("--audit-budget", type=int, help="隐私审计预算")
    parser.add_argument("--pair-budget", type=int, help="穷举序列对预算")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smc", description="三方安全计算求和型函数：协议运行、隐私审计与实验"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="运行一次协议", argument_default=argparse.SUPPRESS)
    _add_common(run)
    run.add_argument("--x", help="x^n 序列文件")
    run.add_argument("--y", help="y^n 序列文件")
    run.add_argument("--generator", help="内置序列生成器")
    run.add_argument("--period", type=int, help="periodic 生成器的周期")
    run.add_argument("--n", help="序列长度（生成器使用）")
    run.add_argument("--m", help="采样数，或 equal-n")
    run.add_argument("--modulus", type=int, help="指定素数域")
    run.add_argument("--rerandomize", action="store_true", help="多项式协议再随机化")
    run.add_argument("--transcript", help="消息转储文件")

    audit = subparsers.add_parser("audit", help="精确隐私审计", argument_default=argparse.SUPPRESS)
    _add_common(audit)
    audit.add_argument("--n", help="序列长度")
    audit.add_argument("--m", help="采样数")
    audit.add_argument("--modulus", type=int, help="指定素数域")
    audit.add_argument("--rerandomize", action="store_true", help="多项式协议再随机化")
    audit.add_argument("--fixed-index", help="固定下标集，例如 1,2（较弱模式）")

    distortion = subparsers.add_parser("distortion", help="失真实验", argument_default=argparse.SUPPRESS)
    _add_common(distortion)
    distortion.add_argument("--n", help="n 网格，例如 4,6")
    distortion.add_argument("--m", help="m 网格，例如 1,2,3,4")
    distortion.add_argument("--mode", choices=("exhaustive", "monte_carlo"), help="搜索模式")
    distortion.add_argument("--trials", type=int, help="Monte Carlo 试验次数")

    comm_cost = subparsers.add_parser("comm-cost", help="通信代价表", argument_default=argparse.SUPPRESS)
    _add_common(comm_cost)
    comm_cost.add_argument("--n", help="n 网格，例如 64,256,1024")
    comm_cost.add_argument("--m", help="fixed 规则的 m，或 custom 规则的 m 列表")
    comm_cost.add_argument("--m-rule", choices=("fixed", "sqrt", "equal-n", "custom"), help="m 规则")
    comm_cost.add_argument("--modulus", type=int, help="指定素数域")
    comm_cost.add_argument("--rerandomize", action="store_true", help="多项式协议再随机化")
    comm_cost.add_argument("--live", action="store_true", help="实际运行并核对计量")
    return parser


def _int_list(key: str, value: Any) -> List[int]:
    if value is None or value == "":
        return []
    if isinstance(value, int):
        return [value]
    if isinstance(value, (list, tuple)):
        items = value
    else:
        items = [item for item in str(value).split(",") if item.strip()]
    try:
        return [int(item) for item in items]
    except (TypeError, ValueError):
        raise ConfigurationException(key, f"expected a comma separated list of integers, got {value!r}")


def _int_or_equal_n(key: str, value: Any) -> Any:
    if value in (None, "equal-n"):
        return value
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigurationException(key, f"expected an integer or 'equal-n', got {value!r}")


def normalize(command: str, raw: Dict[str, Any]) -> Dict[str, Any]:
    """把参数或配置文件的取值规范为 RunConfig 字段"""
    values = {key.replace("-", "_"): value for key, value in raw.items()}
    values.pop("config", None)

    alphabets = values.pop("alphabets", None)
    if alphabets is not None:
        sizes = _int_list("alphabets", alphabets)
        if len(sizes) not in (1, 2):
            raise ConfigurationException("alphabets", f"expected |X| or |X|,|Y|, got {alphabets!r}")
        values["alphabet_size"] = sizes[0]
        values["y_alphabet_size"] = sizes[-1]

    if "fixed_index" in values:
        values["fixed_index"] = _int_list("fixed_index", values["fixed_index"]) or None

    if command in LIST_COMMANDS:
        if "n" in values:
            values["n_list"] = _int_list("n", values.pop("n"))
        if "m" in values:
            m_values = _int_list("m", values.pop("m"))
            if command == "distortion" or values.get("m_rule") == "custom":
                values["m_list"] = m_values
            elif m_values:
                values["m"] = m_values[0]
    else:
        if "n" in values:
            n_value = values["n"]
            values["n"] = None if n_value is None else _int_or_equal_n("n", n_value)
        if "m" in values:
            values["m"] = _int_or_equal_n("m", values["m"])
    return values


def load_config_file(path: str) -> Dict[str, Any]:
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigurationException("config", f"config file '{path}' does not exist")
    try:
        data = yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseException(str(config_path), mark.line + 1 if mark else 0, str(exc))
    if not isinstance(data, dict):
        raise ParseException(str(config_path), 1, "config file must be a flat key: value mapping")
    return data


def parse_run_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """解析命令行并与配置文件合并"""
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")

    merged: Dict[str, Any] = {}
    if "config" in args:
        merged.update(normalize(command, load_config_file(args["config"])))
    merged.update(normalize(command, args))
    merged["command"] = command
    try:
        return RunConfig(**merged)
    except ValidationError as exc:
        raise ConfigurationException("run_config", "; ".join(error["msg"] for error in exc.errors()))


def load_f1(config: RunConfig) -> FunctionTable:
    return load_function_table(config.f1, config.alphabet_size, config.y_alphabet_size)


def resolved(config: RunConfig) -> Dict[str, Any]:
    """用于回显的完整配置（含生效的预算）"""
    echo = config.model_dump(exclude_none=True)
    echo.setdefault("enumeration_budget", settings.ENUMERATION_BUDGET)
    echo.setdefault("audit_budget", settings.AUDIT_BUDGET)
    echo.setdefault("pair_budget", settings.EXHAUSTIVE_PAIR_BUDGET)
    echo.setdefault("workers", settings.WORKERS)
    return echo


def write_output(text: str, config: RunConfig, out: TextIO) -> None:
    if config.output:
        Path(config.output).write_text(text, encoding="utf-8", newline="")
    else:
        out.write(text)
