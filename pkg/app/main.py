"""应用入口：python -m app.main <command> [flags]

日志写到标准错误，命令结果写到标准输出。
"""
import sys
from typing import Callable, Dict, Optional, Sequence, TextIO, Type

from loguru import logger

from app.cli import parse_run_config
from app.cli.audit import cmd_audit
from app.cli.comm_cost import cmd_comm_cost
from app.cli.distortion import cmd_distortion
from app.cli.run import cmd_run
from app.core.config import settings
from app.core.exceptions import EXIT_RESOURCE_ERROR, SMCException
from app.schemas.run_config import RunConfig
from app.services.engine import Protocol


def configure_logging(level: Optional[str] = None) -> None:
    """配置日志级别"""
    logger.remove()  # 移除默认处理器
    logger.add(
        sys.stderr,
        level=level or settings.LOG_LEVEL,
        format="<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
    )


Command = Callable[[RunConfig, TextIO, Optional[Dict[str, Type[Protocol]]]], int]

COMMANDS: Dict[str, Command] = {
    "run": cmd_run,
    "audit": cmd_audit,
    "distortion": cmd_distortion,
    "comm-cost": cmd_comm_cost,
}


def main(
    argv: Optional[Sequence[str]] = None,
    out: Optional[TextIO] = None,
    registry: Optional[Dict[str, Type[Protocol]]] = None,
) -> int:
    """解析参数并分发命令，返回进程退出码

    0 成功/通过，1 校验失败，2 资源或配置错误。
    """
    out = sys.stdout if out is None else out
    try:
        config = parse_run_config(argv)
        logger.debug(f"{settings.APP_NAME} {settings.APP_VERSION}: {config.command}")
        return COMMANDS[config.command](config, out, registry)
    except SMCException as exc:
        logger.bind(details=exc.details).error(f"{type(exc).__name__}: {exc.code} - {exc.message}")
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.exit_code
    except SystemExit as exc:
        # argparse 的用法错误
        return exc.code if isinstance(exc.code, int) else EXIT_RESOURCE_ERROR


if __name__ == "__main__":
    configure_logging()
    sys.exit(main())
