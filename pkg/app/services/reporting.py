"""报告输出：JSON（机器可读）、对齐文本（人读）、CSV（失真与通信代价表）

所有输出都是输入的确定性函数，相同配置与种子下逐字节一致。
"""
import csv
import io
import json
from typing import Any, Dict, List, Optional, Sequence

import jinja2
from pydantic import BaseModel

from app.schemas.reports import CommCostRow, DistortionReport, PrivacyReport, ProtocolSummary

DISTORTION_COLUMNS = ("n", "m", "e_n", "bound", "R", "protocol", "method", "seed", "trials")
COMM_COST_COLUMNS = ("protocol", "n", "m", "modulus", "index_bits", "extra_bits", "k", "R")

_ENV = jinja2.Environment(trim_blocks=True, lstrip_blocks=True, keep_trailing_newline=True)

_TABLE_TEMPLATE = _ENV.from_string(
    """{% for row in rows %}
{% for cell in row %}{{ cell.ljust(widths[loop.index0]) if not loop.last else cell }}{{ "  " if not loop.last }}{% endfor %}

{% endfor %}
"""
)

_SUMMARY_TEMPLATE = _ENV.from_string(
    """protocol      {{ s.protocol }}
n             {{ s.n }}
m             {{ s.m }}
modulus       {{ s.modulus }}
seed          {{ s.seed }}
estimate      {{ s.estimate }}
f_n           {{ s.truth }}
abs_error     {{ s.abs_error }}
k             {{ s.total_bits }} ({{ s.index_bits }} index + {{ s.extra_bits }} protocol)
R             {{ s.R }}
{% for channel, bits in s.bits_by_channel.items() %}
channel       {{ channel }} {{ bits }}
{% endfor %}
"""
)


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_json(models: Sequence[BaseModel], config: Optional[Dict[str, Any]] = None) -> str:
    """JSON 输出，附带完整解析后的配置"""
    payload: Dict[str, Any] = {"results": [model.model_dump(mode="json") for model in models]}
    if config is not None:
        payload["config"] = config
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def render_table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """对齐列文本"""
    text_rows: List[List[str]] = [list(header)] + [[_format(v) for v in row] for row in rows]
    widths = [max(len(row[i]) for row in text_rows) for i in range(len(header))]
    return _TABLE_TEMPLATE.render(rows=text_rows, widths=widths)


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """RFC 4180 风格 CSV（需要时加引号，行尾 CRLF）"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format(v) for v in row])
    return buffer.getvalue()


def distortion_rows(reports: Sequence[DistortionReport]) -> List[List[Any]]:
    return [[getattr(report, column) for column in DISTORTION_COLUMNS] for report in reports]


def comm_cost_rows(rows: Sequence[CommCostRow]) -> List[List[Any]]:
    return [[getattr(row, column) for column in COMM_COST_COLUMNS] for row in rows]


def privacy_rows(reports: Sequence[PrivacyReport]) -> List[List[Any]]:
    return [
        [r.protocol, r.definition, r.mode, r.verdict, str(r.worst_distance), r.inputs_compared, r.enumeration_size]
        for r in reports
    ]


PRIVACY_COLUMNS = ("protocol", "definition", "mode", "verdict", "worst_distance", "inputs", "tapes_per_input")


def render_summary(summary: ProtocolSummary) -> str:
    return _SUMMARY_TEMPLATE.render(s=summary)


def render_config(config: Dict[str, Any]) -> str:
    """配置回显，每行 `# key: value`"""
    return "".join(f"# {key}: {_format(value)}\n" for key, value in sorted(config.items()))
