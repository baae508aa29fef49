"""通信代价报告

按闭式计算 k = m·⌈log2 n⌉ + 协议附加位数 与 R = k/n；live 模式实际运行
协议并要求计量结果与闭式逐位相等。
"""
import math
from fractions import Fraction
from typing import List, Optional, Sequence

from loguru import logger

from app.core.exceptions import ConsistencyException, FieldArithmeticException, ValidationException
from app.schemas.reports import CommCostRow
from app.services.engine import PROTOCOLS, build_protocol, get_protocol, supports_rerandomize
from app.services.field import PrimeField, ceil_log2
from app.services.funcspec import FunctionTable
from app.services.sequences import generate_pair

M_RULES = ("fixed", "sqrt", "equal-n", "custom")


def ceil_sqrt(n: int) -> int:
    root = math.isqrt(n)
    return root if root * root == n else root + 1


def resolve_m(
    rule: str,
    n_list: Sequence[int],
    m_value: Optional[int] = None,
    m_values: Optional[Sequence[int]] = None,
) -> List[int]:
    """按规则为每个 n 给出 m"""
    if not n_list:
        return []
    if rule == "fixed":
        if m_value is None:
            raise ValidationException("m", "m-rule 'fixed' needs an m value")
        return [m_value for _ in n_list]
    if rule == "sqrt":
        return [ceil_sqrt(n) for n in n_list]
    if rule == "equal-n":
        return list(n_list)
    if rule == "custom":
        if m_values is None or len(m_values) != len(n_list):
            raise ValidationException("m", "m-rule 'custom' needs one m per n")
        return list(m_values)
    raise ValidationException("m_rule", f"unknown m-rule '{rule}', choose from {M_RULES}")


def _cost_row(
    protocol_id: str,
    f1: FunctionTable,
    n: int,
    m: int,
    modulus: Optional[int],
    rerandomize: bool,
    live: bool,
    seed: int,
) -> CommCostRow:
    protocol_cls = get_protocol(protocol_id)
    field = protocol_cls.field_for(f1, m)
    if modulus is not None:
        if modulus < field.modulus:
            raise FieldArithmeticException(
                "field", f"F_{modulus} is too small for {protocol_id} at m={m}, need p >= {field.modulus}"
            )
        field = PrimeField(modulus)
    index_bits = m * ceil_log2(n)
    extra_bits = protocol_cls.closed_form_extra_bits(f1, m, field.modulus, rerandomize)
    k = index_bits + extra_bits

    metered = None
    if live:
        x_seq, y_seq = generate_pair("seeded-random", f1.x_alphabet, f1.y_alphabet, n, seed=seed)
        result = build_protocol(
            protocol_cls, f1, x_seq, y_seq, m, rerandomize=rerandomize, seed=seed, field=field
        ).run()
        metered = result.total_bits
        if metered != k:
            logger.error(f"{protocol_id} n={n} m={m}: 计量 {metered} 位，闭式 {k} 位")
            raise ConsistencyException(
                "bit_meter",
                f"metered {metered} bits but closed form gives {k}",
                {"protocol": protocol_id, "n": n, "m": m, "modulus": field.modulus},
            )

    rate = Fraction(k, n)
    return CommCostRow(
        protocol=protocol_id,
        n=n,
        m=m,
        modulus=field.modulus,
        index_bits=index_bits,
        extra_bits=extra_bits,
        k=k,
        R=float(rate),
        R_exact=str(rate),
        metered=metered,
        rerandomize=rerandomize,
    )


def comm_report(
    protocol: str,
    f1: FunctionTable,
    n_list: Sequence[int],
    m_rule: str = "sqrt",
    m_value: Optional[int] = None,
    m_values: Optional[Sequence[int]] = None,
    modulus: Optional[int] = None,
    rerandomize: bool = False,
    live: bool = False,
    seed: int = 0,
) -> List[CommCostRow]:
    """每个 (协议, n) 一行；protocol="all" 时依次给出三个协议"""
    protocol_ids = list(PROTOCOLS) if protocol == "all" else [protocol]
    m_list = resolve_m(m_rule, n_list, m_value, m_values)
    for n, m in zip(n_list, m_list):
        if not 1 <= m <= n:
            raise ValidationException("m", f"m-rule '{m_rule}' gives m={m} for n={n}")

    rows = []
    for protocol_id in protocol_ids:
        poly = supports_rerandomize(get_protocol(protocol_id))
        for n, m in zip(n_list, m_list):
            rows.append(
                _cost_row(protocol_id, f1, n, m, modulus, rerandomize and poly, live, seed)
            )
    logger.info(f"通信代价: {len(rows)} 行 (m-rule={m_rule}, live={live})")
    return rows
