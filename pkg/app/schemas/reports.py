"""报告相关 Schema"""
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_serializer, model_validator


class PrivacyReport(BaseModel):
    """隐私审计报告"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    protocol: str = Field(..., description="协议ID")
    definition: Literal["against_alice", "against_bob", "against_charlie"] = Field(..., description="检验的隐私定义")
    mode: Literal["full", "fixed-index"] = Field("full", description="full 枚举包含 I 的抽取；fixed-index 固定 I（较弱）")
    rerandomize: bool = Field(False, description="多项式协议是否使用再随机化")
    n: int
    m: int
    x_alphabet: List[str]
    y_alphabet: List[str]
    modulus: int
    inputs_compared: int = Field(..., description="参与比较的输入数")
    comparisons: int = Field(0, description="实际比较的分布对数")
    verdict: Literal["pass", "fail"]
    worst_distance: Fraction = Field(..., description="最大全变差距离（精确有理数）")
    enumeration_size: int = Field(..., description="每个输入枚举的随机纸带数")
    witness: Optional[List[str]] = Field(None, description="距离最大的一对输入")
    note: Optional[str] = None

    @field_serializer("worst_distance")
    def _serialize_distance(self, value: Fraction) -> str:
        return str(value)

    @model_validator(mode="after")
    def _verdict_matches_distance(self) -> "PrivacyReport":
        if (self.verdict == "pass") != (self.worst_distance == 0):
            raise ValueError(f"verdict {self.verdict} contradicts distance {self.worst_distance}")
        return self


class DistortionReport(BaseModel):
    """失真实验报告（每个 (n, m) 一行）"""

    f1: str = Field(..., description="函数表名称")
    n: int
    m: int
    method: Literal["exhaustive", "monte_carlo"]
    e_n: float = Field(..., description="测得的最坏情况期望绝对误差")
    e_n_exact: Optional[str] = Field(None, description="精确值（穷举或内层精确枚举时）")
    bound: float = Field(..., description="||f1||_2 / sqrt(m)")
    R: Optional[float] = Field(None, description="同参数下实际协议运行的码率 k/n")
    protocol: Optional[str] = None
    seed: Optional[int] = None
    trials: Optional[int] = None
    pairs_examined: int = 0
    argmax_label: Optional[str] = None
    argmax_x: Optional[str] = None
    argmax_y: Optional[str] = None

    @model_validator(mode="after")
    def _exact_within_bound(self) -> "DistortionReport":
        if self.method == "exhaustive" and self.e_n > self.bound + 1e-12:
            raise ValueError(f"exhaustive e_n={self.e_n} exceeds bound {self.bound}")
        return self


class CommCostRow(BaseModel):
    """通信代价表的一行"""

    protocol: str
    n: int
    m: int
    modulus: int
    index_bits: int = Field(..., description="m·⌈log2 n⌉")
    extra_bits: int = Field(..., description="协议本身的附加位数")
    k: int = Field(..., description="总位数")
    R: float = Field(..., description="k / n")
    R_exact: str = Field(..., description="k / n 的精确值")
    metered: Optional[int] = Field(None, description="实际运行计量的总位数")
    rerandomize: bool = False


class ProtocolSummary(BaseModel):
    """一次协议运行的摘要"""

    protocol: str
    n: int
    m: int
    modulus: int
    seed: Optional[int]
    index_set: List[int]
    estimate: str = Field(..., description="F̂_n")
    truth: str = Field(..., description="f_n")
    abs_error: str = Field(..., description="|F̂_n − f_n|")
    total_bits: int
    index_bits: int
    extra_bits: int
    R: str
    bits_by_channel: Dict[str, int]
    config: Dict[str, Any] = Field(default_factory=dict, description="完整解析后的运行配置")
